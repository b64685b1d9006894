#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "carnot_fbp/geometry.hpp"

namespace cfbp {

/// CSV table. The first line is a `#` comment carrying the title, the units
/// note and the config hash; the second names the columns. Numbers use
/// %.17g so output is byte-stable.
struct Table {
  std::string title;
  std::string units = "dimensionless";
  std::string config_hash;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add_row(std::vector<double> row);
  void write(std::ostream& os) const;
  void write(const std::string& path) const;
};

std::string format_number(double v);

/// Field dump: columns x1[,x2[,x3]],u in row-major node order.
void write_field_csv(const std::string& path, const ScalarField& u, const std::string& config_hash,
                     const std::string& name = "u");

/// Reads a table written by Table::write (comment line skipped).
Table read_table(const std::string& path);

}  // namespace cfbp
