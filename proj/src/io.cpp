#include "carnot_fbp/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <cstdlib>
#include <stdexcept>

#include "carnot_fbp/errors.hpp"

namespace cfbp {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void Table::add_row(std::vector<double> row) {
  if (row.size() != columns.size()) throw InvalidArgument("Table::add_row: column count mismatch in " + title);
  rows.push_back(std::move(row));
}

void Table::write(std::ostream& os) const {
  os << "# " << title << "; units: " << units << "; config_hash=" << config_hash << '\n';
  for (std::size_t c = 0; c < columns.size(); ++c) os << (c ? "," : "") << columns[c];
  os << '\n';
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size(); ++c) os << (c ? "," : "") << format_number(r[c]);
    os << '\n';
  }
}

void Table::write(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  write(f);
}

void write_field_csv(const std::string& path, const ScalarField& u, const std::string& config_hash,
                     const std::string& name) {
  const Grid& g = u.grid();
  Table t;
  t.title = "field " + name;
  t.units = "coordinates in box units";
  t.config_hash = config_hash;
  for (int a = 0; a < g.dim(); ++a) t.columns.push_back("x" + std::to_string(a + 1));
  t.columns.push_back(name);
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  // written row by row; fields can be large
  t.write(f);
  double x[3];
  for (std::size_t n = 0; n < g.num_nodes(); ++n) {
    g.coords(n, x);
    for (int a = 0; a < g.dim(); ++a) f << format_number(x[a]) << ',';
    f << format_number(u[n]) << '\n';
  }
}

Table read_table(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path);
  Table t;
  std::string line;
  if (!std::getline(f, line) || line.rfind("# ", 0) != 0) throw std::runtime_error(path + ": missing header comment");
  const auto h = line.find("config_hash=");
  if (h != std::string::npos) t.config_hash = line.substr(h + 12);
  t.title = line.substr(2, line.find(';') - 2);
  if (!std::getline(f, line)) throw std::runtime_error(path + ": missing column row");
  {
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) t.columns.push_back(c);
  }
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string c;
    std::vector<double> row;
    while (std::getline(ss, c, ',')) row.push_back(std::strtod(c.c_str(), nullptr));
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace cfbp
