#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "carnot_fbp/geometry.hpp"
#include "carnot_fbp/model.hpp"

namespace cfbp {

/// Everything a run needs. Text form: `key = value` lines, optional
/// `[section]` headers (domain, model, schedule, solver, sweep, run), `#` or
/// `;` comments. Key names are unique across sections, so sections may be
/// omitted; a key under the wrong section is an error.
struct RunConfig {
  GroupKind group = GroupKind::euclid1;
  Point lo, hi;            // default unit box
  std::vector<int> nodes;  // per axis; one value is broadcast

  ModelParams model;

  double eps0 = 0.2;
  int J = 6;

  double tol = -1.0;  // <= 0: functional default
  int max_iter = 20000;
  int path_points = 24;
  int mp_max_iter = 500;
  int restarts = 8;
  double solve_eps = -1.0;  // `solve`: single eps, <= 0 means eps0

  double lambda_min = 1.0, lambda_max = 200.0;
  int lambda_count = 9;  // log-spaced
  double rel_width = 0.02;
  std::vector<double> betas;  // optional extra beta values for `sweep`

  std::string out = "out";
  std::uint64_t seed = 1;
  int threads = 0;  // 0: not set in the file
  std::string log_level = "info";

  /// Throws ConfigError naming the field and the violated range.
  void validate() const;
  /// Canonical text with every field materialized; parses back to *this.
  std::string to_text() const;
  /// FNV-1a of to_text() with out, threads and log_level reset, 16 hex digits.
  std::string hash() const;
  std::vector<double> schedule() const;
};

/// Throws ConfigError with the line number on syntax errors, unknown keys or
/// bad values; the result is validated.
RunConfig parse_config_text(const std::string& text, const std::string& origin = "<string>");
RunConfig parse_config(const std::string& path);

std::uint64_t fnv1a64(const std::string& s) noexcept;

}  // namespace cfbp
