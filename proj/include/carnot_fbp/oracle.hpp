#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

#include "carnot_fbp/geometry.hpp"
#include "carnot_fbp/model.hpp"

namespace cfbp {

/// Symmetric profile on (0, L) stored on [0, L/2]. Nodes are increasing; a
/// repeated abscissa marks a kink (left and right derivative). Evaluation is
/// cubic Hermite on the stored (u, u') pairs.
struct Profile {
  double length = 1.0;
  std::vector<double> x, u, du;

  double operator()(double xq) const;
  double max_value() const;
  /// Values at the nodes of a 1-D grid.
  Eigen::VectorXd sample(const Grid& grid) const;
};

/// -u'' = beta u^{-delta} on (0, L), u = 0 at both ends, by bisection on the
/// initial slope with RK4 on a mesh graded towards x = 0 (n steps on [0, L/2]).
/// Throws NoSolution on bracket failure.
Profile shoot_singular(double beta, double delta, int n, double length = 1.0);

struct FreeBoundaryShot {
  Profile profile;
  double slope0 = 0.0;         // u'(0)
  double crossing = 0.0;       // x where u = 1 on the left half
  double slope_outer = 0.0;    // u' at the crossing from {u < 1}
  double slope_inner = 0.0;    // u' at the crossing from {u > 1}
  double jump_residual = 0.0;  // |inner^2 - outer^2 - 2|
};

struct FreeBoundaryPair {
  FreeBoundaryShot u0;  // larger {u > 1}
  FreeBoundaryShot u1;
  std::vector<double> roots;  // all matching slopes found, increasing
};

/// Symmetric solutions of the 1-D free boundary problem by phase-plane
/// matching. Throws GeometryFailure when fewer than two matches exist.
FreeBoundaryPair shoot_free_boundary(const ModelParams& params, int n, double length = 1.0);

struct ScanAxis {
  double lo = 0.0, hi = 1.0;
  int count = 2;
  bool log = false;
  double at(int i) const;
};

struct ScanResult {
  std::vector<double> arg;
  double value = 0.0;
};

/// Exhaustive evaluation over the tensor grid of the axes.
ScanResult dense_scan_min(const std::function<double(const std::vector<double>&)>& f,
                          const std::vector<ScanAxis>& axes);
ScanResult dense_scan_max(const std::function<double(const std::vector<double>&)>& f,
                          const std::vector<ScanAxis>& axes);
/// Largest grid value where pred holds (NaN if none).
double dense_scan_threshold(const std::function<bool(double)>& pred, const ScanAxis& axis);
/// Composite trapezoid rule with `count` points.
double dense_integral(const std::function<double(double)>& f, double lo, double hi, int count);

}  // namespace cfbp
