#pragma once

#include <cstdint>
#include <vector>

#include "carnot_fbp/solvers.hpp"

namespace cfbp {

struct MountainPassOptions {
  int path_points = 24;
  int max_iter = 500;
  /// Reparametrize by arclength every this many iterations.
  int reparam_every = 1;
  /// Residual level (relative to params().scale()) at which Newton takes over.
  double newton_switch = 1e-3;
  double tol = -1.0;  // <= 0: functional tolerance
  /// eps at which the hint was computed; enables the sub-stepped homotopy.
  double hint_epsilon = -1.0;
};

struct MountainPassResult {
  ScalarField u1;
  SolveReport report;
  std::vector<Eigen::VectorXd> path;  // nodal, from 0 to the endpoint
  std::vector<double> path_energy;
  int path_iterations = 0;
};

/// Saddle point of the (truncated) functional between 0 and `endpoint` by
/// deforming a discrete path: the highest interior point takes an
/// A^{-1}-gradient step orthogonal to the path tangent, the path is
/// re-equidistributed in the A-norm, and Newton polishes the result.
/// `warm_path`, if given, must have path_points entries; it is shifted so
/// that it ends at `endpoint`. With `hint` (typically the saddle of a nearby
/// problem) Newton is tried from there first, then along geometric eps
/// sub-steps from opt.hint_epsilon; the path is only deformed if both fail.
/// Throws GeometryFailure if E(endpoint) >= 0, if the path has no interior
/// maximum, or if the polished point is not a saddle distinct from the
/// endpoint.
MountainPassResult mountain_pass(const EnergyFunctional& e, const ScalarField& endpoint,
                                 const MountainPassOptions& opt = {},
                                 const std::vector<Eigen::VectorXd>* warm_path = nullptr,
                                 const ScalarField* hint = nullptr);

struct RimEstimate {
  double m2 = 0.0;          // max over the radius ladder
  double radius = 0.0;      // maximizing radius
  std::vector<double> radii, minima;
  double default_radius = 0.0;
  double m2_at_default = 0.0;  // min over directions at default_radius
};

/// Estimate of inf over ||u||_A = r of E: for each r of a geometric ladder
/// between 2.5 ||u_beta||_A and r_hi the minimum of E(r v) over `directions`
/// smooth random unit directions plus u0, u_beta and (if given) phi1; the
/// largest such minimum is reported. r_hi = 0.5 ||u0||_A, lowered to r_max
/// when r_max > 0. The default radius min(0.5 ||u0||_A, 0.1) is evaluated
/// separately.
/// With `path` (polygon from 0), the point where it first crosses each sphere
/// is sampled too. Passing 0 -> u1 -> u0 with r_max <= ||u1||_A samples the
/// ray through the saddle, which keeps m2 <= E(u1) whenever E(t u1) increases
/// up to t = 1.
RimEstimate rim_estimate(const EnergyFunctional& e, const ScalarField& u0, const ScalarField& u_beta,
                         const ScalarField* phi1 = nullptr, int directions = 64, int ladder = 12,
                         std::uint64_t seed = 7, const std::vector<Eigen::VectorXd>* path = nullptr,
                         double r_max = -1.0);

/// Newton iteration on E'(u) = 0 with backtracking on the residual; returns
/// the Morse index from the last factorization (-1 if unknown).
MinimizeResult newton_polish(const EnergyFunctional& e, const ScalarField& start, int max_steps = 200);

}  // namespace cfbp
