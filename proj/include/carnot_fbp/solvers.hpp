#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "carnot_fbp/model.hpp"

namespace cfbp {

struct SolveReport {
  double energy_eps = 0.0;
  double energy_exact = 0.0;
  double residual_sup = 0.0;
  double tolerance = 0.0;
  int iterations = 0;
  int newton_steps = 0;
  bool converged = false;
  /// Negative pivots of the Hessian at the solution (direct solves only).
  int morse_index = -1;
  double m1_estimate = std::numeric_limits<double>::quiet_NaN();
  double m2_estimate = std::numeric_limits<double>::quiet_NaN();
  double level = std::numeric_limits<double>::quiet_NaN();
};

struct MinimizeOptions {
  int max_iter = 20000;
  /// Residual tolerance; <= 0 means the functional's own tolerance.
  double tol = -1.0;
  bool newton = true;
};

/// Preconditioned nonlinear CG (Polak-Ribiere+, preconditioner A^{-1}) with
/// Armijo backtracking, finished by Newton steps when the Hessian is positive
/// definite. The energy never increases across accepted steps.
/// Throws Stagnation if no step can be accepted.
struct MinimizeResult {
  ScalarField u;
  SolveReport report;
};
MinimizeResult minimize_energy(const EnergyFunctional& e, const ScalarField& u_init, const MinimizeOptions& opt = {});

/// Minimizes along a decreasing eps schedule starting from u_init, returning
/// the minimizer at the last eps.
MinimizeResult minimize_with_schedule(DiscretizationPtr disc, ModelParams params,
                                      std::shared_ptr<const CutoffContext> ctx, const std::vector<double>& eps,
                                      const ScalarField& u_init, const MinimizeOptions& opt = {});

struct M1Estimate {
  double m1 = 0.0;
  ScalarField best;          // minimizer attaining m1
  double best_energy_eps = 0.0;
  std::vector<double> start_values;  // energy_exact per start
};

/// Upper estimate of inf E: multi-start minimization (0, t v0 for t in
/// {1/2, 1, 2}, random positive bumps) continued down `eps`, keeping the
/// smallest energy_exact (ties within 1e-10 go to the smaller norm).
M1Estimate estimate_m1(DiscretizationPtr disc, const ModelParams& params, std::shared_ptr<const CutoffContext> ctx,
                       const ScalarField& v0, const std::vector<double>& eps, int restarts = 8,
                       std::uint64_t seed = 1);

/// v0 with A0 = a0 + a1 sup(v0)^{p-1} iterated to a fixed point.
ScalarField barrier_for(const Discretization& disc, const ModelParams& params, const ScalarField& u_beta);

struct LambdaSweep {
  std::vector<double> lambdas;
  std::vector<double> m1;
  bool found = false;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
};

/// Scans `lambdas` (increasing) for the first value with m1 < -H(Omega), then
/// bisects the bracket to relative width `rel_width`.
LambdaSweep locate_lambda_star(DiscretizationPtr disc, const ModelParams& params,
                               std::shared_ptr<const CutoffContext> ctx, const ScalarField& u_beta,
                               const std::vector<double>& lambdas, const std::vector<double>& eps,
                               int restarts = 8, double rel_width = 0.02, std::uint64_t seed = 1);

/// Truncation of E_eps at the cap field.
EnergyFunctional build_truncated(const EnergyFunctional& e, const ScalarField& cap);

/// G-tilde at one node: integral over [0, s] of g_eps((min(t, cap) - 1)_+).
double truncated_G(const ModelParams& params, double s, double cap);

struct OrderingReport {
  std::size_t positivity_violations = 0;  // u1 <= 0 at interior nodes
  std::size_t order_violations = 0;       // u1 > u0 + tol
  std::size_t inclusion_violations = 0;   // {u1 > 1} not inside {u0 > 1}
  std::size_t complement_violations = 0;  // {u0 < 1} not inside {u1 < 1}
  bool distinct = false;
  double sup_difference = 0.0;
  double measure_u1_above = 0.0;  // H({u1 > 1})
  bool passed() const noexcept {
    return positivity_violations == 0 && order_violations == 0 && inclusion_violations == 0 &&
           complement_violations == 0;
  }
};
OrderingReport ordering_check(const ScalarField& u1, const ScalarField& u0, double tol = 1e-6);

/// max over smooth random directions v of |<E'(u), v>| / ||v||_A.
double critical_point_certificate(const EnergyFunctional& e, const ScalarField& u, int directions = 50,
                                  std::uint64_t seed = 3);

/// Random combination of `modes` low sine modes vanishing on the boundary.
Eigen::VectorXd smooth_random_direction(const Grid& grid, std::mt19937_64& rng, int modes);

/// Positive bump (1 - |x - c|^2 / rho^2)_+^2 on the grid, zero on the boundary.
Eigen::VectorXd bump_field(const Grid& grid, const Point& center, double radius);

}  // namespace cfbp
