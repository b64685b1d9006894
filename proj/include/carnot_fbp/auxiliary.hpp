#pragma once

#include <limits>
#include <memory>

#include "carnot_fbp/linear_solver.hpp"
#include "carnot_fbp/model.hpp"

namespace cfbp {

struct Eigenpair {
  double lambda1 = 0.0;
  ScalarField phi1;  // positive, sup-norm 1
  int iterations = 0;
  /// ||A phi - lambda W phi||_2 / ||lambda W phi||_2
  double residual = 0.0;
};

/// Smallest eigenpair of A phi = lambda W phi by inverse power iteration.
/// Throws IterationLimit if the residual does not drop below rel_tol.
Eigenpair principal_eigenpair(const Discretization& disc, double rel_tol = 1e-8, int max_iter = 2000);

struct SingularSolution {
  ScalarField u_beta;
  /// Fixed-point residual ||u - A^{-1} W beta u^{-delta}||_inf / ||u||_inf.
  double residual_norm = 0.0;
  double beta = 0.0;
  double delta = 0.0;
  int iterations = 0;
};

/// Solves A u = W beta u^{-delta} by the floored fixed-point iteration
/// u <- A^{-1} W beta max(u, floor_k)^{-delta}, floor_k = 1e-2 2^{-k} >= 1e-12.
/// Throws PositivityViolation if an iterate loses positivity.
SingularSolution solve_singular(const Discretization& disc, double beta, double delta, double step_tol = 1e-9,
                                int max_iter = 1000);

std::shared_ptr<const CutoffContext> make_cutoff(const SingularSolution& s);

/// Largest beta in (0, beta_cap] for which some t of the log grid satisfies
/// beta t^{-delta} + lambda g((t-1)_+) <= lambda1 t; +infinity if beta_cap
/// itself is admissible.
double beta_star_estimate(const ModelParams& params, const Eigenpair& eig, double t_lo = 1e-6, double t_hi = 1e6,
                          int t_count = 2000, double beta_cap = 1e6);
double beta_star_estimate(const ModelParams& params, double lambda1, double t_lo = 1e-6, double t_hi = 1e6,
                          int t_count = 2000, double beta_cap = 1e6);
bool beta_admissible(const ModelParams& params, double lambda1, double beta, double t_lo, double t_hi, int t_count);

/// A0 = a0 + a1 sup^{p-1}.
double growth_bound(const ModelParams& params, double sup);

/// Solves A v0 = W (lambda A0 + beta u_beta^{-delta}).
ScalarField barrier_v0(const Discretization& disc, const ModelParams& params, const ScalarField& u_beta, double A0);

/// Smallest distance from a node with v0 >= 1 to the box boundary
/// (+infinity if there is none).
double barrier_distance(const ScalarField& v0);

}  // namespace cfbp
