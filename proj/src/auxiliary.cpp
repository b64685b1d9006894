#include "carnot_fbp/auxiliary.hpp"

#include <algorithm>
#include <cmath>

#include "carnot_fbp/errors.hpp"

namespace cfbp {

namespace {

Eigen::VectorXd dof_weights(const Grid& g) {
  Eigen::VectorXd w(static_cast<Eigen::Index>(g.num_dofs()));
  for (std::size_t k = 0; k < g.num_dofs(); ++k) w[static_cast<Eigen::Index>(k)] = g.weight(g.node_of_dof(k));
  return w;
}

}  // namespace

Eigenpair principal_eigenpair(const Discretization& disc, double rel_tol, int max_iter) {
  const Grid& g = *disc.grid;
  const SparseMatrix& a = disc.op.interior();
  const Eigen::VectorXd w = dof_weights(g);
  Eigen::VectorXd x = Eigen::VectorXd::Ones(w.size());
  Eigenpair out;
  double lam = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    x = disc.solve(w.cwiseProduct(x));
    x /= x.cwiseAbs().maxCoeff();
    const Eigen::VectorXd ax = a * x;
    const Eigen::VectorXd wx = w.cwiseProduct(x);
    lam = x.dot(ax) / x.dot(wx);
    const double res = (ax - lam * wx).norm() / (lam * wx.norm());
    out.iterations = it;
    out.residual = res;
    if (res <= rel_tol) break;
    if (it == max_iter) throw IterationLimit("principal_eigenpair: no convergence, residual " + std::to_string(res));
  }
  if (x.sum() < 0.0) x = -x;
  out.lambda1 = lam;
  out.phi1 = ScalarField(disc.grid, disc.op.prolong(x));
  return out;
}

SingularSolution solve_singular(const Discretization& disc, double beta, double delta, double step_tol,
                                int max_iter) {
  if (!(beta > 0.0)) throw InvalidArgument("solve_singular: beta must be > 0");
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("solve_singular: need 0<delta<1");
  const Grid& g = *disc.grid;
  const Eigen::VectorXd w = dof_weights(g);
  auto rhs = [&](const Eigen::VectorXd& u, double floor) {
    Eigen::VectorXd r(u.size());
    for (Eigen::Index i = 0; i < u.size(); ++i) r[i] = w[i] * beta * std::pow(std::max(u[i], floor), -delta);
    return r;
  };
  auto check_positive = [&](const Eigen::VectorXd& u) {
    for (Eigen::Index i = 0; i < u.size(); ++i)
      if (!(u[i] > 0.0))
        throw PositivityViolation("solve_singular: iterate lost positivity", g.node_of_dof(static_cast<std::size_t>(i)),
                                  u[i]);
  };

  Eigen::VectorXd u = disc.solve(rhs(Eigen::VectorXd::Zero(w.size()), 1e-2));
  check_positive(u);
  SingularSolution out;
  out.beta = beta;
  out.delta = delta;
  double floor = 1e-2;
  for (int k = 1; k <= max_iter; ++k) {
    floor = std::max(0.5 * floor, 1e-12);
    Eigen::VectorXd next = disc.solve(rhs(u, floor));
    check_positive(next);
    const double step = (next - u).cwiseAbs().maxCoeff();
    u = std::move(next);
    out.iterations = k;
    const bool floor_inactive = u.minCoeff() > floor;
    if (step <= step_tol && floor_inactive) break;
    if (k == max_iter) throw IterationLimit("solve_singular: no convergence, last step " + std::to_string(step));
  }
  const Eigen::VectorXd tu = disc.solve(rhs(u, 0.0));
  out.residual_norm = (tu - u).cwiseAbs().maxCoeff() / u.cwiseAbs().maxCoeff();
  out.u_beta = ScalarField(disc.grid, disc.op.prolong(u));
  return out;
}

std::shared_ptr<const CutoffContext> make_cutoff(const SingularSolution& s) {
  auto ctx = std::make_shared<CutoffContext>();
  ctx->grid = s.u_beta.grid_ptr();
  ctx->u_beta = s.u_beta.values();
  ctx->delta = s.delta;
  return ctx;
}

bool beta_admissible(const ModelParams& params, double lambda1, double beta, double t_lo, double t_hi, int t_count) {
  const double r = std::log(t_hi / t_lo) / (t_count - 1);
  for (int i = 0; i < t_count; ++i) {
    const double t = t_lo * std::exp(r * i);
    const double lhs = beta * std::pow(t, -params.delta) + params.lambda * g_eval(params, std::max(t - 1.0, 0.0));
    if (lhs <= lambda1 * t) return true;
  }
  return false;
}

double beta_star_estimate(const ModelParams& params, double lambda1, double t_lo, double t_hi, int t_count,
                          double beta_cap) {
  if (!(lambda1 > 0.0)) throw InvalidArgument("beta_star_estimate: lambda1 must be > 0");
  if (!(t_lo > 0.0 && t_hi > t_lo && t_count >= 2)) throw InvalidArgument("beta_star_estimate: bad t grid");
  if (beta_admissible(params, lambda1, beta_cap, t_lo, t_hi, t_count)) return std::numeric_limits<double>::infinity();
  if (!beta_admissible(params, lambda1, 0.0, t_lo, t_hi, t_count)) return 0.0;
  double lo = 0.0, hi = beta_cap;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (beta_admissible(params, lambda1, mid, t_lo, t_hi, t_count) ? lo : hi) = mid;
  }
  return lo;
}

double beta_star_estimate(const ModelParams& params, const Eigenpair& eig, double t_lo, double t_hi, int t_count,
                          double beta_cap) {
  return beta_star_estimate(params, eig.lambda1, t_lo, t_hi, t_count, beta_cap);
}

double growth_bound(const ModelParams& params, double sup) {
  return params.a0 + params.a1 * std::pow(std::max(sup, 0.0), params.p - 1.0);
}

ScalarField barrier_v0(const Discretization& disc, const ModelParams& params, const ScalarField& u_beta, double A0) {
  const Grid& g = *disc.grid;
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(g.num_dofs()));
  for (std::size_t k = 0; k < g.num_dofs(); ++k) {
    const std::size_t n = g.node_of_dof(k);
    double s = params.lambda * A0;
    if (params.beta > 0.0) s += params.beta * std::pow(u_beta[n], -params.delta);
    rhs[static_cast<Eigen::Index>(k)] = g.weight(n) * s;
  }
  return ScalarField(disc.grid, disc.op.prolong(disc.solve(rhs)));
}

double barrier_distance(const ScalarField& v0) {
  double d = std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < v0.size(); ++n)
    if (v0[n] >= 1.0) d = std::min(d, v0.grid().distance_to_boundary(n));
  return d;
}

}  // namespace cfbp
