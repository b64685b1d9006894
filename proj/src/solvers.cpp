#include "carnot_fbp/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "carnot_fbp/auxiliary.hpp"
#include "carnot_fbp/errors.hpp"

namespace cfbp {

namespace {

void zero_boundary(const Grid& g, Eigen::VectorXd& x) {
  for (std::size_t n = 0; n < g.num_nodes(); ++n)
    if (!g.is_interior(n)) x[static_cast<Eigen::Index>(n)] = 0.0;
}

// Armijo backtracking along d (nodal). When the predicted decrease is below
// energy roundoff a step that lowers the residual is taken instead.
// Returns the accepted step or 0.
double armijo(const EnergyFunctional& e, const Eigen::VectorXd& x, double E, double res, double slope,
              const Eigen::VectorXd& d, double alpha0, Eigen::VectorXd& x_new, double& E_new) {
  constexpr double c1 = 1e-4;
  const double floor = 1e-12 * std::max(1.0, std::abs(E));
  double alpha = alpha0;
  while (alpha > 1e-16) {
    x_new = x + alpha * d;
    E_new = e.energy(x_new);
    if (std::isfinite(E_new)) {
      if (E_new <= E + c1 * alpha * slope) return alpha;
      if (-alpha * slope <= floor && std::abs(E_new - E) <= floor &&
          residual_sup(*e.disc().grid, e.gradient(x_new)) < res)
        return alpha;
    }
    alpha *= 0.5;
  }
  return 0.0;
}

}  // namespace

MinimizeResult minimize_energy(const EnergyFunctional& e, const ScalarField& u_init, const MinimizeOptions& opt) {
  const Discretization& disc = e.disc();
  const Grid& grid = *disc.grid;
  const double tol = opt.tol > 0.0 ? opt.tol : e.tolerance();
  if (u_init.size() != grid.num_nodes()) throw InvalidArgument("minimize_energy: initial field does not match grid");

  Eigen::VectorXd x = u_init.values();
  zero_boundary(grid, x);
  Eigen::VectorXd g;
  double E = e.energy_and_gradient(x, g);
  double res = residual_sup(grid, g);

  MinimizeResult out;
  SolveReport& rep = out.report;
  rep.tolerance = tol;

  Eigen::VectorXd d_prev, z_prev, gd_prev;
  double alpha_prev = 1.0;
  int newton_cooldown = 0;
  bool restart = true;
  Eigen::VectorXd x_new, g_new;
  double E_new = 0.0;

  for (int it = 0; it < opt.max_iter && res > tol; ++it) {
    rep.iterations = it + 1;
    const Eigen::VectorXd gd = disc.op.restrict_to_dofs(g);

    // Newton step when the Hessian is usable.
    if (opt.newton && newton_cooldown == 0 && (disc.solver->direct() || res <= 1e-2 * e.params().scale())) {
      const SparseMatrix h = e.hessian(x);
      const SymmetricSolveResult s = solve_symmetric(h, -gd, true, *disc.solver);
      bool accepted = false;
      if (s.ok && s.negative_pivots <= 0) {
        const Eigen::VectorXd p = disc.op.prolong(s.x);
        const double slope = gd.dot(s.x);
        if (slope < 0.0) {
          double alpha = 1.0;
          for (int k = 0; k < 40 && !accepted; ++k, alpha *= 0.5) {
            x_new = x + alpha * p;
            E_new = e.energy_and_gradient(x_new, g_new);
            if (!std::isfinite(E_new)) continue;
            const double r_new = residual_sup(grid, g_new);
            const bool armijo_ok = E_new <= E + 1e-4 * alpha * slope;
            // Below energy roundoff only the residual can judge the step.
            const bool roundoff_ok =
                std::abs(E_new - E) <= 1e-12 * std::max(1.0, std::abs(E)) && r_new < res;
            if (armijo_ok || roundoff_ok) {
              accepted = true;
              x.swap(x_new);
              g.swap(g_new);
              E = E_new;
              res = r_new;
              ++rep.newton_steps;
            }
          }
        }
      }
      if (accepted) {
        restart = true;
        continue;
      }
      newton_cooldown = 20;
    }
    if (newton_cooldown > 0) --newton_cooldown;

    // Preconditioned nonlinear CG step.
    const Eigen::VectorXd z = disc.solve(gd);
    Eigen::VectorXd d = -z;
    if (!restart) {
      const double num = z.dot(gd - gd_prev);
      const double den = z_prev.dot(gd_prev);
      const double b = den > 0.0 ? std::max(0.0, num / den) : 0.0;
      d += b * d_prev;
      if (d.dot(gd) >= 0.0) d = -z;
    }
    double slope = d.dot(gd);
    Eigen::VectorXd dn = disc.op.prolong(d);
    double alpha = armijo(e, x, E, res, slope, dn, std::min(1.0, 2.0 * alpha_prev), x_new, E_new);
    if (alpha == 0.0 && !restart) {
      d = -z;
      slope = d.dot(gd);
      dn = disc.op.prolong(d);
      alpha = armijo(e, x, E, res, slope, dn, 1.0, x_new, E_new);
    }
    if (alpha == 0.0) {
      std::ostringstream msg;
      msg << "minimize_energy: no descent step at iteration " << it << ", residual " << res << " (tol " << tol
          << "), slope " << slope << " at energy " << E;
      throw Stagnation(msg.str());
    }
    alpha_prev = alpha;
    x.swap(x_new);
    E = e.energy_and_gradient(x, g);
    res = residual_sup(grid, g);
    d_prev = d;
    z_prev = z;
    gd_prev = gd;
    restart = false;
  }

  rep.energy_eps = E;
  rep.residual_sup = res;
  rep.converged = res <= tol;
  rep.energy_exact = energy_exact(disc, e.params(), x);
  if (disc.solver->direct()) {
    const SymmetricSolveResult s =
        solve_symmetric(e.hessian(x), Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.num_dofs())), false,
                        *disc.solver);
    rep.morse_index = s.negative_pivots;
  }
  out.u = ScalarField(disc.grid, std::move(x));
  if (!rep.converged) {
    std::ostringstream msg;
    msg << "minimize_energy: " << rep.iterations << " iterations, residual " << res << " > tol " << tol;
    throw IterationLimit(msg.str());
  }
  return out;
}

MinimizeResult minimize_with_schedule(DiscretizationPtr disc, ModelParams params,
                                      std::shared_ptr<const CutoffContext> ctx, const std::vector<double>& eps,
                                      const ScalarField& u_init, const MinimizeOptions& opt) {
  if (eps.empty()) throw InvalidArgument("minimize_with_schedule: empty eps schedule");
  MinimizeResult r{u_init, {}};
  for (double ep : eps) {
    params.epsilon = ep;
    EnergyFunctional e(disc, params, ctx);
    r = minimize_energy(e, r.u, opt);
  }
  return r;
}

Eigen::VectorXd bump_field(const Grid& grid, const Point& center, double radius) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(grid.num_nodes()));
  double x[3];
  for (std::size_t n = 0; n < grid.num_nodes(); ++n) {
    grid.coords(n, x);
    double r2 = 0.0;
    for (int a = 0; a < grid.dim(); ++a) r2 += (x[a] - center[static_cast<std::size_t>(a)]) * (x[a] - center[static_cast<std::size_t>(a)]);
    const double t = std::max(0.0, 1.0 - r2 / (radius * radius));
    v[static_cast<Eigen::Index>(n)] = grid.is_interior(n) ? t * t : 0.0;
  }
  return v;
}

ScalarField barrier_for(const Discretization& disc, const ModelParams& params, const ScalarField& u_beta) {
  double A0 = growth_bound(params, 0.0);
  ScalarField v0 = barrier_v0(disc, params, u_beta, A0);
  for (int it = 0; it < 100; ++it) {
    const double next = std::max(A0, growth_bound(params, v0.values().maxCoeff()));
    if (std::abs(next - A0) <= 1e-10 * next) break;
    A0 = next;
    v0 = barrier_v0(disc, params, u_beta, A0);
  }
  return v0;
}

M1Estimate estimate_m1(DiscretizationPtr disc, const ModelParams& params, std::shared_ptr<const CutoffContext> ctx,
                       const ScalarField& v0, const std::vector<double>& eps, int restarts, std::uint64_t seed) {
  const Grid& grid = *disc->grid;
  std::vector<Eigen::VectorXd> starts;
  starts.push_back(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.num_nodes())));
  for (double t : {0.5, 1.0, 2.0}) starts.push_back(t * v0.values());
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double extent = std::numeric_limits<double>::infinity();
  for (int a = 0; a < grid.dim(); ++a) extent = std::min(extent, grid.hi()[static_cast<std::size_t>(a)] - grid.lo()[static_cast<std::size_t>(a)]);
  const double amp_hi = std::max(2.0, 2.0 * v0.values().maxCoeff());
  for (int k = static_cast<int>(starts.size()); k < restarts; ++k) {
    Point c(static_cast<std::size_t>(grid.dim()));
    for (int a = 0; a < grid.dim(); ++a) {
      const double lo = grid.lo()[static_cast<std::size_t>(a)], hi = grid.hi()[static_cast<std::size_t>(a)];
      c[static_cast<std::size_t>(a)] = lo + (0.2 + 0.6 * unit(rng)) * (hi - lo);
    }
    const double rho = (0.15 + 0.25 * unit(rng)) * extent;
    const double amp = 1.0 + (amp_hi - 1.0) * unit(rng);
    starts.push_back(amp * bump_field(grid, c, rho));
  }

  M1Estimate out;
  out.m1 = std::numeric_limits<double>::infinity();
  double best_norm = 0.0;
  for (const auto& s : starts) {
    const MinimizeResult r = minimize_with_schedule(disc, params, ctx, eps, ScalarField(disc->grid, s));
    const double val = r.report.energy_exact;
    out.start_values.push_back(val);
    const double nrm = r.u.values().norm();
    if (val < out.m1 - 1e-10 || (std::abs(val - out.m1) <= 1e-10 && nrm < best_norm)) {
      out.m1 = val;
      out.best = r.u;
      out.best_energy_eps = r.report.energy_eps;
      best_norm = nrm;
    }
  }
  return out;
}

LambdaSweep locate_lambda_star(DiscretizationPtr disc, const ModelParams& params,
                               std::shared_ptr<const CutoffContext> ctx, const ScalarField& u_beta,
                               const std::vector<double>& lambdas, const std::vector<double>& eps, int restarts,
                               double rel_width, std::uint64_t seed) {
  const double vol = disc->grid->volume();
  auto m1_at = [&](double lam) {
    ModelParams m = params;
    m.lambda = lam;
    const ScalarField v0 = barrier_for(*disc, m, u_beta);
    return estimate_m1(disc, m, ctx, v0, eps, restarts, seed).m1;
  };
  LambdaSweep out;
  double prev = 0.0;
  for (double lam : lambdas) {
    const double m1 = m1_at(lam);
    out.lambdas.push_back(lam);
    out.m1.push_back(m1);
    if (m1 < -vol) {
      out.found = true;
      out.bracket_lo = prev;
      out.bracket_hi = lam;
      break;
    }
    prev = lam;
  }
  if (!out.found) return out;
  while (out.bracket_hi - out.bracket_lo > rel_width * out.bracket_hi) {
    const double mid = 0.5 * (out.bracket_lo + out.bracket_hi);
    const double m1 = m1_at(mid);
    out.lambdas.push_back(mid);
    out.m1.push_back(m1);
    (m1 < -vol ? out.bracket_hi : out.bracket_lo) = mid;
  }
  return out;
}

EnergyFunctional build_truncated(const EnergyFunctional& e, const ScalarField& cap) {
  EnergyFunctional t(e.disc_ptr(), e.params(), e.ctx_ptr(), cap.values());
  t.set_tolerance(e.tolerance());
  return t;
}

double truncated_G(const ModelParams& params, double s, double cap) {
  if (s <= cap) return G_eps(params, std::max(s - 1.0, 0.0));
  const double c = std::max(cap - 1.0, 0.0);
  return G_eps(params, c) + g_eps(params, c) * (s - cap);
}

OrderingReport ordering_check(const ScalarField& u1, const ScalarField& u0, double tol) {
  const Grid& g = u1.grid();
  if (u0.size() != u1.size()) throw InvalidArgument("ordering_check: fields on different grids");
  OrderingReport r;
  std::vector<unsigned char> above(g.num_nodes(), 0);
  for (std::size_t n = 0; n < g.num_nodes(); ++n) {
    r.sup_difference = std::max(r.sup_difference, std::abs(u0[n] - u1[n]));
    if (!g.is_interior(n)) continue;
    if (!(u1[n] > 0.0)) ++r.positivity_violations;
    if (u1[n] > u0[n] + tol) ++r.order_violations;
    if (u1[n] > 1.0 && !(u0[n] > 1.0)) ++r.inclusion_violations;
    if (u0[n] < 1.0 && !(u1[n] < 1.0)) ++r.complement_violations;
    above[n] = u1[n] > 1.0;
  }
  r.measure_u1_above = haar_measure_of(g, above);
  r.distinct = r.sup_difference > 1e-4 * (1.0 + u0.values().cwiseAbs().maxCoeff());
  return r;
}

Eigen::VectorXd smooth_random_direction(const Grid& grid, std::mt19937_64& rng, int modes) {
  std::uniform_int_distribution<int> freq(1, 4);
  std::normal_distribution<double> coef(0.0, 1.0);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.num_nodes()));
  double x[3];
  for (int m = 0; m < modes; ++m) {
    int k[3] = {1, 1, 1};
    for (int a = 0; a < grid.dim(); ++a) k[a] = freq(rng);
    const double c = coef(rng);
    for (std::size_t n = 0; n < grid.num_nodes(); ++n) {
      if (!grid.is_interior(n)) continue;
      grid.coords(n, x);
      double s = c;
      for (int a = 0; a < grid.dim(); ++a) {
        const double lo = grid.lo()[static_cast<std::size_t>(a)], hi = grid.hi()[static_cast<std::size_t>(a)];
        s *= std::sin(k[a] * M_PI * (x[a] - lo) / (hi - lo));
      }
      v[static_cast<Eigen::Index>(n)] += s;
    }
  }
  return v;
}

double critical_point_certificate(const EnergyFunctional& e, const ScalarField& u, int directions,
                                  std::uint64_t seed) {
  const Eigen::VectorXd r = e.gradient(u.values());
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int k = 0; k < directions; ++k) {
    const Eigen::VectorXd v = smooth_random_direction(u.grid(), rng, 3);
    const double nrm = std::sqrt(std::max(e.disc().op.quadratic_form(v), 1e-300));
    worst = std::max(worst, std::abs(r.dot(v)) / nrm);
  }
  return worst;
}

}  // namespace cfbp
