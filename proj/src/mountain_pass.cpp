#include "carnot_fbp/mountain_pass.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "carnot_fbp/errors.hpp"

namespace cfbp {

namespace {

double a_norm(const Discretization& d, const Eigen::VectorXd& v) {
  return std::sqrt(std::max(d.op.quadratic_form(v), 0.0));
}

// Equal A-arclength on both sides of the highest point, which stays a node.
void reparametrize(const EnergyFunctional& e, std::vector<Eigen::VectorXd>& path, std::vector<double>& energy,
                   std::size_t top) {
  const Discretization& d = e.disc();
  const std::size_t P = path.size();
  std::vector<double> s(P, 0.0);
  for (std::size_t k = 1; k < P; ++k) s[k] = s[k - 1] + a_norm(d, path[k] - path[k - 1]);
  const double S = s.back();
  if (!(S > 0.0)) return;
  const double st = s[top];
  const auto kn = static_cast<std::size_t>(
      std::clamp<long>(std::lround(static_cast<double>(P - 1) * st / S), 1, static_cast<long>(P) - 2));

  std::vector<Eigen::VectorXd> out(P);
  std::vector<double> en(P, 0.0);
  out[0] = path[0];
  en[0] = energy[0];
  out[P - 1] = path[P - 1];
  en[P - 1] = energy[P - 1];
  out[kn] = path[top];
  en[kn] = energy[top];
  std::size_t seg = 0;
  for (std::size_t j = 1; j + 1 < P; ++j) {
    if (j == kn) continue;
    const double t = j < kn ? st * static_cast<double>(j) / static_cast<double>(kn)
                            : st + (S - st) * static_cast<double>(j - kn) / static_cast<double>(P - 1 - kn);
    while (seg + 2 < P && s[seg + 1] < t) ++seg;
    const double len = s[seg + 1] - s[seg];
    const double th = len > 0.0 ? std::clamp((t - s[seg]) / len, 0.0, 1.0) : 0.0;
    if (th == 0.0) {
      out[j] = path[seg];
      en[j] = energy[seg];
    } else if (th == 1.0) {
      out[j] = path[seg + 1];
      en[j] = energy[seg + 1];
    } else {
      out[j] = (1.0 - th) * path[seg] + th * path[seg + 1];
      en[j] = e.energy(out[j]);
    }
  }
  path.swap(out);
  energy.swap(en);
}

// Moves node k to the highest point of the two adjacent path segments
// (golden section on the piecewise-linear parameter t in [-1, 1]).
void climb(const EnergyFunctional& e, std::vector<Eigen::VectorXd>& path, std::vector<double>& energy,
           std::size_t k) {
  const Eigen::VectorXd base = path[k];
  const Eigen::VectorXd left = path[k] - path[k - 1];
  const Eigen::VectorXd right = path[k + 1] - path[k];
  auto at = [&](double t) -> Eigen::VectorXd { return t < 0.0 ? Eigen::VectorXd(base + t * left) : Eigen::VectorXd(base + t * right); };
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = -1.0, b = 1.0;
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = e.energy(at(c)), fd = e.energy(at(d));
  for (int i = 0; i < 16; ++i) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = e.energy(at(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = e.energy(at(d));
    }
  }
  const double t = fc > fd ? c : d;
  const double ft = std::max(fc, fd);
  if (ft > energy[k]) {
    path[k] = at(t);
    energy[k] = ft;
  }
}

std::size_t top_index(const std::vector<double>& energy) {
  std::size_t k = 1;
  for (std::size_t j = 2; j + 1 < energy.size(); ++j)
    if (energy[j] > energy[k]) k = j;
  return k;
}

}  // namespace

MinimizeResult newton_polish(const EnergyFunctional& e, const ScalarField& start, int max_steps) {
  const Discretization& disc = e.disc();
  const Grid& grid = *disc.grid;
  const double tol = e.tolerance();
  // Line-search merit: the dual norm g^T A^{-1} g, smoother than the sup norm.
  auto merit = [&](const Eigen::VectorXd& g) {
    const Eigen::VectorXd gd = disc.op.restrict_to_dofs(g);
    return gd.dot(disc.solve(gd));
  };
  Eigen::VectorXd x = start.values();
  Eigen::VectorXd g, g_new, x_new;
  double E = e.energy_and_gradient(x, g);
  double res = residual_sup(grid, g);
  double mer = merit(g);
  MinimizeResult out;
  int morse = -1;
  int step = 0;
  for (; step < max_steps && res > tol; ++step) {
    const SparseMatrix h = e.hessian(x);
    const Eigen::VectorXd gd = disc.op.restrict_to_dofs(g);
    const SymmetricSolveResult s = solve_symmetric(h, -gd, false, *disc.solver);
    morse = s.negative_pivots;
    if (!s.x.allFinite()) throw SolverError("newton_polish: linear solve failed");
    const Eigen::VectorXd p = disc.op.prolong(s.x);
    // The quadratic model is only trusted over a step of size eps.
    const double psup = p.cwiseAbs().maxCoeff();
    double alpha = psup > 0.0 ? std::min(1.0, e.params().epsilon / psup) : 1.0;
    bool accepted = false;
    for (int k = 0; k < 30; ++k, alpha *= 0.5) {
      x_new = x + alpha * p;
      const double E_new = e.energy_and_gradient(x_new, g_new);
      const double m_new = merit(g_new);
      if (std::isfinite(E_new) && m_new < (1.0 - 1e-4 * alpha) * mer) {
        x.swap(x_new);
        g.swap(g_new);
        E = E_new;
        mer = m_new;
        res = residual_sup(grid, g);
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      std::ostringstream msg;
      msg << "newton_polish: residual stuck at " << res << " (tol " << tol << ")";
      throw Stagnation(msg.str());
    }
  }
  if (disc.solver->direct()) {
    morse = solve_symmetric(e.hessian(x), Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.num_dofs())), false,
                            *disc.solver)
                .negative_pivots;
  }
  out.report.energy_eps = E;
  out.report.residual_sup = res;
  out.report.tolerance = tol;
  out.report.newton_steps = step;
  out.report.converged = res <= tol;
  out.report.morse_index = morse;
  out.report.energy_exact = energy_exact(disc, e.params(), x);
  out.u = ScalarField(disc.grid, std::move(x));
  return out;
}

MountainPassResult mountain_pass(const EnergyFunctional& e, const ScalarField& endpoint,
                                 const MountainPassOptions& opt, const std::vector<Eigen::VectorXd>* warm_path,
                                 const ScalarField* hint) {
  const Discretization& disc = e.disc();
  const Grid& grid = *disc.grid;
  const auto P = static_cast<std::size_t>(opt.path_points);
  if (P < 3) throw InvalidArgument("mountain_pass: need at least 3 path points");
  if (warm_path && warm_path->size() != P) throw InvalidArgument("mountain_pass: warm path has wrong length");

  const Eigen::VectorXd x_end = endpoint.values();
  const double E_end = e.energy(x_end);
  if (!(E_end < 0.0)) throw GeometryFailure("mountain_pass: endpoint energy is not negative");

  std::vector<Eigen::VectorXd> path(P);
  std::vector<double> energy(P);
  for (std::size_t k = 0; k < P; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(P - 1);
    path[k] = warm_path ? Eigen::VectorXd((*warm_path)[k] + t * (x_end - warm_path->back())) : Eigen::VectorXd(t * x_end);
    energy[k] = e.energy(path[k]);
  }
  path[0].setZero();
  energy[0] = e.energy(path[0]);
  reparametrize(e, path, energy, top_index(energy));

  MountainPassResult out;
  bool found = false;
  MinimizeResult fallback;
  bool have_fallback = false;
  // Newton from `start`. Index-1 saddles distinct from the endpoint are taken;
  // higher-index ones are kept as a fallback.
  auto accept = [&](const ScalarField& start, double ceiling) {
    MinimizeResult pol;
    try {
      pol = newton_polish(e, start);
    } catch (const SolverError&) {
      return false;
    }
    const double diff = (pol.u.values() - x_end).cwiseAbs().maxCoeff();
    const bool distinct = diff > 1e-4 * (1.0 + x_end.cwiseAbs().maxCoeff());
    if (!(pol.report.converged && distinct && pol.report.energy_eps > 0.0 && pol.report.morse_index != 0))
      return false;
    if (pol.report.morse_index > 1 || pol.report.energy_eps > ceiling + e.tolerance()) {
      if (!have_fallback || pol.report.energy_eps < fallback.report.energy_eps) {
        fallback = pol;
        have_fallback = true;
      }
      return false;
    }
    out.u1 = pol.u;
    out.report = pol.report;
    found = true;
    return true;
  };
  auto path_max = [&]() {
    climb(e, path, energy, top_index(energy));
    return energy[top_index(energy)];
  };
  auto finish = [&](int it) {
    if (!found) {
      if (!have_fallback) throw GeometryFailure("mountain_pass: no saddle point found");
      out.u1 = fallback.u;
      out.report = fallback.report;
    }
    out.report.level = out.report.energy_eps;
    out.report.iterations = it;
    out.path_iterations = it;
    out.path = std::move(path);
    out.path_energy = std::move(energy);
    return out;
  };
  if (hint) {
    const double ceiling = path_max();
    if (accept(*hint, ceiling)) return finish(0);
    // Follow the hinted saddle through geometric eps sub-steps.
    const double eps_to = e.params().epsilon;
    if (opt.hint_epsilon > 0.0 && opt.hint_epsilon != eps_to) {
      for (int sub = 4; sub <= 16; sub *= 2) {
        ScalarField u = *hint;
        bool ok = true;
        for (int j = 1; j < sub && ok; ++j) {
          ModelParams m = e.params();
          m.epsilon = opt.hint_epsilon * std::pow(eps_to / opt.hint_epsilon, static_cast<double>(j) / sub);
          EnergyFunctional ej(e.disc_ptr(), m, e.ctx_ptr(), x_end);
          try {
            u = newton_polish(ej, u).u;
          } catch (const SolverError&) {
            ok = false;
          }
        }
        if (ok && accept(u, ceiling)) return finish(0);
      }
    }
  }

  const double scale = e.params().scale();
  double sw = opt.newton_switch;
  double alpha = 1.0;
  int it = 0;
  double best_top = std::numeric_limits<double>::infinity();
  int best_it = 0;
  for (int attempt = 0; attempt < 3; ++attempt, sw *= 1e-2) {
    for (; it < opt.max_iter; ++it) {
      const std::size_t k = top_index(energy);
      if (!(energy[k] > std::max(energy[0], energy[P - 1])))
        throw GeometryFailure("mountain_pass: path has no interior maximum");
      climb(e, path, energy, k);
      // No progress of the path maximum for a while: let Newton try.
      if (energy[k] < best_top - 1e-9 * std::abs(best_top)) {
        best_top = energy[k];
        best_it = it;
      } else if (it - best_it > 50) {
        best_it = it;
        break;
      }
      Eigen::VectorXd g;
      e.energy_and_gradient(path[k], g);
      if (residual_sup(grid, g) <= sw * scale) break;
      const Eigen::VectorXd gd = disc.op.restrict_to_dofs(g);
      const Eigen::VectorXd tau = disc.op.restrict_to_dofs(path[k + 1] - path[k - 1]);
      const Eigen::VectorXd atau = disc.op.interior() * tau;
      const double tt = tau.dot(atau);
      Eigen::VectorXd d = disc.solve(gd);
      const double full = gd.dot(d);
      if (tt > 0.0) d -= (d.dot(atau) / tt) * tau;
      const double slope = gd.dot(d);
      const Eigen::VectorXd dn = disc.op.prolong(d);
      bool moved = false;
      // Gradient along the path only: nothing left to descend.
      if (slope > 1e-10 * full) {
        for (double a = std::min(1.0, 2.0 * alpha); a > 1e-14; a *= 0.5) {
          Eigen::VectorXd trial = path[k] - a * dn;
          const double Et = e.energy(trial);
          if (Et <= energy[k] - 1e-4 * a * slope) {
            path[k] = std::move(trial);
            energy[k] = Et;
            alpha = a;
            moved = true;
            break;
          }
        }
      }
      if (!moved) break;
      if (opt.reparam_every > 0 && (it + 1) % opt.reparam_every == 0) reparametrize(e, path, energy, top_index(energy));
    }

    const std::size_t k = top_index(energy);
    if (accept(ScalarField(disc.grid, path[k]), std::numeric_limits<double>::infinity())) break;
  }
  return finish(it);
}

RimEstimate rim_estimate(const EnergyFunctional& e, const ScalarField& u0, const ScalarField& u_beta,
                         const ScalarField* phi1, int directions, int ladder, std::uint64_t seed,
                         const std::vector<Eigen::VectorXd>* path, double r_max) {
  const Discretization& d = e.disc();
  std::vector<Eigen::VectorXd> dirs;
  auto add = [&](Eigen::VectorXd v) {
    const double n = a_norm(d, v);
    if (n > 0.0) dirs.push_back(v / n);
  };
  std::mt19937_64 rng(seed);
  for (int k = 0; k < directions; ++k) add(smooth_random_direction(*d.grid, rng, 1 + k % 4));
  add(u0.values());
  add(u_beta.values());
  if (phi1) add(phi1->values());

  // first point where the path leaves the ball of radius r
  auto path_point = [&](double r, Eigen::VectorXd& x) {
    if (!path) return false;
    for (std::size_t k = 0; k + 1 < path->size(); ++k) {
      const Eigen::VectorXd& a = (*path)[k];
      const Eigen::VectorXd b = (*path)[k + 1] - a;
      const double aa = d.op.quadratic_form(a), bb = d.op.quadratic_form(b);
      const double ab = 0.5 * (d.op.quadratic_form(a + b) - aa - bb);
      if (aa > r * r || d.op.quadratic_form(a + b) < r * r || !(bb > 0.0)) continue;
      const double t = (-ab + std::sqrt(std::max(ab * ab - bb * (aa - r * r), 0.0))) / bb;
      x = a + std::clamp(t, 0.0, 1.0) * b;
      return true;
    }
    return false;
  };
  auto min_at = [&](double r) {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& v : dirs) m = std::min(m, e.energy(r * v));
    Eigen::VectorXd x;
    if (path_point(r, x)) m = std::min(m, e.energy(x));
    return m;
  };

  RimEstimate out;
  const double n0 = a_norm(d, u0.values());
  const double nb = a_norm(d, u_beta.values());
  const double r_hi = r_max > 0.0 ? std::min(0.5 * n0, r_max) : 0.5 * n0;
  const double r_lo = std::min(2.5 * nb, r_hi);
  const int count = r_lo < r_hi ? std::max(ladder, 2) : 1;
  out.m2 = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < count; ++i) {
    const double r = count == 1 ? r_hi : r_lo * std::pow(r_hi / r_lo, static_cast<double>(i) / (count - 1));
    const double m = min_at(r);
    out.radii.push_back(r);
    out.minima.push_back(m);
    if (m > out.m2) {
      out.m2 = m;
      out.radius = r;
    }
  }
  out.default_radius = std::min(0.5 * n0, 0.1);
  out.m2_at_default = min_at(out.default_radius);
  return out;
}

}  // namespace cfbp
