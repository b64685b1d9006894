#include "carnot_fbp/continuation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <random>

#include "carnot_fbp/errors.hpp"

namespace cfbp {

ContinuationSchedule ContinuationSchedule::geometric(double eps0, int J) {
  if (!(eps0 > 0.0) || J < 0) throw InvalidArgument("schedule: need eps0 > 0 and J >= 0");
  ContinuationSchedule s;
  for (int j = 0; j <= J; ++j) s.eps.push_back(eps0 * std::ldexp(1.0, -j));
  return s;
}

void ContinuationSchedule::validate() const {
  if (eps.empty()) throw InvalidArgument("schedule: empty eps list");
  for (std::size_t j = 0; j < eps.size(); ++j) {
    if (!(eps[j] > 0.0) || !std::isfinite(eps[j])) throw InvalidArgument("schedule: eps must be positive");
    if (j > 0 && !(eps[j] < eps[j - 1])) throw InvalidArgument("schedule: eps must be strictly decreasing");
  }
}

std::vector<std::string> stage_table_columns() {
  return {"eps",      "E_eps_u0", "E_u0",   "E_eps_u1",  "E_u1",         "res_u0",       "res_u1",
          "lip_u0",   "lip_u1",   "sup_delta_u0", "sup_delta_u1", "fb_cells", "jump_mean", "jump_max",
          "level",    "m2",       "morse_u1", "tol_u0", "tol_u1", "E_eps_warm"};
}

std::vector<double> stage_table_row(const StageReport& s) {
  return {s.eps,    s.E_eps_u0,     s.E_u0,         s.E_eps_u1, s.E_u1,      s.res_u0,   s.res_u1,
          s.lip_u0, s.lip_u1,       s.sup_delta_u0, s.sup_delta_u1, static_cast<double>(s.fb_cells),
          s.jump_mean, s.jump_max,  s.level,        s.m2,       static_cast<double>(s.morse_u1),
          s.tol_u0, s.tol_u1,       s.E_eps_warm};
}

namespace {

[[noreturn]] void rethrow_with_stage(int stage, double eps) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "stage %d (eps=%.6g): ", stage, eps);
  const std::string pre(buf);
  try {
    throw;
  } catch (const PositivityViolation& e) {
    throw PositivityViolation(pre + e.what(), e.node(), e.value());
  } catch (const IterationLimit& e) {
    throw IterationLimit(pre + e.what());
  } catch (const Stagnation& e) {
    throw Stagnation(pre + e.what());
  } catch (const GeometryFailure& e) {
    throw GeometryFailure(pre + e.what());
  } catch (const NoSolution& e) {
    throw NoSolution(pre + e.what());
  } catch (const SolverError& e) {
    throw SolverError(pre + e.what());
  }
}

double sup_diff(const ScalarField& a, const ScalarField& b) { return (a.values() - b.values()).cwiseAbs().maxCoeff(); }

}  // namespace

ContinuationResult run_continuation(DiscretizationPtr disc, const ModelParams& params,
                                    const SingularSolution& singular, const ContinuationSchedule& schedule,
                                    const ContinuationOptions& opt) {
  schedule.validate();
  params.validate();
  const auto ctx = make_cutoff(singular);
  ContinuationResult out;
  out.v0 = barrier_for(*disc, params, singular.u_beta);

  std::vector<Eigen::VectorXd> path;
  for (std::size_t j = 0; j < schedule.eps.size(); ++j) {
    const auto t0 = std::chrono::steady_clock::now();
    StageReport s;
    s.stage = static_cast<int>(j);
    s.eps = schedule.eps[j];
    ModelParams m = params;
    m.epsilon = s.eps;
    try {
      EnergyFunctional e(disc, m, ctx);
      MinimizeResult r;
      if (j == 0) {
        // Several starts; the lowest E_eps wins.
        bool have = false;
        for (double t : {0.0, 0.5, 1.0, 2.0}) {
          ScalarField start(out.v0.grid_ptr(), t * out.v0.values());
          MinimizeResult c = minimize_energy(e, start, opt.minimize);
          if (!have || c.report.energy_eps < r.report.energy_eps - 1e-10) {
            r = std::move(c);
            have = true;
          }
        }
      } else {
        s.E_eps_warm = e.energy(out.u0.values());
        r = minimize_energy(e, out.u0, opt.minimize);
        s.sup_delta_u0 = sup_diff(r.u, out.u0);
      }
      out.u0 = r.u;
      out.report_u0 = r.report;
      s.E_eps_u0 = r.report.energy_eps;
      s.E_u0 = r.report.energy_exact;
      s.res_u0 = r.report.residual_sup;
      s.tol_u0 = r.report.tolerance;
      s.iterations_u0 = r.report.iterations;
      s.newton_u0 = r.report.newton_steps;
      s.lip_u0 = lipschitz_estimate(disc->group, out.u0);
      s.norm_sq_u0 = disc->op.quadratic_form(out.u0.values());

      const FreeBoundary fb = extract_free_boundary(disc->group, out.u0, s.eps);
      s.fb_cells = static_cast<int>(fb.size());
      if (!fb.empty()) {
        const JumpStats js = jump_check(fb);
        s.jump_mean = js.mean;
        s.jump_max = js.max;
      }

      if (opt.mountain_pass) {
        const EnergyFunctional te = build_truncated(e, out.u0);
        MountainPassOptions mo = opt.mountain;
        const bool warm = j > 0 && out.u1.size() == out.u0.size();
        if (warm) mo.hint_epsilon = schedule.eps[j - 1];
        MountainPassResult mp =
            mountain_pass(te, out.u0, mo, path.empty() ? nullptr : &path, warm ? &out.u1 : nullptr);
        if (warm) s.sup_delta_u1 = sup_diff(mp.u1, out.u1);
        out.u1 = mp.u1;
        out.report_u1 = mp.report;
        path = mp.path;
        s.E_eps_u1 = mp.report.energy_eps;
        s.E_u1 = mp.report.energy_exact;
        s.res_u1 = mp.report.residual_sup;
        s.tol_u1 = mp.report.tolerance;
        s.level = mp.report.level;
        s.morse_u1 = mp.report.morse_index;
        s.path_iterations = mp.path_iterations;
        s.newton_u1 = mp.report.newton_steps;
        s.lip_u1 = lipschitz_estimate(disc->group, out.u1);
        if (opt.rim) {
          const std::vector<Eigen::VectorXd> through{Eigen::VectorXd::Zero(out.u1.values().size()), out.u1.values(),
                                                     out.u0.values()};
          // radii up to half the saddle norm: strictly inside the ray's climb
          const double r_max = 0.5 * std::sqrt(disc->op.quadratic_form(out.u1.values()));
          const RimEstimate rim =
              rim_estimate(te, out.u0, singular.u_beta, nullptr, opt.rim_directions, 12, opt.seed, &through, r_max);
          s.m2 = rim.m2;
          out.report_u1.m2_estimate = rim.m2;
        }
        out.last_mountain = std::move(mp);
      }
    } catch (const SolverError&) {
      rethrow_with_stage(static_cast<int>(j), s.eps);
    }
    s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (opt.log) {
      char buf[320];
      std::snprintf(buf, sizeof buf,
                    "stage %d eps=%.6g E_eps(u0)=%.8g E(u0)=%.8g res0=%.2e level=%.8g E(u1)=%.8g res1=%.2e "
                    "morse=%d fb=%d jump=%.4g m2=%.4g t=%.2fs",
                    s.stage, s.eps, s.E_eps_u0, s.E_u0, s.res_u0, s.level, s.E_u1, s.res_u1, s.morse_u1, s.fb_cells,
                    s.jump_mean, s.m2, s.seconds);
      opt.log(buf);
    }
    out.stages.push_back(s);
  }
  return out;
}

FreeBoundary extract_free_boundary(const GroupModel& group, const ScalarField& u, double layer_eps) {
  const Grid& grid = u.grid();
  const int d = grid.dim();
  const HorizontalField hg = horizontal_gradient(group, u);
  auto gsq = [&](std::size_t n) { return hg.values.row(static_cast<Eigen::Index>(n)).squaredNorm(); };
  auto above = [&](std::size_t n) { return u[n] > 1.0; };

  FreeBoundary fb;
  for (std::size_t a = 0; a < grid.num_nodes(); ++a) {
    const auto idx = grid.multi_index(a);
    for (int k = 0; k < d; ++k) {
      if (idx[k] + 1 >= grid.nodes(k)) continue;
      const std::size_t s = grid.stride(k);
      const std::size_t b = a + s;
      if (above(a) == above(b)) continue;
      const bool up = above(b);  // plus side lies in +axis direction
      const std::size_t mn = up ? a : b, pl = up ? b : a;
      const int i_mn = up ? idx[k] : idx[k] + 1;
      const int i_pl = up ? idx[k] + 1 : idx[k];
      const int dir = up ? 1 : -1;
      // two nodes beyond each edge end, same side
      auto ok = [&](int i) { return i >= 0 && i < grid.nodes(k); };
      if (!ok(i_mn - 2 * dir) || !ok(i_pl + 2 * dir)) continue;
      const auto step = [&](std::size_t n, int times) {
        return times >= 0 ? n + static_cast<std::size_t>(times) * s : n - static_cast<std::size_t>(-times) * s;
      };
      const std::size_t m1 = step(mn, -dir), m2 = step(mn, -2 * dir);
      const std::size_t p1 = step(pl, dir), p2 = step(pl, 2 * dir);
      if (above(m1) || above(m2) || !above(p1) || !above(p2)) continue;

      const double h = grid.spacing(k);
      const double t = (1.0 - u[mn]) / (u[pl] - u[mn]);  // fraction from mn to pl
      // traces are evaluated at the middle of the smoothed layer
      const double tm = std::min((1.0 + 0.5 * layer_eps - u[mn]) / (u[pl] - u[mn]), 1.5);
      FreeBoundaryPoint p;
      p.minus_node = mn;
      p.plus_node = pl;
      p.axis = k;
      p.location = grid.point(mn);
      p.location[static_cast<std::size_t>(k)] += dir * t * h;
      // distances to the crossing: d1 and d1 + h
      const double dm = (1.0 + tm) * h, dp = (2.0 - tm) * h;
      p.grad_minus_sq = std::max(0.0, gsq(m1) + (gsq(m1) - gsq(m2)) * dm / h);
      p.grad_plus_sq = std::max(0.0, gsq(p1) + (gsq(p1) - gsq(p2)) * dp / h);

      p.normal.assign(static_cast<std::size_t>(d), 0.0);
      double nn = 0.0;
      for (int c = 0; c < d; ++c) {
        const std::size_t sc = grid.stride(c);
        const auto ic = grid.multi_index(pl)[c];
        const double hc = grid.spacing(c);
        double dv;
        if (ic == 0)
          dv = (u[pl + sc] - u[pl]) / hc;
        else if (ic == grid.nodes(c) - 1)
          dv = (u[pl] - u[pl - sc]) / hc;
        else
          dv = (u[pl + sc] - u[pl - sc]) / (2.0 * hc);
        p.normal[static_cast<std::size_t>(c)] = dv;
        nn += dv * dv;
      }
      if (nn > 0.0) {
        for (double& v : p.normal) v /= std::sqrt(nn);
      } else {
        p.normal[static_cast<std::size_t>(k)] = dir;
      }
      fb.points.push_back(std::move(p));
    }
  }
  return fb;
}

JumpStats jump_check(const FreeBoundary& fb) {
  if (fb.empty()) throw InvalidArgument("jump_check: empty free boundary");
  JumpStats js;
  double sum = 0.0;
  for (const auto& p : fb.points) {
    const double dev = std::abs(p.grad_plus_sq - p.grad_minus_sq - 2.0);
    sum += dev;
    js.max = std::max(js.max, dev);
  }
  js.count = fb.size();
  js.mean = sum / static_cast<double>(js.count);
  return js;
}

SandwichReport energy_sandwich_check(const Discretization& disc, const ModelParams& params, const ScalarField& u,
                                     const std::vector<StageReport>& stages, int branch) {
  if (stages.size() < 3) throw InvalidArgument("energy_sandwich_check: need at least 3 stages");
  const Grid& g = *disc.grid;
  SandwichReport r;
  r.E_final = energy_exact(disc, params, u.values());
  const double h = g.min_spacing();
  std::vector<unsigned char> band(g.num_nodes(), 0);
  for (std::size_t n = 0; n < g.num_nodes(); ++n) band[n] = g.is_interior(n) && std::abs(u[n] - 1.0) <= h;
  r.band_measure = haar_measure_of(g, band);
  for (std::size_t j = stages.size() - 3; j < stages.size(); ++j) {
    const StageReport& s = stages[j];
    const double Ej = branch == 0 ? s.E_eps_u0 : s.E_eps_u1;
    const double tol = branch == 0 ? s.tol_u0 : s.tol_u1;
    const double slack = 10.0 * tol;
    const double lo = Ej - (r.E_final - slack);
    const double hi = r.E_final + r.band_measure + slack - Ej;
    r.lower_margin.push_back(lo);
    r.upper_margin.push_back(hi);
    if (!(lo >= 0.0) || !(hi >= 0.0)) r.passed = false;
  }
  return r;
}

namespace {

// Calls f(node) for grid nodes whose coordinates lie within `radius` of c.
template <class F>
void for_nodes_near(const Grid& grid, const Point& c, double radius, F&& f) {
  const int d = grid.dim();
  int lo[3] = {0, 0, 0}, hi[3] = {0, 0, 0};
  for (int a = 0; a < d; ++a) {
    const double h = grid.spacing(a);
    const double x0 = grid.lo()[static_cast<std::size_t>(a)];
    lo[a] = std::max(0, static_cast<int>(std::floor((c[static_cast<std::size_t>(a)] - radius - x0) / h)));
    hi[a] = std::min(grid.nodes(a) - 1, static_cast<int>(std::ceil((c[static_cast<std::size_t>(a)] + radius - x0) / h)));
    if (lo[a] > hi[a]) return;
  }
  std::array<int, 3> idx{0, 0, 0};
  double x[3];
  for (idx[0] = lo[0]; idx[0] <= hi[0]; ++idx[0])
    for (idx[1] = lo[1]; idx[1] <= (d > 1 ? hi[1] : 0); ++idx[1])
      for (idx[2] = lo[2]; idx[2] <= (d > 2 ? hi[2] : 0); ++idx[2]) {
        const std::size_t n = grid.node_index(idx);
        grid.coords(n, x);
        double r2 = 0.0;
        for (int a = 0; a < d; ++a) r2 += (x[a] - c[static_cast<std::size_t>(a)]) * (x[a] - c[static_cast<std::size_t>(a)]);
        if (r2 < radius * radius) f(n);
      }
}

double bump_value(const Grid& g, std::size_t n, const Point& c, double rho) {
  double x[3], r2 = 0.0;
  g.coords(n, x);
  for (int a = 0; a < g.dim(); ++a) r2 += (x[a] - c[static_cast<std::size_t>(a)]) * (x[a] - c[static_cast<std::size_t>(a)]);
  const double t = std::max(0.0, 1.0 - r2 / (rho * rho));
  return t * t;
}

}  // namespace

RadonReport radon_measure_check(const Discretization& disc, const ModelParams& params, const ScalarField& u,
                                int trials, std::uint64_t seed) {
  const Grid& g = *disc.grid;
  const Eigen::VectorXd Ku = disc.op.apply_full(u.values());
  double hmax = 0.0, extent = std::numeric_limits<double>::infinity();
  for (int a = 0; a < g.dim(); ++a) {
    hmax = std::max(hmax, g.spacing(a));
    extent = std::min(extent, g.hi()[static_cast<std::size_t>(a)] - g.lo()[static_cast<std::size_t>(a)]);
  }
  const double h = g.min_spacing();
  const double grow = std::sqrt(static_cast<double>(g.dim())) * hmax;

  std::vector<std::size_t> low, high;
  for (std::size_t n = 0; n < g.num_nodes(); ++n) {
    if (!g.is_interior(n)) continue;
    if (u[n] < 1.0 - 2.0 * h) low.push_back(n);
    if (u[n] > 1.0 + 2.0 * h) high.push_back(n);
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  RadonReport rep;
  rep.min_pairing = std::numeric_limits<double>::infinity();

  // branch 0: {u < 1 - 2h}, branch 1: {u > 1 + 2h}
  for (int branch = 0; branch < 2; ++branch) {
    const auto& pool = branch == 0 ? low : high;
    if (pool.empty()) continue;
    int done = 0;
    for (int attempt = 0; attempt < 200 * trials && done < trials; ++attempt) {
      const std::size_t c = pool[static_cast<std::size_t>(unit(rng) * static_cast<double>(pool.size())) % pool.size()];
      const Point center = g.point(c);
      const double rho = 3.0 * hmax + unit(rng) * 0.25 * extent;
      bool fits = true;
      for_nodes_near(g, center, rho + grow, [&](std::size_t n) {
        if (!fits) return;
        if (branch == 0) {
          if (g.is_interior(n) && !(u[n] < 1.0 - 2.0 * h)) fits = false;
        } else if (!g.is_interior(n) || !(u[n] > 1.0 + 2.0 * h)) {
          fits = false;
        }
      });
      if (!fits) continue;
      double pairing = 0.0, target = 0.0, norm2 = 0.0;
      for_nodes_near(g, center, rho, [&](std::size_t n) {
        if (!g.is_interior(n)) return;
        const double xi = bump_value(g, n, center, rho);
        const double w = g.weight(n);
        const double sing = u[n] > 0.0 ? params.beta * std::pow(u[n], -params.delta) : 0.0;
        pairing += xi * (Ku[static_cast<Eigen::Index>(n)] - w * sing);
        if (branch == 1) target += xi * w * params.lambda * g_eval(params, u[n] - 1.0);
        norm2 += w * xi * xi;
      });
      if (!(norm2 > 0.0)) continue;
      ++done;
      const double nrm = std::sqrt(norm2);
      if (branch == 0) {
        ++rep.inequality_trials;
        rep.min_pairing = std::min(rep.min_pairing, pairing / nrm);
        if (pairing < -1e-8 * nrm) ++rep.inequality_failures;
      } else {
        ++rep.equality_trials;
        const double rel = std::abs(pairing - target) / std::max(std::abs(target), 1e-300);
        rep.max_equality_rel_error = std::max(rep.max_equality_rel_error, rel);
        if (rel > 1e-6) ++rep.equality_failures;
      }
    }
  }
  if (rep.inequality_trials == 0) rep.min_pairing = 0.0;
  return rep;
}

ComparisonReport comparison_check(const ScalarField& u, const ScalarField& u_beta, double tol) {
  const Grid& g = u.grid();
  if (u.size() != u_beta.size()) throw InvalidArgument("comparison_check: fields on different grids");
  ComparisonReport r;
  for (std::size_t n = 0; n < g.num_nodes(); ++n) {
    if (!g.is_interior(n)) continue;
    ++r.interior;
    if (u[n] < u_beta[n] - tol) ++r.below;
    if (u[n] > u_beta[n]) ++r.strict;
  }
  r.strict_fraction = r.interior ? static_cast<double>(r.strict) / static_cast<double>(r.interior) : 1.0;
  return r;
}

BarrierReport barrier_check(const ScalarField& u, const ScalarField& v0) {
  const Grid& g = u.grid();
  BarrierReport r;
  r.d0 = barrier_distance(v0);
  r.dist = std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < g.num_nodes(); ++n)
    if (u[n] >= 1.0) r.dist = std::min(r.dist, g.distance_to_boundary(n));
  double hmax = 0.0;
  for (int a = 0; a < g.dim(); ++a) hmax = std::max(hmax, g.spacing(a));
  r.passed = !(r.dist < r.d0 - hmax);
  return r;
}

int count_components(const Grid& grid, const std::function<bool(std::size_t)>& pred) {
  std::vector<unsigned char> seen(grid.num_nodes(), 0);
  int count = 0;
  std::deque<std::size_t> queue;
  for (std::size_t s = 0; s < grid.num_nodes(); ++s) {
    if (seen[s] || !grid.is_interior(s) || !pred(s)) continue;
    ++count;
    seen[s] = 1;
    queue.push_back(s);
    while (!queue.empty()) {
      const std::size_t n = queue.front();
      queue.pop_front();
      const auto idx = grid.multi_index(n);
      for (int a = 0; a < grid.dim(); ++a) {
        const std::size_t st = grid.stride(a);
        for (int sg : {-1, 1}) {
          const int i = idx[a] + sg;
          if (i < 0 || i >= grid.nodes(a)) continue;
          const std::size_t m = sg > 0 ? n + st : n - st;
          if (seen[m] || !grid.is_interior(m) || !pred(m)) continue;
          seen[m] = 1;
          queue.push_back(m);
        }
      }
    }
  }
  return count;
}

}  // namespace cfbp
