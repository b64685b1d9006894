#include "carnot_fbp/suite.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "carnot_fbp/errors.hpp"

namespace cfbp {

namespace {

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

Check make(std::string name, bool ok, std::string detail, bool gating = true) {
  return Check{std::move(name), ok, gating, std::move(detail)};
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Eigen::VectorXd random_interior(const Grid& g, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(g.num_nodes()));
  for (std::size_t n = 0; n < g.num_nodes(); ++n)
    if (g.is_interior(n)) v[static_cast<Eigen::Index>(n)] = u(rng);
  return v;
}

// v(x) exp(c . x), c uniform in [-1, 1]^d.
Eigen::VectorXd tilted(const Grid& g, std::mt19937_64& rng, Eigen::VectorXd v) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double c[3] = {0, 0, 0}, x[3];
  for (int a = 0; a < g.dim(); ++a) c[a] = u(rng);
  for (std::size_t n = 0; n < g.num_nodes(); ++n) {
    g.coords(n, x);
    double e = 0.0;
    for (int a = 0; a < g.dim(); ++a) e += c[a] * x[a];
    v[static_cast<Eigen::Index>(n)] *= std::exp(e);
  }
  return v;
}

}  // namespace

DiscretizationPtr make_discretization(const RunConfig& cfg) {
  return make_discretization(cfg.group, cfg.lo, cfg.hi, cfg.nodes);
}

Problem make_problem(const RunConfig& cfg) {
  Problem pb;
  pb.disc = make_discretization(cfg);
  pb.params = cfg.model;
  pb.params.epsilon = cfg.eps0;
  pb.singular = solve_singular(*pb.disc, pb.params.beta, pb.params.delta);
  pb.ctx = make_cutoff(pb.singular);
  pb.eig = principal_eigenpair(*pb.disc);
  pb.beta_star = beta_star_estimate(pb.params, pb.eig);
  return pb;
}

std::vector<Check> operator_checks(const Discretization& disc, std::uint64_t seed, int pairs) {
  const Grid& g = *disc.grid;
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  for (int k = 0; k < pairs; ++k) {
    const Eigen::VectorXd u = random_interior(g, rng, -1.0, 1.0), v = random_interior(g, rng, -1.0, 1.0);
    const double lhs = v.dot(disc.op.apply_full(u));
    const double rhs = gauss_point_inner_product(disc.group, g, u, v);
    worst = std::max(worst, std::abs(lhs - rhs) / (u.norm() * v.norm()));
  }
  const SparseMatrix at = disc.op.full().transpose();
  const double asym = (disc.op.full() - at).norm();
  return {make("summation by parts", worst <= 1e-11, fmt("max |<Ku,v> - (grad u, grad v)| / |u||v| = %.3e", worst)),
          make("operator symmetry", asym == 0.0, fmt("||K - K^T|| = %.3e", asym))};
}

double gradient_fd_error(const EnergyFunctional& e, int probes, std::uint64_t seed) {
  const Grid& g = e.disc().grid.operator*();
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  const double t = 1e-5;
  for (int k = 0; k < probes; ++k) {
    // Smooth random fields: nodal noise makes the quadratic part O(1/h^2)
    // and the central difference then loses most digits to cancellation.
    // The tilt breaks the reflection symmetries of the sine modes: u and v of
    // opposite parity give <E'(u), v> = 0 exactly and a meaningless ratio.
    const Eigen::VectorXd s = tilted(g, rng, smooth_random_direction(g, rng, 4));
    const Eigen::VectorXd w = tilted(g, rng, smooth_random_direction(g, rng, 4));
    const Eigen::VectorXd u = 1.6 * s.cwiseAbs2() / std::max(s.cwiseAbs2().maxCoeff(), 1e-300);
    const Eigen::VectorXd v = 0.5 * w / std::max(w.cwiseAbs().maxCoeff(), 1e-300);
    const double fd = (e.energy(u + t * v) - e.energy(u - t * v)) / (2.0 * t);
    const double an = e.gradient(u).dot(v);
    worst = std::max(worst, std::abs(fd - an) / std::max(std::abs(an), 1e-300));
  }
  return worst;
}

std::vector<Check> gradient_checks(const Problem& pb, const std::vector<double>& eps, int probes,
                                   std::uint64_t seed) {
  std::vector<Check> out;
  const Grid& g = *pb.disc->grid;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    ModelParams m = pb.params;
    m.epsilon = eps[i];
    EnergyFunctional e(pb.disc, m, pb.ctx);
    EnergyFunctional et(pb.disc, m, pb.ctx, Eigen::VectorXd::Constant(static_cast<Eigen::Index>(g.num_nodes()), 1.3));
    const double a = gradient_fd_error(e, probes, seed + i);
    const double b = gradient_fd_error(et, probes, seed + 100 + i);
    out.push_back(make(fmt("gradient vs finite differences, eps=%.4g", eps[i]), std::max(a, b) <= 1e-6,
                       fmt("max relative error %.3e (plain), %.3e (truncated)", a, b)));
  }
  return out;
}

std::vector<Check> continuation_checks(const Problem& pb, const ContinuationResult& run, double m1,
                                       std::uint64_t seed) {
  std::vector<Check> out;
  const Discretization& disc = *pb.disc;
  const Grid& g = *disc.grid;
  const ModelParams& P = pb.params;
  const auto& st = run.stages;
  const double H = g.volume();
  const ScalarField ub(disc.grid, pb.singular.u_beta.values());
  const bool have_u1 = run.u1.size() == run.u0.size();

  {
    bool ok = true;
    double worst = 0.0;
    for (const auto& s : st) {
      ok = ok && s.res_u0 <= s.tol_u0 && (!have_u1 || s.res_u1 <= s.tol_u1);
      worst = std::max({worst, s.res_u0 / s.tol_u0, have_u1 ? s.res_u1 / s.tol_u1 : 0.0});
    }
    out.push_back(make("every stage converged", ok, fmt("max residual / tolerance = %.3e", worst)));
  }

  const StageReport& last = st.back();
  ModelParams mf = P;
  mf.epsilon = last.eps;
  EnergyFunctional ef(pb.disc, mf, pb.ctx);
  {
    const double c0 = critical_point_certificate(ef, run.u0, 50, seed);
    out.push_back(make("critical point certificate u0", c0 <= 1e-6, fmt("max |<E'(u0),v>|/|v| = %.3e", c0)));
    if (have_u1) {
      const EnergyFunctional te = build_truncated(ef, run.u0);
      const double c1 = critical_point_certificate(te, run.u1, 50, seed + 1);
      out.push_back(make("critical point certificate u1", c1 <= 1e-6, fmt("max |<E'(u1),v>|/|v| = %.3e", c1)));
    }
  }

  if (have_u1) {
    const OrderingReport o = ordering_check(run.u1, run.u0);
    char buf[256];
    std::snprintf(buf, sizeof buf, "positivity %zu, order %zu, inclusion %zu, complement %zu violations; sup|u0-u1| = %.4g",
                  o.positivity_violations, o.order_violations, o.inclusion_violations, o.complement_violations,
                  o.sup_difference);
    out.push_back(make("ordering 0 < u1 <= u0 and level-set inclusions", o.passed(), buf));
    out.push_back(make("two distinct solutions", o.distinct, fmt("sup|u0-u1| = %.4g", o.sup_difference)));
    out.push_back(make("{u1 > 1} nonempty", o.measure_u1_above > 0.0, fmt("H({u1>1}) = %.4g", o.measure_u1_above)));
  }

  {
    const bool admissible = P.beta < pb.beta_star;
    for (int b = 0; b < (have_u1 ? 2 : 1); ++b) {
      const ScalarField& u = b ? run.u1 : run.u0;
      const ComparisonReport c = comparison_check(u, ub);
      out.push_back(make(std::string("comparison u") + (b ? "1" : "0") + " >= u_beta", c.passed(),
                         fmt("%.0f nodes below, strict at %.4f of interior nodes", static_cast<double>(c.below),
                             c.strict_fraction),
                         admissible));
      const RadonReport r = radon_measure_check(disc, P, u, 50, seed + 10 + static_cast<std::uint64_t>(b));
      char buf[256];
      std::snprintf(buf, sizeof buf, "%d+%d bumps, min pairing/|xi| = %.3e, max equality error = %.3e",
                    r.inequality_trials, r.equality_trials, r.min_pairing, r.max_equality_rel_error);
      out.push_back(make(std::string("Radon measure u") + (b ? "1" : "0"), r.passed() && r.inequality_trials > 0, buf));
      const BarrierReport br = barrier_check(u, run.v0);
      out.push_back(make(std::string("{u") + (b ? "1" : "0") + " >= 1} away from the boundary", br.passed,
                         fmt("distance %.4g, barrier d0 %.4g", br.dist, br.d0)));
    }
  }

  {
    const bool one_d = g.dim() == 1;
    const bool ok = last.fb_cells > 0 && last.jump_mean <= 0.1;
    out.push_back(make("free-boundary jump at the final stage", ok,
                       fmt("%.0f crossings, mean deviation %.4g, max %.4g", last.fb_cells, last.jump_mean, last.jump_max),
                       one_d));
  }

  if (have_u1) {
    std::vector<unsigned char> band(g.num_nodes(), 0);
    const double h = g.min_spacing();
    for (std::size_t n = 0; n < g.num_nodes(); ++n) band[n] = g.is_interior(n) && std::abs(run.u1[n] - 1.0) <= h;
    const double Hb = haar_measure_of(g, band);
    const double E0 = energy_exact(disc, P, run.u0.values()), E1 = energy_exact(disc, P, run.u1.values());
    out.push_back(make("energy separation E(u0) < -H(Omega) <= -H(band) < E(u1)", E0 < -H && -Hb < E1,
                       fmt("E(u0) = %.6g, E(u1) = %.6g, H(band) = %.3g", E0, E1, Hb)));
  }

  if (st.size() >= 4) {
    for (int b = 0; b < (have_u1 ? 2 : 1); ++b) {
      const std::size_t n = st.size();
      const auto d = [&](std::size_t j) { return b ? st[j].sup_delta_u1 : st[j].sup_delta_u0; };
      const bool ok = d(n - 2) < d(n - 3) && d(n - 1) < d(n - 2);
      out.push_back(make(std::string("stage deltas decrease, u") + (b ? "1" : "0"), ok,
                         fmt("last deltas %.3e, %.3e, %.3e", d(n - 3), d(n - 2), d(n - 1))));
    }
  }
  for (int b = 0; b < (have_u1 ? 2 : 1); ++b) {
    std::vector<double> lip;
    for (const auto& s : st) lip.push_back(b ? s.lip_u1 : s.lip_u0);
    const double mx = *std::max_element(lip.begin(), lip.end()), med = median(lip);
    out.push_back(make(std::string("uniform Lipschitz bound, u") + (b ? "1" : "0"), mx <= 1.2 * med,
                       fmt("max %.4g, median %.4g", mx, med)));
  }
  {
    bool ok = true;
    double worst = -1e300;
    for (std::size_t j = 1; j < st.size(); ++j) {
      const double de = st[j - 1].eps - st[j].eps;
      const double bound = st[j - 1].E_eps_u0 + P.lambda * (P.a0 * de + P.a1 * std::pow(de, P.p) / P.p) * H;
      worst = std::max(worst, st[j].E_eps_warm - bound);
      ok = ok && st[j].E_eps_warm <= bound;
    }
    out.push_back(make("warm-start energy bound", ok, fmt("max excess %.3e", st.size() > 1 ? worst : 0.0)));
  }
  for (int b = 0; b < (have_u1 && st.size() >= 3 ? 2 : (st.size() >= 3 ? 1 : 0)); ++b) {
    const SandwichReport sw = energy_sandwich_check(disc, P, b ? run.u1 : run.u0, st, b);
    const double lo = *std::min_element(sw.lower_margin.begin(), sw.lower_margin.end());
    const double hi = *std::min_element(sw.upper_margin.begin(), sw.upper_margin.end());
    out.push_back(make(std::string("energy sandwich, u") + (b ? "1" : "0"), sw.passed,
                       fmt("min lower margin %.3e, min upper margin %.3e", lo, hi), false));
  }

  if (!std::isnan(m1)) {
    bool ok = true;
    double worst = -1e300;
    for (const auto& s : st) {
      const double rhs = m1 + 2.0 * P.lambda * s.eps * P.a0 * H;
      ok = ok && s.E_eps_u0 <= rhs && rhs < 0.0;
      worst = std::max(worst, s.E_eps_u0 - rhs);
    }
    out.push_back(make("E_eps(u0) <= m1 + 2 lambda eps a0 H < 0", ok,
                       fmt("m1 = %.6g, max E_eps(u0) - bound = %.3e", m1, worst)));
  }
  if (have_u1) {
    double worst = -1e300;
    bool ok = true, pos = true;
    double m2min = 1e300;
    for (const auto& s : st) {
      const double bound = 0.5 * s.norm_sq_u0 + H;
      worst = std::max(worst, s.E_eps_u1 - bound);
      ok = ok && s.E_eps_u1 <= bound;
      if (!std::isnan(s.m2)) {
        m2min = std::min(m2min, s.m2);
        pos = pos && s.m2 > 0.0 && s.level >= s.m2 - s.tol_u1;
      }
    }
    out.push_back(make("mountain-pass level <= |u0|^2/2 + H(Omega)", ok,
                       fmt("max level - bound = %.3e", worst)));
    if (m2min < 1e300)
      out.push_back(make("rim value m2 > 0 and level >= m2", pos, fmt("min m2 over stages = %.4g", m2min)));
  }

  {
    const int c0 = count_components(g, [&](std::size_t n) { return run.u0[n] < 1.0; });
    const int c1 = have_u1 ? count_components(g, [&](std::size_t n) { return run.u1[n] < 1.0; }) : 0;
    const int a0 = count_components(g, [&](std::size_t n) { return run.u0[n] > 1.0; });
    char buf[160];
    std::snprintf(buf, sizeof buf, "components: {u0<1} %d, {u1<1} %d, {u0>1} %d", c0, c1, a0);
    out.push_back(make("level-set components (reported)", true, buf, false));
  }
  return out;
}

bool SuiteReport::passed() const {
  for (const auto& c : checks)
    if (c.gating && !c.passed) return false;
  return true;
}

SuiteReport run_invariant_suite(const RunConfig& cfg, const LogFn& log) {
  SuiteReport rep;
  auto note = [&](const std::string& s) {
    if (log) log(s);
  };
  Problem pb = make_problem(cfg);
  note(fmt("lambda1 = %.8g, beta* estimate = %.4g", pb.eig.lambda1, pb.beta_star));
  auto add = [&](std::vector<Check> v) {
    for (auto& c : v) {
      note(format_check(c));
      rep.checks.push_back(std::move(c));
    }
  };
  add(operator_checks(*pb.disc, cfg.seed));
  const auto eps = cfg.schedule();
  add(gradient_checks(pb, {eps.front(), eps[eps.size() / 2], eps.back()}, 20, cfg.seed));
  {
    const auto& ub = pb.singular.u_beta;
    double mn = 1e300;
    for (std::size_t n = 0; n < ub.size(); ++n)
      if (ub.grid().is_interior(n)) mn = std::min(mn, ub[n]);
    add({make("singular solution positive and converged", mn > 0.0 && pb.singular.residual_norm <= 1e-6,
              fmt("min interior u_beta = %.3e, fixed-point residual = %.3e", mn, pb.singular.residual_norm)),
         make("beta below the beta* estimate", pb.params.beta < pb.beta_star,
              fmt("beta = %.4g, beta* = %.4g", pb.params.beta, pb.beta_star))});
  }
  const ScalarField v0 = barrier_for(*pb.disc, pb.params, pb.singular.u_beta);
  const M1Estimate m1 = estimate_m1(pb.disc, pb.params, pb.ctx, v0, eps, cfg.restarts, cfg.seed);
  rep.m1 = m1.m1;
  note(fmt("m1 estimate = %.8g", m1.m1));

  ContinuationOptions co;
  co.minimize.max_iter = cfg.max_iter;
  co.minimize.tol = cfg.tol;
  co.mountain.path_points = cfg.path_points;
  co.mountain.max_iter = cfg.mp_max_iter;
  co.mountain.tol = cfg.tol;
  co.seed = cfg.seed;
  co.log = log;
  ContinuationSchedule sched;
  sched.eps = eps;
  rep.run = run_continuation(pb.disc, pb.params, pb.singular, sched, co);
  add(continuation_checks(pb, rep.run, m1.m1, cfg.seed));
  return rep;
}

std::string format_check(const Check& c) {
  return std::string(c.passed ? "ok   " : (c.gating ? "FAIL " : "note ")) + c.name + ": " + c.detail;
}

}  // namespace cfbp
