#include <algorithm>
#include <cmath>

#include "doctest.h"

#include "carnot_fbp/auxiliary.hpp"
#include "carnot_fbp/errors.hpp"
#include "carnot_fbp/solvers.hpp"

using namespace cfbp;

namespace {

struct Setup {
  DiscretizationPtr disc;
  ModelParams m;
  SingularSolution s;
  std::shared_ptr<const CutoffContext> ctx;
};

Setup setup(double lambda, double beta, int n = 128, double eps = 0.2) {
  Setup r;
  r.disc = make_discretization(GroupKind::euclid1, {0.0}, {1.0}, {n});
  r.m.lambda = lambda;
  r.m.beta = beta;
  r.m.delta = 0.5;
  r.m.epsilon = eps;
  r.s = solve_singular(*r.disc, beta, r.m.delta);
  r.ctx = make_cutoff(r.s);
  return r;
}

}  // namespace

TEST_CASE("without the bulk term the minimizer is u_beta") {
  Setup st = setup(0.0, 0.05);
  EnergyFunctional e(st.disc, st.m, st.ctx);
  ScalarField start(st.disc->grid);
  const MinimizeResult r = minimize_energy(e, start);
  CHECK(r.report.converged);
  CHECK((r.u.values() - st.s.u_beta.values()).cwiseAbs().maxCoeff() <= 1e-6);
  CHECK(r.report.morse_index == 0);
  CHECK(critical_point_certificate(e, r.u) <= 1e-6);
}

TEST_CASE("minimization descends and converges") {
  Setup st = setup(47.0, 0.05);
  EnergyFunctional e(st.disc, st.m, st.ctx);
  const ScalarField v0 = barrier_for(*st.disc, st.m, st.s.u_beta);
  const double E_start = energy_eps(e, v0);
  const MinimizeResult r = minimize_energy(e, v0);
  CHECK(r.report.converged);
  CHECK(r.report.energy_eps <= E_start);
  CHECK(r.report.residual_sup <= r.report.tolerance);
  CHECK(r.u.satisfies_dirichlet());
  CHECK(r.u.values().maxCoeff() > 1.0);
  const ScalarField res = residual_eps(e, r.u);
  CHECK(residual_sup(*st.disc->grid, res.values()) <= e.tolerance());
}

TEST_CASE("truncated primitive") {
  ModelParams m;
  m.lambda = 10.0;
  m.epsilon = 0.1;
  m.g_kind = GKind::power;
  const double inf = std::numeric_limits<double>::infinity();
  auto G = [&](double s) { return G_eps(m, std::max(s - 1.0, 0.0)); };
  for (double s : {0.0, 0.5, 1.02, 1.3, 2.5}) {
    CHECK(truncated_G(m, s, inf) == doctest::Approx(G(s)).epsilon(1e-12));
    for (double cap : {0.8, 1.05, 1.5}) {
      const double t = truncated_G(m, s, cap);
      CHECK(t <= G(s) + 1e-12);
      if (s > cap)
        CHECK(t == doctest::Approx(G(cap) + (s - cap) * g_eps(m, std::max(cap - 1.0, 0.0))).epsilon(1e-10));
      else
        CHECK(t == doctest::Approx(G(s)).epsilon(1e-12));
    }
  }

  // a cap far above the field leaves the functional unchanged
  Setup st = setup(47.0, 0.05, 64);
  EnergyFunctional e(st.disc, st.m, st.ctx);
  const ScalarField v0 = barrier_for(*st.disc, st.m, st.s.u_beta);
  ScalarField cap(st.disc->grid, Eigen::VectorXd::Constant(static_cast<Eigen::Index>(v0.size()), 1e6));
  const EnergyFunctional et = build_truncated(e, cap);
  CHECK(et.truncated());
  CHECK(energy_eps(et, v0) == doctest::Approx(energy_eps(e, v0)).epsilon(1e-12));
}

TEST_CASE("m1 estimate") {
  Setup st = setup(16.0, 0.05, 128);
  const std::vector<double> eps{0.2, 0.1};
  const ScalarField v0 = barrier_for(*st.disc, st.m, st.s.u_beta);
  const M1Estimate a = estimate_m1(st.disc, st.m, st.ctx, v0, eps, 2);
  CHECK(a.m1 <= 0.0);
  CHECK(a.start_values.size() >= 4);

  ModelParams m2 = st.m;
  m2.lambda = 32.0;
  const ScalarField v1 = barrier_for(*st.disc, m2, st.s.u_beta);
  const M1Estimate b = estimate_m1(st.disc, m2, st.ctx, v1, eps, 2);
  CHECK(b.m1 < a.m1);
  CHECK(b.m1 < -1.0);
}

TEST_CASE("lambda sweep brackets the threshold") {
  Setup st = setup(1.0, 0.05, 128);
  const LambdaSweep sw = locate_lambda_star(st.disc, st.m, st.ctx, st.s.u_beta, {4.0, 16.0, 64.0}, {0.2, 0.1}, 2, 0.05);
  REQUIRE(sw.found);
  CHECK(sw.bracket_lo >= 16.0);
  CHECK(sw.bracket_hi <= 64.0);
  CHECK(sw.bracket_hi / sw.bracket_lo - 1.0 <= 0.05 + 1e-12);
}

TEST_CASE("ordering check") {
  auto grid = std::make_shared<const Grid>(Point{0.0}, Point{1.0}, std::vector<int>{33});
  const ScalarField u0 = ScalarField::from_function(grid, [](const double* x) { return 8.0 * x[0] * (1.0 - x[0]); });
  const ScalarField half = ScalarField::from_function(grid, [](const double* x) { return 5.0 * x[0] * (1.0 - x[0]); });

  const OrderingReport same = ordering_check(u0, u0);
  CHECK(same.passed());
  CHECK_FALSE(same.distinct);

  const OrderingReport r = ordering_check(half, u0);
  CHECK(r.passed());
  CHECK(r.distinct);
  CHECK(r.measure_u1_above > 0.0);

  const OrderingReport bad = ordering_check(u0, half);
  CHECK_FALSE(bad.passed());
  CHECK(bad.order_violations > 0);
}
