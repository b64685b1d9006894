#include <algorithm>
#include <cmath>

#include "doctest.h"

#include "carnot_fbp/auxiliary.hpp"
#include "carnot_fbp/errors.hpp"
#include "carnot_fbp/mountain_pass.hpp"

using namespace cfbp;

namespace {

struct Bench {
  DiscretizationPtr disc;
  ModelParams m;
  SingularSolution s;
  std::shared_ptr<const CutoffContext> ctx;
  ScalarField u0;
};

Bench bench(int n) {
  Bench b;
  b.disc = make_discretization(GroupKind::euclid1, {0.0}, {1.0}, {n});
  b.m.lambda = 47.0;
  b.m.beta = 0.05;
  b.m.epsilon = 0.2;
  b.s = solve_singular(*b.disc, b.m.beta, b.m.delta);
  b.ctx = make_cutoff(b.s);
  EnergyFunctional e(b.disc, b.m, b.ctx);
  b.u0 = minimize_energy(e, barrier_for(*b.disc, b.m, b.s.u_beta)).u;
  return b;
}

}  // namespace

TEST_CASE("mountain pass rejects a non-negative endpoint") {
  Bench b = bench(64);
  EnergyFunctional e(b.disc, b.m, b.ctx);
  ScalarField zero(b.disc->grid);
  CHECK_THROWS_AS(mountain_pass(e, zero), GeometryFailure);
}

TEST_CASE("mountain pass on the 1-D benchmark") {
  Bench b = bench(128);
  EnergyFunctional e(b.disc, b.m, b.ctx);
  const EnergyFunctional et = build_truncated(e, b.u0);
  const double E0 = energy_eps(et, b.u0);
  REQUIRE(E0 < 0.0);

  const MountainPassResult mp = mountain_pass(et, b.u0);
  CHECK(mp.report.converged);
  CHECK(mp.report.residual_sup <= mp.report.tolerance);
  CHECK(mp.report.level > std::max(0.0, E0));
  CHECK(mp.path.size() == mp.path_energy.size());
  CHECK(mp.path.front().cwiseAbs().maxCoeff() == 0.0);
  CHECK((mp.path.back() - b.u0.values()).cwiseAbs().maxCoeff() < 1e-12);
  // the level is no larger than the path maximum
  CHECK(mp.report.level <= *std::max_element(mp.path_energy.begin(), mp.path_energy.end()) + 1e-8);

  const OrderingReport ord = ordering_check(mp.u1, b.u0);
  CHECK(ord.passed());
  CHECK(ord.distinct);
  CHECK(critical_point_certificate(et, mp.u1) <= 1e-6);
  // a saddle of the truncated problem solves the untruncated one
  CHECK(residual_sup(*b.disc->grid, residual_eps(e, mp.u1).values()) <= e.tolerance());

  // mountain geometry: the rim sits above both ends
  const RimEstimate rim = rim_estimate(et, b.u0, b.s.u_beta, nullptr, 16, 6, 7, &mp.path);
  CHECK(rim.m2 > 0.0);
  CHECK(rim.m2 <= mp.report.level + 1e-8);
  CHECK(rim.radii.size() == rim.minima.size());
}

TEST_CASE("newton polish at a minimizer") {
  Bench b = bench(64);
  EnergyFunctional e(b.disc, b.m, b.ctx);
  const MinimizeResult r = newton_polish(e, b.u0);
  CHECK(r.report.morse_index == 0);
  CHECK((r.u.values() - b.u0.values()).cwiseAbs().maxCoeff() < 1e-6);
}
