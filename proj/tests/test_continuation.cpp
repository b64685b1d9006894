#include <cmath>
#include <string>

#include "doctest.h"

#include "carnot_fbp/continuation.hpp"
#include "carnot_fbp/errors.hpp"

using namespace cfbp;

namespace {

std::shared_ptr<const Grid> line(double hi, int n) {
  return std::make_shared<const Grid>(Point{0.0}, Point{hi}, std::vector<int>{n});
}

// Tent on [0, 4] with slope `outer` up to u = 1 at x = 1, then `inner`.
ScalarField kinked_tent(const std::shared_ptr<const Grid>& g, double outer, double inner) {
  return ScalarField::from_function(g, [=](const double* x) {
    const double y = std::min(x[0], 4.0 - x[0]);
    return y <= 1.0 ? outer * y : outer + inner * (y - 1.0);
  });
}

struct Bench {
  DiscretizationPtr disc;
  ModelParams m;
  SingularSolution s;
};

Bench bench(int n, double lambda) {
  Bench b;
  b.disc = make_discretization(GroupKind::euclid1, {0.0}, {1.0}, {n});
  b.m.lambda = lambda;
  b.m.beta = 0.05;
  b.s = solve_singular(*b.disc, b.m.beta, b.m.delta);
  return b;
}

}  // namespace

TEST_CASE("schedule") {
  const ContinuationSchedule s = ContinuationSchedule::geometric(0.2, 3);
  REQUIRE(s.eps.size() == 4);
  CHECK(s.eps[3] == doctest::Approx(0.025));
  CHECK_NOTHROW(s.validate());
  CHECK_THROWS_AS(ContinuationSchedule::geometric(0.0, 3), InvalidArgument);
  CHECK_THROWS_AS((ContinuationSchedule{{0.1, 0.2}}.validate()), InvalidArgument);
  CHECK_THROWS_AS((ContinuationSchedule{{}}.validate()), InvalidArgument);
  CHECK(stage_table_columns().size() == stage_table_row(StageReport{}).size());
}

TEST_CASE("free boundary location and normal") {
  auto g = line(2.0, 200);
  const ScalarField u = ScalarField::from_function(g, [](const double* x) { return 2.0 * std::min(x[0], 2.0 - x[0]); });
  const FreeBoundary fb = extract_free_boundary(GroupModel::euclidean(1), u);
  REQUIRE(fb.size() == 2);
  CHECK(fb.points[0].location[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(fb.points[1].location[0] == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(fb.points[0].normal[0] == doctest::Approx(1.0));
  CHECK(fb.points[1].normal[0] == doctest::Approx(-1.0));
  CHECK(fb.points[0].grad_plus_sq == doctest::Approx(4.0));

  const ScalarField low = ScalarField::from_function(g, [](const double* x) { return 0.4 * std::min(x[0], 2.0 - x[0]); });
  const FreeBoundary none = extract_free_boundary(GroupModel::euclidean(1), low);
  CHECK(none.empty());
  CHECK_THROWS_AS(jump_check(none), InvalidArgument);
}

TEST_CASE("synthetic jump cases") {
  auto g = line(4.0, 400);
  const JumpStats exact = jump_check(extract_free_boundary(GroupModel::euclidean(1), kinked_tent(g, 1.0, std::sqrt(3.0))));
  CHECK(exact.count == 2);
  CHECK(exact.mean <= 1e-9);
  CHECK(exact.max <= 1e-9);

  const JumpStats flat = jump_check(extract_free_boundary(GroupModel::euclidean(1), kinked_tent(g, 1.0, 1.0)));
  CHECK(flat.mean == doctest::Approx(2.0).epsilon(1e-9));

  // traces at a shifted level see the same slopes on linear pieces
  const JumpStats shifted =
      jump_check(extract_free_boundary(GroupModel::euclidean(1), kinked_tent(g, 1.0, std::sqrt(3.0)), 0.01));
  CHECK(shifted.mean <= 1e-9);
}

TEST_CASE("energy sandwich controls") {
  Bench b = bench(128, 47.0);
  const ScalarField u = ScalarField::from_function(b.disc->grid, [](const double* x) { return 6.0 * x[0] * (1.0 - x[0]); });
  const double E = energy_exact(*b.disc, b.m, u.values());
  std::vector<StageReport> st(3);
  for (auto& s : st) {
    s.E_eps_u0 = E;
    s.tol_u0 = 1e-7;
  }
  CHECK(energy_sandwich_check(*b.disc, b.m, u, st).passed);
  st[1].E_eps_u0 = E + 10.0;
  const SandwichReport bad = energy_sandwich_check(*b.disc, b.m, u, st);
  CHECK_FALSE(bad.passed);
  CHECK(bad.upper_margin[1] < 0.0);
  st.pop_back();
  CHECK_THROWS_AS(energy_sandwich_check(*b.disc, b.m, u, st), InvalidArgument);
}

TEST_CASE("radon, comparison and barrier checks") {
  Bench b = bench(256, 47.0);
  // u_beta solves the equation where u < 1: every pairing vanishes
  const RadonReport ok = radon_measure_check(*b.disc, b.m, b.s.u_beta, 30);
  CHECK(ok.passed());
  CHECK(ok.inequality_trials == 30);
  CHECK(std::abs(ok.min_pairing) < 1e-8);

  // a strict subsolution pairs negatively
  ScalarField half = b.s.u_beta;
  half.values() *= 0.5;
  const RadonReport neg = radon_measure_check(*b.disc, b.m, half, 30);
  CHECK_FALSE(neg.passed());
  CHECK(neg.min_pairing < 0.0);

  ScalarField above = b.s.u_beta;
  for (std::size_t n = 0; n < above.size(); ++n)
    if (b.disc->grid->is_interior(n)) above[n] += 1e-3;
  CHECK(comparison_check(above, b.s.u_beta).passed());
  const ComparisonReport same = comparison_check(b.s.u_beta, b.s.u_beta);
  CHECK(same.below == 0);
  CHECK_FALSE(same.passed());
  CHECK_FALSE(comparison_check(half, b.s.u_beta).passed());

  const ScalarField v0 = barrier_v0(*b.disc, b.m, b.s.u_beta, 1.0);
  CHECK(barrier_check(v0, v0).passed);
  const ScalarField wide = ScalarField::from_function(b.disc->grid, [](const double* x) {
    return x[0] > 0.0 && x[0] < 1.0 ? 2.0 : 0.0;
  });
  CHECK_FALSE(barrier_check(wide, v0).passed);
}

TEST_CASE("component count") {
  auto g = std::make_shared<const Grid>(Point{0.0, 0.0}, Point{1.0, 1.0}, std::vector<int>{41, 41});
  auto disk = [&](std::size_t n, double cx, double r) {
    const double dx = g->coord(n, 0) - cx, dy = g->coord(n, 1) - 0.5;
    return dx * dx + dy * dy < r * r;
  };
  CHECK(count_components(*g, [&](std::size_t n) { return disk(n, 0.25, 0.15) || disk(n, 0.75, 0.15); }) == 2);
  CHECK(count_components(*g, [&](std::size_t n) { return disk(n, 0.5, 0.3); }) == 1);
  CHECK(count_components(*g, [](std::size_t) { return false; }) == 0);
}

TEST_CASE("continuation on a coarse benchmark") {
  Bench b = bench(128, 47.0);
  const ContinuationResult r = run_continuation(b.disc, b.m, b.s, ContinuationSchedule::geometric(0.2, 2));
  REQUIRE(r.stages.size() == 3);
  CHECK(r.report_u0.converged);
  CHECK(r.report_u1.converged);
  CHECK(ordering_check(r.u1, r.u0).passed());
  CHECK(r.stages.back().E_u0 < -1.0);
  CHECK(r.stages.back().E_u1 > -1.0);
  for (const auto& s : r.stages) {
    CHECK(s.res_u0 <= s.tol_u0);
    CHECK(s.res_u1 <= s.tol_u1);
  }

  // a single stage is a direct solve at eps0
  ModelParams m = b.m;
  m.epsilon = 0.2;
  EnergyFunctional e(b.disc, m, make_cutoff(b.s));
  const ContinuationResult one = run_continuation(b.disc, b.m, b.s, ContinuationSchedule{{0.2}});
  CHECK(residual_sup(*b.disc->grid, residual_eps(e, one.u0).values()) <= e.tolerance());
  CHECK(energy_eps(e, one.u0) == doctest::Approx(r.stages.front().E_eps_u0).epsilon(1e-10));
}

TEST_CASE("failures carry the stage index") {
  Bench b = bench(64, 1.0);
  try {
    run_continuation(b.disc, b.m, b.s, ContinuationSchedule::geometric(0.2, 1));
    FAIL("expected a solver failure");
  } catch (const GeometryFailure& e) {
    CHECK(std::string(e.what()).find("stage 0 (eps=") != std::string::npos);
  }
}
