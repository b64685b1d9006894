#include <cmath>

#include "doctest.h"

#include "carnot_fbp/errors.hpp"
#include "carnot_fbp/model.hpp"
#include "carnot_fbp/oracle.hpp"

using namespace cfbp;

TEST_CASE("singular shooting: parabola limit, symmetry, pinned value") {
  const Profile p = shoot_singular(1.0, 1e-6, 2000);
  CHECK(std::abs(p.max_value() - 0.125) < 1e-4);
  for (double x : {0.1, 0.23, 0.4}) CHECK(std::abs(p(x) - p(1.0 - x)) < 1e-8);

  const Profile a = shoot_singular(1.0, 0.5, 2000);
  const Profile b = shoot_singular(1.0, 0.5, 4000);
  // step halving moves the result by less than 1e-6 relative
  CHECK(std::abs(a.max_value() - b.max_value()) <= 1e-6 * b.max_value());
  CHECK(b.max_value() == doctest::Approx(0.270421794433).epsilon(1e-6));
  for (double x : {0.05, 0.2, 0.35}) CHECK(std::abs(a(x) - b(x)) <= 1e-6 * b.max_value());
}

TEST_CASE("singular shooting rejects bad input") {
  CHECK_THROWS_AS(shoot_singular(-1.0, 0.5, 2000), InvalidArgument);
  CHECK_THROWS_AS(shoot_singular(1.0, 1.5, 2000), InvalidArgument);
}

TEST_CASE("free boundary shooting") {
  ModelParams m;
  m.lambda = 47.0;
  m.beta = 0.05;
  m.delta = 0.5;
  const FreeBoundaryPair fb = shoot_free_boundary(m, 2000);
  for (const FreeBoundaryShot* s : {&fb.u0, &fb.u1}) {
    CHECK(s->jump_residual <= 1e-8);
    CHECK(std::abs(s->slope_inner * s->slope_inner - s->slope_outer * s->slope_outer - 2.0) <= 1e-8);
    CHECK(std::abs(s->profile(s->crossing) - 1.0) < 1e-8);
  }
  // u1 <= u0 pointwise, smaller positive set
  for (int i = 1; i < 100; ++i) {
    const double x = i / 100.0;
    CHECK(fb.u1.profile(x) <= fb.u0.profile(x) + 1e-9);
    CHECK(fb.u1.profile(x) > 0.0);
  }
  CHECK(fb.u0.crossing < fb.u1.crossing);

  // E(u0) < -L < E(u1) with the model energy on the sampled profiles
  auto disc = make_discretization(GroupKind::euclid1, {0.0}, {1.0}, {2049});
  const double E0 = energy_exact(*disc, m, fb.u0.profile.sample(*disc->grid));
  const double E1 = energy_exact(*disc, m, fb.u1.profile.sample(*disc->grid));
  CHECK(E0 < -1.0);
  CHECK(E1 > -1.0);

  // step halving
  const FreeBoundaryPair fb2 = shoot_free_boundary(m, 4000);
  CHECK(std::abs(fb2.u0.crossing - fb.u0.crossing) < 1e-6);
  CHECK(std::abs(fb2.u1.crossing - fb.u1.crossing) < 1e-6);
}

TEST_CASE("free boundary shooting below the threshold") {
  ModelParams m;
  m.lambda = 1.0;
  m.beta = 0.05;
  CHECK_THROWS_AS(shoot_free_boundary(m, 2000), GeometryFailure);
}

TEST_CASE("dense scans") {
  CHECK(dense_integral(eval_mollifier, 0.0, 1.0, 100000) == doctest::Approx(1.0).epsilon(1e-10));
  const ScanResult mn = dense_scan_min([](const std::vector<double>& x) { return (x[0] - 0.3) * (x[0] - 0.3) + x[1]; },
                                       {{0.0, 1.0, 101}, {1.0, 2.0, 11}});
  CHECK(mn.arg[0] == doctest::Approx(0.3));
  CHECK(mn.arg[1] == doctest::Approx(1.0));
  const ScanResult mx = dense_scan_max([](const std::vector<double>& x) { return -std::abs(x[0] - 10.0); },
                                       {{1.0, 100.0, 3, true}});
  CHECK(mx.arg[0] == doctest::Approx(10.0));
  CHECK(dense_scan_threshold([](double t) { return t <= 0.42; }, {0.0, 1.0, 101}) == doctest::Approx(0.42));
  CHECK(std::isnan(dense_scan_threshold([](double) { return false; }, {0.0, 1.0, 11})));
}
