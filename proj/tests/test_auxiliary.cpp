#include <cmath>

#include "doctest.h"

#include "carnot_fbp/auxiliary.hpp"
#include "carnot_fbp/errors.hpp"
#include "carnot_fbp/oracle.hpp"

using namespace cfbp;

TEST_CASE("principal eigenpair") {
  auto d1 = make_discretization(GroupKind::euclid1, {0.0}, {1.0}, {512});
  const Eigenpair e = principal_eigenpair(*d1);
  CHECK(std::abs(e.lambda1 / (M_PI * M_PI) - 1.0) < 1e-3);
  CHECK(e.residual < 1e-8);
  CHECK(e.phi1.values().maxCoeff() == doctest::Approx(1.0));
  CHECK(e.phi1.values().minCoeff() >= 0.0);

  auto d2 = make_discretization(GroupKind::euclid2, {0.0, 0.0}, {1.0, 1.0}, {33, 33});
  CHECK(principal_eigenpair(*d2).lambda1 == doctest::Approx(2 * M_PI * M_PI).epsilon(5e-3));
}

TEST_CASE("singular solution against the shooting oracle") {
  auto disc = make_discretization(GroupKind::euclid1, {0.0}, {1.0}, {512});
  const SingularSolution s = solve_singular(*disc, 1.0, 0.5);
  const Profile p = shoot_singular(1.0, 0.5, 4000);
  const Eigen::VectorXd o = p.sample(*disc->grid);
  CHECK((s.u_beta.values() - o).cwiseAbs().maxCoeff() <= 1e-3);
  CHECK(s.residual_norm < 1e-8);
  for (std::size_t n = 0; n < s.u_beta.size(); ++n)
    if (disc->grid->is_interior(n)) CHECK(s.u_beta[n] > 0.0);
}

TEST_CASE("scaling law and parabola limit") {
  auto disc = make_discretization(GroupKind::euclid1, {0.0}, {1.0}, {512});
  const double delta = 0.5, beta = 0.3;
  const SingularSolution a = solve_singular(*disc, beta, delta);
  const SingularSolution b = solve_singular(*disc, std::pow(2.0, 1.0 + delta) * beta, delta);
  CHECK((b.u_beta.values() - 2.0 * a.u_beta.values()).cwiseAbs().maxCoeff() <= 1e-6);

  const SingularSolution c = solve_singular(*disc, 1.0, 1e-6);
  double err = 0.0;
  for (std::size_t n = 0; n < c.u_beta.size(); ++n) {
    const double x = disc->grid->coord(n, 0);
    err = std::max(err, std::abs(c.u_beta[n] - 0.5 * x * (1.0 - x)));
  }
  CHECK(err <= 1e-3);
}

TEST_CASE("singular solution on H^1") {
  auto disc = make_discretization(GroupKind::heis1, {0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}, {9, 9, 9});
  const SingularSolution s = solve_singular(*disc, 0.5, 0.5);
  CHECK(s.residual_norm < 1e-8);
  CHECK(s.u_beta.values().maxCoeff() > 0.0);
}

TEST_CASE("beta* estimate") {
  ModelParams m;
  m.lambda = 10.0;
  m.delta = 0.5;
  // g = 1: some t with beta t^-delta + lambda (t>1) <= lambda1 t exists for every beta
  CHECK(std::isinf(beta_star_estimate(m, M_PI * M_PI)));
  CHECK(beta_admissible(m, M_PI * M_PI, 0.05, 1e-6, 1e6, 2000));
  // threshold by scan agrees with the direct admissibility predicate
  const double lam1 = M_PI * M_PI;
  const double t_scan = dense_scan_threshold(
      [&](double b) { return beta_admissible(m, lam1, b, 1e-6, 1e6, 2000); }, {1e-3, 1e3, 61, true});
  CHECK(!std::isnan(t_scan));
}

TEST_CASE("barrier") {
  auto disc = make_discretization(GroupKind::euclid1, {0.0}, {1.0}, {256});
  ModelParams m;
  m.lambda = 47.0;
  m.beta = 0.05;
  const SingularSolution s = solve_singular(*disc, m.beta, m.delta);
  CHECK(growth_bound(m, 0.0) == doctest::Approx(m.a0));
  CHECK(growth_bound(m, 4.0) == doctest::Approx(m.a0 + m.a1 * 2.0));
  const ScalarField v0 = barrier_v0(*disc, m, s.u_beta, 1.0);
  CHECK(v0.values().minCoeff() >= 0.0);
  const double d0 = barrier_distance(v0);
  CHECK(d0 > 0.0);
  CHECK(d0 < 0.5);
  ScalarField small(disc->grid);
  CHECK(std::isinf(barrier_distance(small)));
}
