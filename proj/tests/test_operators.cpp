#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "doctest.h"

#include "carnot_fbp/errors.hpp"
#include "carnot_fbp/linear_solver.hpp"
#include "carnot_fbp/operators.hpp"

using namespace cfbp;

namespace {

std::shared_ptr<const Grid> unit_grid(int d, int n) {
  return std::make_shared<const Grid>(Point(d, 0.0), Point(d, 1.0), std::vector<int>(d, n));
}

Eigen::VectorXd random_interior(const Grid& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1, 1);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(g.num_nodes()));
  for (std::size_t n = 0; n < g.num_nodes(); ++n)
    if (g.is_interior(n)) v[static_cast<Eigen::Index>(n)] = u(rng);
  return v;
}

}  // namespace

TEST_CASE("horizontal gradient examples") {
  auto g2 = unit_grid(2, 9);
  auto u = ScalarField::from_function(g2, [](const double* x) { return x[0]; });
  auto hg = horizontal_gradient(GroupModel::euclidean(2), u);
  for (std::size_t n = 0; n < g2->num_nodes(); ++n) {
    CHECK(hg.values(n, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(hg.values(n, 1)) < 1e-12);
  }
  auto g3 = unit_grid(3, 7);
  auto x3 = ScalarField::from_function(g3, [](const double* x) { return x[2]; });
  auto hh = horizontal_gradient(GroupModel::heisenberg(), x3);
  for (std::size_t n = 0; n < g3->num_nodes(); ++n) {
    CHECK(std::abs(hh.values(n, 0) - 2 * g3->coord(n, 1)) < 1e-12);
    CHECK(std::abs(hh.values(n, 1) + 2 * g3->coord(n, 0)) < 1e-12);
  }
  auto c = ScalarField::from_function(g3, [](const double*) { return 4.2; });
  CHECK(horizontal_gradient(GroupModel::heisenberg(), c).values.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("1-D operator is the standard tridiagonal stencil") {
  auto g = unit_grid(1, 11);
  DiscreteOperator op(GroupModel::euclidean(1), g);
  const double h = g->spacing(0);
  const auto& a = op.interior();
  CHECK(a.rows() == 9);
  for (int i = 0; i < 9; ++i) {
    CHECK(a.coeff(i, i) == doctest::Approx(2.0 / h).epsilon(1e-13));
    if (i + 1 < 9) CHECK(a.coeff(i, i + 1) == doctest::Approx(-1.0 / h).epsilon(1e-13));
    if (i + 2 < 9) CHECK(a.coeff(i, i + 2) == 0.0);
  }
}

TEST_CASE("consistency on smooth fields") {
  // Euclidean: u = x1^2, -Lu = -2.
  auto g = unit_grid(2, 17);
  DiscreteOperator op(GroupModel::euclidean(2), g);
  auto u = ScalarField::from_function(g, [](const double* x) { return x[0] * x[0]; });
  Eigen::VectorXd ku = op.apply_full(u.values());
  for (std::size_t n = 0; n < g->num_nodes(); ++n)
    if (g->is_interior(n)) CHECK(ku[n] / g->weight(n) == doctest::Approx(-2.0).epsilon(1e-9));

  // H^1: x3 is L-harmonic.
  auto g3 = unit_grid(3, 9);
  DiscreteOperator oh(GroupModel::heisenberg(), g3);
  auto x3 = ScalarField::from_function(g3, [](const double* x) { return x[2]; });
  Eigen::VectorXd kx = oh.apply_full(x3.values());
  for (std::size_t n = 0; n < g3->num_nodes(); ++n)
    if (g3->is_interior(n)) CHECK(std::abs(kx[n] / g3->weight(n)) < 1e-9);

  // matrix-free agrees with the assembled matrix
  auto q = ScalarField::from_function(g3, [](const double* x) { return x[2] * x[2] + x[0] * x[1]; });
  Eigen::VectorXd k1 = oh.apply_full(q.values());
  Eigen::VectorXd k2 = apply_sub_laplacian_matrix_free(oh.group(), *g3, q.values());
  CHECK((k1 - k2).cwiseAbs().maxCoeff() < 1e-12 * k1.cwiseAbs().maxCoeff());
}

TEST_CASE("H^1 consistency improves under refinement") {
  double prev = 0.0;
  for (int n : {9, 17, 33}) {
    auto g = unit_grid(3, n);
    auto model = GroupModel::heisenberg();
    auto u = ScalarField::from_function(g, [](const double* x) { return x[2] * x[2]; });
    Eigen::VectorXd ku = apply_sub_laplacian_matrix_free(model, *g, u.values());
    double err = 0.0;
    for (std::size_t k = 0; k < g->num_nodes(); ++k) {
      if (!g->is_interior(k)) continue;
      const double x1 = g->coord(k, 0), x2 = g->coord(k, 1);
      err = std::max(err, std::abs(ku[k] / g->weight(k) + 8 * (x1 * x1 + x2 * x2)));
    }
    if (prev > 0.0) CHECK(std::log2(prev / err) >= 0.9);
    prev = err;
  }
}

TEST_CASE("summation by parts, symmetry, positivity") {
  std::mt19937_64 rng(11);
  for (GroupKind kind : {GroupKind::euclid1, GroupKind::euclid2, GroupKind::heis1}) {
    const auto model = GroupModel::from_kind(kind);
    const int d = model.ambient_dim();
    auto g = unit_grid(d, d == 1 ? 40 : (d == 2 ? 14 : 8));
    DiscreteOperator op(model, g);
    for (int k = 0; k < 100; ++k) {
      Eigen::VectorXd u = random_interior(*g, rng), v = random_interior(*g, rng);
      const double lhs = v.dot(op.apply_full(u));
      const double rhs = gauss_point_inner_product(model, *g, u, v);
      CHECK(std::abs(lhs - rhs) <= 1e-11 * u.norm() * v.norm());
    }
    SparseMatrix at = op.full().transpose();
    CHECK((op.full() - at).norm() == 0.0);
    Eigen::MatrixXd dense(op.interior());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense);
    CHECK(es.eigenvalues().minCoeff() > 0.0);
  }
}

TEST_CASE("maximum principle spot check") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> uf(0, 1);
  for (GroupKind kind : {GroupKind::euclid1, GroupKind::euclid2}) {
    const auto model = GroupModel::from_kind(kind);
    const int d = model.ambient_dim();
    auto g = unit_grid(d, d == 1 ? 64 : 20);
    DiscreteOperator op(model, g);
    SpdSolver solver(op.interior(), d);
    for (int k = 0; k < 20; ++k) {
      Eigen::VectorXd f(static_cast<Eigen::Index>(g->num_dofs()));
      for (Eigen::Index i = 0; i < f.size(); ++i) f[i] = uf(rng);
      Eigen::VectorXd u = solver.solve(f);
      CHECK(u.minCoeff() >= 0.0);
    }
  }
}

TEST_CASE("norms") {
  auto g = unit_grid(1, 257);
  DiscreteOperator op(GroupModel::euclidean(1), g);
  auto zero = ScalarField(g);
  CHECK(h1_seminorm_sq(op, zero) == 0.0);
  CHECK(lp_norm(zero, 2.0) == 0.0);
  CHECK(sup_norm(zero) == 0.0);
  CHECK(lipschitz_estimate(op.group(), zero) == 0.0);
  const double pi = std::acos(-1.0);
  auto s = ScalarField::from_function(g, [pi](const double* x) { return std::sin(pi * x[0]); });
  CHECK(std::abs(h1_seminorm_sq(op, s) / (pi * pi / 2) - 1.0) < 5e-3);
  auto one = ScalarField::from_function(g, [](const double*) { return 1.0; });
  CHECK(std::abs(lp_norm(one, 3.0) - 1.0) < 1e-12);
  CHECK_THROWS_AS(lp_norm(one, 0.5), InvalidArgument);
  auto lin = ScalarField::from_function(g, [](const double* x) { return 3.0 * x[0]; });
  CHECK(lipschitz_estimate(op.group(), lin) == doctest::Approx(3.0).epsilon(1e-12));
}
