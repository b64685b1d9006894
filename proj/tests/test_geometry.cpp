#include <cmath>
#include <random>

#include "doctest.h"

#include "carnot_fbp/errors.hpp"
#include "carnot_fbp/geometry.hpp"

using namespace cfbp;

TEST_CASE("dilation examples") {
  const auto h = GroupModel::heisenberg();
  const Point x{1, 1, 1};
  CHECK(h.dilate(x, 2.0) == Point{2, 2, 4});
  CHECK(h.dilate(x, 1.0) == x);
  const auto e2 = GroupModel::euclidean(2);
  CHECK(e2.dilate(Point{1, -2}, 3.0) == Point{3, -6});
  CHECK_THROWS_AS(e2.dilate(Point{1, 2, 3}, 2.0), InvalidArgument);
  CHECK_THROWS_AS(e2.dilate(Point{1, 2}, 0.0), InvalidArgument);
}

TEST_CASE("homogeneous dimension") {
  CHECK(GroupModel::euclidean(2).homogeneous_dimension() == 2);
  CHECK(GroupModel::euclidean(3).homogeneous_dimension() == 3);
  CHECK(GroupModel::heisenberg().homogeneous_dimension() == 4);
  CHECK(GroupModel::heisenberg().num_generators() == 2);
  CHECK(GroupModel::heisenberg().ambient_dim() == 3);
}

TEST_CASE("frame coefficients") {
  const auto h = GroupModel::heisenberg();
  auto f0 = h.frame_at(Point{0, 0, 0});
  CHECK(f0[0] == Point{1, 0, 0});
  CHECK(f0[1] == Point{0, 1, 0});
  auto f1 = h.frame_at(Point{1, 2, 5});
  CHECK(f1[0] == Point{1, 0, 4});
  CHECK(f1[1] == Point{0, 1, -2});
  auto fe = GroupModel::euclidean(2).frame_at(Point{0.3, -7});
  CHECK(fe[0] == Point{1, 0});
  CHECK(fe[1] == Point{0, 1});
}

TEST_CASE("dilation is a homomorphism of the multiplicative group") {
  const auto h = GroupModel::heisenberg();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ux(-3, 3), ud(0.1, 4);
  for (int k = 0; k < 200; ++k) {
    Point x{ux(rng), ux(rng), ux(rng)};
    const double a = ud(rng), b = ud(rng);
    const Point lhs = h.dilate(h.dilate(x, a), b);
    const Point rhs = h.dilate(x, a * b);
    for (int i = 0; i < 3; ++i) CHECK(std::abs(lhs[i] - rhs[i]) <= 1e-12 * std::max(1.0, std::abs(rhs[i])));
  }
}

TEST_CASE("frame matches analytic derivatives to second order") {
  const auto h = GroupModel::heisenberg();
  auto f = [](const Point& x) { return x[0] * x[0] * x[2] + x[1] * x[2] * x[2] + std::sin(x[0] * x[1]); };
  const Point x{0.3, -0.4, 0.7};
  // Z1 f = f_1 + 2 x2 f_3, Z2 f = f_2 - 2 x1 f_3
  const double f1 = 2 * x[0] * x[2] + std::cos(x[0] * x[1]) * x[1];
  const double f2 = x[2] * x[2] + std::cos(x[0] * x[1]) * x[0];
  const double f3 = x[0] * x[0] + 2 * x[1] * x[2];
  const double exact[2] = {f1 + 2 * x[1] * f3, f2 - 2 * x[0] * f3};
  const auto frame = h.frame_at(x);
  for (int i = 0; i < 2; ++i) {
    double err[2];
    for (int k = 0; k < 2; ++k) {
      const double step = k == 0 ? 1e-2 : 5e-3;
      Point xp = x, xm = x;
      for (int a = 0; a < 3; ++a) {
        xp[a] += step * frame[i][a];
        xm[a] -= step * frame[i][a];
      }
      err[k] = std::abs((f(xp) - f(xm)) / (2 * step) - exact[i]);
    }
    CHECK(err[0] < 1e-3);
    CHECK(err[0] / err[1] > 3.5);
  }
}

TEST_CASE("grid weights and masks") {
  Grid g({0, 0, 0}, {1, 1, 1}, {9, 9, 9});
  CHECK(std::abs(g.haar_weights().sum() - 1.0) <= 1e-12);
  std::vector<unsigned char> full(g.num_nodes(), 1), none(g.num_nodes(), 0);
  CHECK(std::abs(haar_measure_of(g, full) - 1.0) <= 1e-12);
  CHECK(haar_measure_of(g, none) == 0.0);
  for (std::size_t n = 0; n < g.num_nodes(); ++n) {
    const auto idx = g.multi_index(n);
    const bool bnd = idx[0] == 0 || idx[0] == 8 || idx[1] == 0 || idx[1] == 8 || idx[2] == 0 || idx[2] == 8;
    CHECK(g.is_interior(n) == !bnd);
    CHECK(g.node_index(idx) == n);
  }
  CHECK(g.num_dofs() == 7 * 7 * 7);

  Grid g2({0, 0}, {1, 1}, {33, 33});
  std::vector<unsigned char> half(g2.num_nodes(), 0);
  for (std::size_t n = 0; n < g2.num_nodes(); ++n) half[n] = g2.coord(n, 0) < 0.5;
  CHECK(std::abs(haar_measure_of(g2, half) - 0.5) <= g2.spacing(0));

  Grid box({-1, 2}, {3, 5}, {5, 7});
  CHECK(std::abs(box.haar_weights().sum() - 12.0) <= 1e-12 * 12.0);
  CHECK_THROWS_AS(Grid({0}, {1, 1}, {4}), InvalidArgument);
  CHECK_THROWS_AS(Grid({0}, {0}, {4}), InvalidArgument);
}

TEST_CASE("Haar measure scales with the homogeneous dimension") {
  for (GroupKind kind : {GroupKind::heis1, GroupKind::euclid2}) {
    const auto model = GroupModel::from_kind(kind);
    const int d = model.ambient_dim();
    Point lo(d, 0.0), hi(d, 1.0);
    Grid grid(lo, hi, std::vector<int>(d, 65));
    Point mhi = d == 3 ? Point{0.4, 0.4, 0.25} : Point{0.4, 0.45};
    const double dil = 2.0;
    const Point thi = model.dilate(mhi, dil);
    std::vector<unsigned char> m1(grid.num_nodes()), m2(grid.num_nodes());
    for (std::size_t n = 0; n < grid.num_nodes(); ++n) {
      bool in1 = true, in2 = true;
      for (int a = 0; a < d; ++a) {
        in1 = in1 && grid.coord(n, a) <= mhi[a] + 1e-12;
        in2 = in2 && grid.coord(n, a) <= thi[a] + 1e-12;
      }
      m1[n] = in1;
      m2[n] = in2;
    }
    const double ratio = haar_measure_of(grid, m2) / haar_measure_of(grid, m1);
    const double expect = std::pow(dil, model.homogeneous_dimension());
    CHECK(std::abs(ratio / expect - 1.0) < 0.02);
  }
}

TEST_CASE("cells and dirichlet fields") {
  auto g = std::make_shared<const Grid>(Point{0, 0}, Point{1, 2}, std::vector<int>{4, 5});
  CHECK(g->num_cells() == 12);
  // last cell: base at (2,3); vertex 3 = (+1,+1)
  CHECK(g->cell_vertex(11, 3) == g->node_index({3, 4, 0}));
  CHECK(g->cell_vertex(11, 1) == g->node_index({3, 3, 0}));
  auto f = ScalarField::from_function(g, [](const double* x) { return 1.0 + x[0] + x[1]; });
  CHECK(!f.satisfies_dirichlet());
  f.apply_dirichlet();
  CHECK(f.satisfies_dirichlet());
  CHECK(f.all_finite());
  CHECK(std::abs(g->distance_to_boundary(g->node_index({1, 2, 0})) - 1.0 / 3.0) < 1e-14);
}
