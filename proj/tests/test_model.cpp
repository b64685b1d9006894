#include <cmath>
#include <random>

#include "doctest.h"

#include "carnot_fbp/bulk_quadrature.hpp"
#include "carnot_fbp/errors.hpp"
#include "carnot_fbp/model.hpp"

using namespace cfbp;

namespace {

// Composite Simpson on [a, b].
template <class F>
double simpson(F f, double a, double b, int n = 20000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

std::shared_ptr<const CutoffContext> flat_ctx(const Grid& g, double ub, double delta) {
  auto ctx = std::make_shared<CutoffContext>();
  ctx->delta = delta;
  ctx->u_beta = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(g.num_nodes()), ub);
  return ctx;
}

}  // namespace

TEST_CASE("mollifier pair") {
  CHECK(eval_B(-3.0) == 0.0);
  CHECK(eval_B(2.0) == 1.0);
  CHECK(eval_B(0.5) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(eval_mollifier(0.5) == doctest::Approx(1.875).epsilon(1e-15));
  double prev = -1.0;
  for (int i = 0; i <= 10000; ++i) {
    const double s = -0.5 + 2.0 * i / 10000;
    CHECK(eval_B(s) >= prev);
    prev = eval_B(s);
    CHECK(eval_mollifier(s) >= 0.0);
    CHECK(eval_mollifier(s) <= 2.0);
  }
  CHECK(std::abs(simpson(eval_mollifier, 0.0, 1.0) - 1.0) <= 1e-10);
  CHECK(std::abs(simpson(eval_B, 0.0, 1.0) - 0.5) <= 1e-10);
  for (double s : {0.1, 0.37, 0.9, 1.0, 2.5})
    CHECK(std::abs(B_integral(s) - simpson(eval_B, 0.0, s)) <= 1e-10);
  for (double s : {0.1, 0.4, 0.77}) {
    const double fd = (eval_mollifier(s + 1e-6) - eval_mollifier(s - 1e-6)) / 2e-6;
    CHECK(eval_mollifier_derivative(s) == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("nonlinearity and its regularization") {
  ModelParams m;
  m.epsilon = 0.2;
  CHECK(g_eps(m, 0.0) == 0.0);
  CHECK(G_eps(m, 0.0) == 0.0);
  CHECK(G_eps(m, 1.0) == doctest::Approx(1.0 - 0.1).epsilon(1e-14));
  CHECK_THROWS_AS(g_eval(m, -1.0), InvalidArgument);
  for (GKind kind : {GKind::constant_one, GKind::power, GKind::affine_power}) {
    m.g_kind = kind;
    for (double s : {0.05, 0.2, 0.33, 3.0}) {
      const double q = simpson([&](double t) { return g_eps(m, t); }, 0.0, s);
      CHECK(std::abs(G_eps(m, s) - q) <= 1e-9);
      const double fd = (g_eps(m, s + 1e-7) - g_eps(m, s - 1e-7)) / 2e-7;
      CHECK(g_eps_derivative(m, s) == doctest::Approx(fd).epsilon(1e-5));
    }
  }
  m.g_kind = GKind::power;
  CHECK(g_eps(m, 50.0) == doctest::Approx(std::pow(50.0, m.p - 1)).epsilon(1e-14));
}

TEST_CASE("cutoff phi_beta") {
  Grid g({0}, {1}, {5});
  CutoffContext ctx{nullptr, Eigen::VectorXd::Constant(5, 1.0), 0.5};
  CHECK(phi_beta(ctx, 2, 4.0) == doctest::Approx(0.5));
  CHECK(phi_beta(ctx, 2, 0.3) == doctest::Approx(1.0));
  CHECK(std::abs(phi_beta(ctx, 2, 1.0 + 1e-9) - phi_beta(ctx, 2, 1.0 - 1e-9)) <= 1e-6);
  ctx.u_beta.setConstant(0.3);
  for (double u : {0.1, 0.3, 0.8, 2.0}) {
    const double q = simpson([&](double t) { return phi_beta(ctx, 1, t); }, 0.0, u, 200000);
    CHECK(Phi_beta(ctx, 1, u) == doctest::Approx(q).epsilon(1e-8));
  }
}

TEST_CASE("parameter validation") {
  ModelParams m;
  CHECK_NOTHROW(m.validate());
  m.delta = 1.5;
  CHECK_THROWS_AS(m.validate(), InvalidArgument);
  m.delta = 0.5;
  m.p = 2.5;
  CHECK_THROWS_AS(m.validate(), InvalidArgument);
}

TEST_CASE("line integrals match brute force quadrature") {
  ModelParams m;
  m.lambda = 3.0;
  m.epsilon = 0.05;
  for (GKind kind : {GKind::constant_one, GKind::power}) {
    m.g_kind = kind;
    for (auto [ua, ub] : std::vector<std::pair<double, double>>{{0.9, 1.2}, {1.03, 1.01}, {0.5, 0.99}, {1.3, 2.0}}) {
      auto li = integrate_line(m, ua, ub, nullptr, true);
      auto u = [&](double t) { return ua + (ub - ua) * t; };
      CHECK(std::abs(li.I - simpson([&](double t) { return bulk_density(m, u(t)).f; }, 0, 1, 200000)) < 1e-9);
      CHECK(std::abs(li.J1 - simpson([&](double t) { return bulk_density(m, u(t)).f1 * t; }, 0, 1, 200000)) < 1e-7);
      // capped at a linear cap
      const double cap[2] = {1.02, 1.25};
      auto lc = integrate_line(m, ua, ub, cap, false);
      auto capped = [&](double t) {
        const double c = cap[0] + (cap[1] - cap[0]) * t;
        const double x = u(t);
        if (x <= c) return bulk_density(m, x).f;
        const auto b = bulk_density(m, c);
        return b.f + b.f1 * (x - c);
      };
      CHECK(std::abs(lc.I - simpson(capped, 0, 1, 200000)) < 1e-7);  // Simpson across kinks
    }
  }
}

TEST_CASE("energy and residual") {
  for (GroupKind kind : {GroupKind::euclid1, GroupKind::euclid2, GroupKind::heis1}) {
    const int d = kind == GroupKind::euclid1 ? 1 : (kind == GroupKind::euclid2 ? 2 : 3);
    const int n = d == 1 ? 65 : (d == 2 ? 17 : 9);
    auto disc = make_discretization(kind, Point(d, 0.0), Point(d, 1.0), std::vector<int>(d, n));
    const Grid& g = *disc->grid;
    std::mt19937_64 rng(5 + d);
    std::uniform_real_distribution<double> ur(0, 1);
    for (double eps : {0.2, 0.05, 0.01}) {
      ModelParams m;
      m.lambda = 4.0;
      m.beta = 0.2;
      m.epsilon = eps;
      auto ctx = flat_ctx(g, 0.05, m.delta);
      EnergyFunctional e(disc, m, ctx);
      EnergyFunctional et(disc, m, ctx, Eigen::VectorXd::Constant(g.num_nodes(), 1.4));

      Eigen::VectorXd zero = Eigen::VectorXd::Zero(g.num_nodes());
      CHECK(e.energy(zero) == 0.0);
      // u = 0, lambda = 0: residual = -W beta u_beta^{-delta}
      ModelParams m0 = m;
      m0.lambda = 0.0;
      EnergyFunctional e0(disc, m0, ctx);
      Eigen::VectorXd r0 = e0.gradient(zero);
      for (std::size_t k = 0; k < g.num_nodes(); ++k) {
        const double expect = g.is_interior(k) ? -g.weight(k) * m.beta * std::pow(0.05, -m.delta) : 0.0;
        CHECK(r0[k] == doctest::Approx(expect).epsilon(1e-13));
      }

      for (int probe = 0; probe < 6; ++probe) {
        Eigen::VectorXd u(g.num_nodes()), v(g.num_nodes());
        for (std::size_t k = 0; k < g.num_nodes(); ++k) {
          u[k] = g.is_interior(k) ? 1.6 * ur(rng) : 0.0;
          v[k] = g.is_interior(k) ? ur(rng) - 0.5 : 0.0;
        }
        for (const EnergyFunctional* f : {&e, &et}) {
          const double t = 1e-5;
          const double fd = (f->energy(u + t * v) - f->energy(u - t * v)) / (2 * t);
          const double an = f->gradient(u).dot(v);
          CHECK(std::abs(fd - an) <= 1e-6 * std::max(1.0, std::abs(an)));
          // Hessian against differences of the gradient
          const double t2 = 1e-6;
          Eigen::VectorXd gd = (f->gradient(u + t2 * v) - f->gradient(u - t2 * v)) / (2 * t2);
          Eigen::VectorXd hv = disc->op.prolong(f->hessian(u) * disc->op.restrict_to_dofs(v));
          CHECK((gd - hv).norm() <= 1e-4 * std::max(1.0, hv.norm()));
        }
      }
    }
  }
}

TEST_CASE("energy comparisons") {
  auto disc = make_discretization(GroupKind::euclid1, {0}, {1}, {129});
  const Grid& g = *disc->grid;
  ModelParams m;
  m.lambda = 0.0;
  m.beta = 0.0;
  m.epsilon = 0.05;
  auto ctx = flat_ctx(g, 0.05, m.delta);
  EnergyFunctional e(disc, m, ctx);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> ur(0, 2);
  for (int k = 0; k < 10; ++k) {
    Eigen::VectorXd u(g.num_nodes());
    for (std::size_t i = 0; i < g.num_nodes(); ++i) u[i] = g.is_interior(i) ? ur(rng) : 0.0;
    CHECK(e.energy(u) >= 0.0);
  }

  // Exact energy of u = 1/2 in the interior: gradient only in the two boundary cells.
  ModelParams mb;
  mb.beta = 0.3;
  Eigen::VectorXd half = Eigen::VectorXd::Constant(g.num_nodes(), 0.5);
  half[0] = half[g.num_nodes() - 1] = 0.0;
  const double h = g.spacing(0);
  const double expect = 0.5 * 2 * (0.25 / h) - mb.beta / (1 - mb.delta) * std::sqrt(0.5) * (1.0 - h);
  CHECK(energy_exact(*disc, mb, half) == doctest::Approx(expect).epsilon(1e-12));

  // Bulk of constant fields above 1 + eps is nonincreasing in the level.
  ModelParams mc;
  mc.lambda = 2.0;
  mc.epsilon = 0.05;
  mc.beta = 0.0;
  EnergyFunctional ec(disc, mc, ctx);
  double prev = 1e300;
  for (double level : {1.1, 1.3, 1.8, 2.5}) {
    Eigen::VectorXd c = Eigen::VectorXd::Constant(g.num_nodes(), level);
    const double bulk = ec.energy(c) - 0.5 * disc->op.quadratic_form(c);
    CHECK(bulk <= prev);
    prev = bulk;
  }
}

TEST_CASE("regularized and exact energies differ by the expected amounts") {
  auto disc = make_discretization(GroupKind::euclid1, {0}, {1}, {257});
  const Grid& g = *disc->grid;
  ModelParams m;
  m.lambda = 5.0;
  m.beta = 0.1;
  m.epsilon = 0.02;
  auto ctx = flat_ctx(g, 0.05, m.delta);
  EnergyFunctional e(disc, m, ctx);
  Eigen::VectorXd u(g.num_nodes());
  for (std::size_t k = 0; k < g.num_nodes(); ++k) {
    const double x = g.coord(k, 0);
    u[k] = 6.0 * x * (1 - x);
  }
  // E_eps - E = [B - chi] - lambda [G_eps - G] - beta [Phi_beta - Phi] with
  // G_eps <= G and Phi_beta = Phi - delta/(1-delta) u_beta^{1-delta} above u_beta.
  double band = 0.0, cbeta = 0.0;
  for (std::size_t k = 0; k < g.num_nodes(); ++k) {
    if (!g.is_interior(k)) continue;
    if (std::abs(u[k] - 1.0) <= m.epsilon + 2 * g.spacing(0) * 6) band += g.weight(k);
    cbeta += g.weight(k) * m.beta * m.delta / (1 - m.delta) * std::sqrt(0.05);
  }
  const double diff = e.energy(u) - energy_exact(*disc, m, u);
  const double vol = 1.0;
  CHECK(diff >= -band);
  CHECK(diff <= m.lambda * (m.a0 * m.epsilon + m.a1 * std::pow(m.epsilon, m.p) / m.p) * vol + band + cbeta);
}
