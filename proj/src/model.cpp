#include "carnot_fbp/model.hpp"

#include <algorithm>
#include <cmath>

#include "carnot_fbp/bulk_quadrature.hpp"
#include "carnot_fbp/errors.hpp"
#include "carnot_fbp/parallel.hpp"

namespace cfbp {

std::string to_string(GKind kind) {
  switch (kind) {
    case GKind::constant_one: return "constant_one";
    case GKind::power: return "power";
    case GKind::affine_power: return "affine_power";
  }
  return "unknown";
}

GKind g_kind_from_string(const std::string& name) {
  if (name == "constant_one") return GKind::constant_one;
  if (name == "power") return GKind::power;
  if (name == "affine_power") return GKind::affine_power;
  throw InvalidArgument("unknown g_kind '" + name + "' (expected constant_one, power or affine_power)");
}

void ModelParams::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw InvalidArgument("lambda must be a finite value >= 0");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw InvalidArgument("beta must be a finite value >= 0");
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("delta out of range: need 0<delta<1");
  if (!(p > 1.0 && p < 2.0)) throw InvalidArgument("p out of range: need 1<p<2");
  if (!(a0 >= 0.0) || !(a1 >= 0.0)) throw InvalidArgument("growth constants a0, a1 must be >= 0");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw InvalidArgument("epsilon must be > 0");
}

double ModelParams::scale() const noexcept { return 1.0 + lambda * (a0 + a1) + 2.0 / epsilon; }

double eval_B(double s) noexcept {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  return s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
}

double eval_mollifier(double s) noexcept {
  if (s <= 0.0 || s >= 1.0) return 0.0;
  const double t = s * (1.0 - s);
  return 30.0 * t * t;
}

double eval_mollifier_derivative(double s) noexcept {
  if (s <= 0.0 || s >= 1.0) return 0.0;
  return 60.0 * s * (1.0 - s) * (1.0 - 2.0 * s);
}

double B_integral(double s) noexcept {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 0.5 + (s - 1.0);
  const double s4 = s * s * s * s;
  return s4 * (2.5 + s * (-3.0 + s));
}

namespace {

void require_nonnegative(double s) {
  if (s < 0.0 || std::isnan(s)) throw InvalidArgument("g: argument must be >= 0");
}

// Integral over [0, s] of B(t / eps) t^q, q >= 0.
double smoothed_power_integral(double s, double eps, double q) {
  const double c[3] = {10.0, -15.0, 6.0};
  const double r = std::min(s, eps);
  const double z = r / eps;
  const double rq = q == 0.0 ? r : std::pow(r, q + 1.0);
  double poly = 0.0, zk = z * z * z;
  for (int k = 3; k <= 5; ++k, zk *= z) poly += c[k - 3] * zk / (k + q + 1.0);
  double total = rq * poly;
  if (s > eps) total += q == 0.0 ? s - eps : (std::pow(s, q + 1.0) - rq) / (q + 1.0);
  return total;
}

}  // namespace

double g_eval(const ModelParams& m, double s) {
  require_nonnegative(s);
  switch (m.g_kind) {
    case GKind::constant_one: return 1.0;
    case GKind::power: return std::pow(s, m.p - 1.0);
    case GKind::affine_power: return m.a0 + m.a1 * std::pow(s, m.p - 1.0);
  }
  return 0.0;
}

double g_derivative(const ModelParams& m, double s) {
  require_nonnegative(s);
  if (m.g_kind == GKind::constant_one || s == 0.0) return 0.0;
  const double d = (m.p - 1.0) * std::pow(s, m.p - 2.0);
  return m.g_kind == GKind::power ? d : m.a1 * d;
}

double g_eps(const ModelParams& m, double s) {
  require_nonnegative(s);
  return eval_B(s / m.epsilon) * g_eval(m, s);
}

double g_eps_derivative(const ModelParams& m, double s) {
  require_nonnegative(s);
  if (s == 0.0) return 0.0;
  return eval_mollifier(s / m.epsilon) / m.epsilon * g_eval(m, s) + eval_B(s / m.epsilon) * g_derivative(m, s);
}

double G_eps(const ModelParams& m, double s) {
  require_nonnegative(s);
  const double e = m.epsilon;
  switch (m.g_kind) {
    case GKind::constant_one: return smoothed_power_integral(s, e, 0.0);
    case GKind::power: return smoothed_power_integral(s, e, m.p - 1.0);
    case GKind::affine_power:
      return m.a0 * smoothed_power_integral(s, e, 0.0) + m.a1 * smoothed_power_integral(s, e, m.p - 1.0);
  }
  return 0.0;
}

double G_exact(const ModelParams& m, double s) {
  require_nonnegative(s);
  switch (m.g_kind) {
    case GKind::constant_one: return s;
    case GKind::power: return std::pow(s, m.p) / m.p;
    case GKind::affine_power: return m.a0 * s + m.a1 * std::pow(s, m.p) / m.p;
  }
  return 0.0;
}

BulkValue bulk_density(const ModelParams& m, double u) {
  if (u <= 1.0) return {0.0, 0.0, 0.0};
  const double e = m.epsilon;
  const double s = u - 1.0;
  const double z = s / e;
  BulkValue b;
  b.f = eval_B(z) - m.lambda * G_eps(m, s);
  b.f1 = eval_mollifier(z) / e - m.lambda * g_eps(m, s);
  b.f2 = eval_mollifier_derivative(z) / (e * e) - m.lambda * g_eps_derivative(m, s);
  return b;
}

double phi_beta(const CutoffContext& ctx, std::size_t node, double u) {
  const double ub = ctx.u_beta[static_cast<Eigen::Index>(node)];
  return u > ub ? std::pow(u, -ctx.delta) : std::pow(ub, -ctx.delta);
}

double phi_beta_derivative(const CutoffContext& ctx, std::size_t node, double u) {
  const double ub = ctx.u_beta[static_cast<Eigen::Index>(node)];
  return u > ub ? -ctx.delta * std::pow(u, -ctx.delta - 1.0) : 0.0;
}

double Phi_beta(const CutoffContext& ctx, std::size_t node, double u) {
  const double ub = ctx.u_beta[static_cast<Eigen::Index>(node)];
  const double d = ctx.delta;
  if (u <= ub) return u * std::pow(ub, -d);
  const double ub1 = std::pow(ub, 1.0 - d);
  return ub1 + (std::pow(u, 1.0 - d) - ub1) / (1.0 - d);
}

// ---------------------------------------------------------------------------

EnergyFunctional::EnergyFunctional(DiscretizationPtr disc, ModelParams params,
                                   std::shared_ptr<const CutoffContext> ctx, std::optional<Eigen::VectorXd> cap)
    : disc_(std::move(disc)), params_(params), ctx_(std::move(ctx)), cap_(std::move(cap)) {
  params_.validate();
  if (!ctx_ || static_cast<std::size_t>(ctx_->u_beta.size()) != disc_->grid->num_nodes())
    throw InvalidArgument("energy: cutoff context does not match the grid");
  if (cap_ && static_cast<std::size_t>(cap_->size()) != disc_->grid->num_nodes())
    throw InvalidArgument("energy: cap field does not match the grid");
  tol_ = 1e-7 * params_.scale();
}

namespace {

// Lumped singular term -beta sum w Phi_beta(u) over interior nodes, with
// optional gradient accumulation.
double singular_term(const Grid& grid, const ModelParams& m, const CutoffContext& ctx, const Eigen::VectorXd& u,
                     Eigen::VectorXd* grad) {
  if (m.beta == 0.0) return 0.0;
  const int chunks = reduction_chunks();
  std::vector<double> partial(static_cast<std::size_t>(chunks), 0.0);
  parallel_chunks(grid.num_nodes(), [&](int chunk, std::size_t b, std::size_t e) {
    double acc = 0.0;
    for (std::size_t n = b; n < e; ++n) {
      if (!grid.is_interior(n)) continue;
      const double w = grid.weight(n);
      const double un = u[static_cast<Eigen::Index>(n)];
      acc -= m.beta * w * Phi_beta(ctx, n, un);
      if (grad) (*grad)[static_cast<Eigen::Index>(n)] -= m.beta * w * phi_beta(ctx, n, un);
    }
    partial[static_cast<std::size_t>(chunk)] = acc;
  });
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

}  // namespace

double EnergyFunctional::energy(const Eigen::VectorXd& u) const {
  const Grid& grid = *disc_->grid;
  const double grad_part = 0.5 * disc_->op.quadratic_form(u);
  const double bulk = bulk_integral(grid, params_, u, cap(), nullptr, nullptr);
  return grad_part + bulk + singular_term(grid, params_, *ctx_, u, nullptr);
}

double EnergyFunctional::energy_and_gradient(const Eigen::VectorXd& u, Eigen::VectorXd& grad) const {
  const Grid& grid = *disc_->grid;
  grad = disc_->op.apply_full(u);
  const double grad_part = 0.5 * u.dot(grad);
  const double bulk = bulk_integral(grid, params_, u, cap(), &grad, nullptr);
  const double sing = singular_term(grid, params_, *ctx_, u, &grad);
  for (std::size_t n = 0; n < grid.num_nodes(); ++n)
    if (!grid.is_interior(n)) grad[static_cast<Eigen::Index>(n)] = 0.0;
  return grad_part + bulk + sing;
}

Eigen::VectorXd EnergyFunctional::gradient(const Eigen::VectorXd& u) const {
  Eigen::VectorXd g;
  energy_and_gradient(u, g);
  return g;
}

SparseMatrix EnergyFunctional::hessian(const Eigen::VectorXd& u) const {
  const Grid& grid = *disc_->grid;
  std::vector<Eigen::Triplet<double>> node_trip;
  bulk_integral(grid, params_, u, cap(), nullptr, &node_trip);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(node_trip.size() + grid.num_dofs());
  for (const auto& t : node_trip) {
    const long r = grid.dof(static_cast<std::size_t>(t.row()));
    const long c = grid.dof(static_cast<std::size_t>(t.col()));
    if (r >= 0 && c >= 0) trip.emplace_back(static_cast<int>(r), static_cast<int>(c), t.value());
  }
  if (params_.beta != 0.0) {
    for (std::size_t k = 0; k < grid.num_dofs(); ++k) {
      const std::size_t n = grid.node_of_dof(k);
      const double d2 = -params_.beta * grid.weight(n) * phi_beta_derivative(*ctx_, n, u[static_cast<Eigen::Index>(n)]);
      if (d2 != 0.0) trip.emplace_back(static_cast<int>(k), static_cast<int>(k), d2);
    }
  }
  const auto m = static_cast<Eigen::Index>(grid.num_dofs());
  SparseMatrix h(m, m);
  h.setFromTriplets(trip.begin(), trip.end());
  h += disc_->op.interior();
  h.makeCompressed();
  return h;
}

double residual_sup(const Grid& grid, const Eigen::VectorXd& r) {
  double m = 0.0;
  for (std::size_t n = 0; n < grid.num_nodes(); ++n)
    if (grid.is_interior(n)) m = std::max(m, std::abs(r[static_cast<Eigen::Index>(n)]) / grid.weight(n));
  return m;
}

double energy_exact(const Discretization& disc, const ModelParams& m, const Eigen::VectorXd& u) {
  const Grid& grid = *disc.grid;
  double nodal = 0.0;
  for (std::size_t n = 0; n < grid.num_nodes(); ++n) {
    if (!grid.is_interior(n)) continue;
    const double un = u[static_cast<Eigen::Index>(n)];
    double val = 0.0;
    if (un > 1.0) val += 1.0 - m.lambda * G_exact(m, un - 1.0);
    if (un > 0.0) val -= m.beta / (1.0 - m.delta) * std::pow(un, 1.0 - m.delta);
    nodal += grid.weight(n) * val;
  }
  return 0.5 * disc.op.quadratic_form(u) + nodal;
}

double energy_eps(const EnergyFunctional& e, const ScalarField& u) { return e.energy(u.values()); }

ScalarField residual_eps(const EnergyFunctional& e, const ScalarField& u) {
  return ScalarField(u.grid_ptr(), e.gradient(u.values()));
}

}  // namespace cfbp
