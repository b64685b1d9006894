#pragma once

#include <memory>
#include <optional>
#include <string>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "carnot_fbp/geometry.hpp"
#include "carnot_fbp/linear_solver.hpp"

namespace cfbp {

enum class GKind { constant_one, power, affine_power };

std::string to_string(GKind kind);
GKind g_kind_from_string(const std::string& name);

struct ModelParams {
  double lambda = 1.0;
  double beta = 0.1;  // singular strength
  double delta = 0.5;
  double p = 1.5;
  double a0 = 1.0;  // growth constants: g(s) <= a0 + a1 s^(p-1)
  double a1 = 1.0;
  double epsilon = 0.2;
  GKind g_kind = GKind::constant_one;

  /// Throws InvalidArgument naming the offending field.
  void validate() const;
  /// 1 + lambda (a0 + a1) + 2 / epsilon; residual tolerances are relative to it.
  double scale() const noexcept;
};

// Quintic smoothstep B and its derivative (the mollifier).
double eval_B(double s) noexcept;
double eval_mollifier(double s) noexcept;
double eval_mollifier_derivative(double s) noexcept;
/// Integral of B over [0, s].
double B_integral(double s) noexcept;

double g_eval(const ModelParams& m, double s);
double g_derivative(const ModelParams& m, double s);
double g_eps(const ModelParams& m, double s);
double g_eps_derivative(const ModelParams& m, double s);
/// Integral of g_eps over [0, s], closed form.
double G_eps(const ModelParams& m, double s);
/// Integral of g over [0, s].
double G_exact(const ModelParams& m, double s);

/// Bulk density B((u-1)/eps) - lambda G_eps((u-1)_+) and its first two
/// derivatives in u.
struct BulkValue {
  double f, f1, f2;
};
BulkValue bulk_density(const ModelParams& m, double u);

/// The auxiliary solution u_beta that defines the cutoff phi_beta.
struct CutoffContext {
  std::shared_ptr<const Grid> grid;
  Eigen::VectorXd u_beta;  // nodal, positive on interior nodes
  double delta = 0.5;
};

double phi_beta(const CutoffContext& ctx, std::size_t node, double u);
/// d phi_beta / du.
double phi_beta_derivative(const CutoffContext& ctx, std::size_t node, double u);
/// Integral of phi_beta over [0, u].
double Phi_beta(const CutoffContext& ctx, std::size_t node, double u);

/// E_eps, or its truncation at a cap field. The gradient term is the Q1
/// quadratic form, the bulk term is integrated cell by cell on the
/// interpolant, the singular term is lumped at the nodes.
class EnergyFunctional {
public:
  EnergyFunctional(DiscretizationPtr disc, ModelParams params, std::shared_ptr<const CutoffContext> ctx,
                   std::optional<Eigen::VectorXd> cap = std::nullopt);

  const Discretization& disc() const noexcept { return *disc_; }
  const DiscretizationPtr& disc_ptr() const noexcept { return disc_; }
  const ModelParams& params() const noexcept { return params_; }
  const CutoffContext& ctx() const noexcept { return *ctx_; }
  const std::shared_ptr<const CutoffContext>& ctx_ptr() const noexcept { return ctx_; }
  bool truncated() const noexcept { return cap_.has_value(); }
  const Eigen::VectorXd* cap() const noexcept { return cap_ ? &*cap_ : nullptr; }

  double energy(const Eigen::VectorXd& u) const;
  /// Nodal gradient, zero on boundary nodes.
  Eigen::VectorXd gradient(const Eigen::VectorXd& u) const;
  double energy_and_gradient(const Eigen::VectorXd& u, Eigen::VectorXd& grad) const;
  /// Hessian restricted to interior dofs.
  SparseMatrix hessian(const Eigen::VectorXd& u) const;

  /// Tolerance for residual_sup: 1e-7 * params().scale() unless overridden.
  double tolerance() const noexcept { return tol_; }
  void set_tolerance(double t) noexcept { tol_ = t; }

private:
  DiscretizationPtr disc_;
  ModelParams params_;
  std::shared_ptr<const CutoffContext> ctx_;
  std::optional<Eigen::VectorXd> cap_;
  double tol_;
};

/// max over interior nodes of |r_n| / w_n.
double residual_sup(const Grid& grid, const Eigen::VectorXd& r);

/// E(u) with nodal quadrature; chi_{u>1} by strict comparison.
double energy_exact(const Discretization& disc, const ModelParams& params, const Eigen::VectorXd& u);

double energy_eps(const EnergyFunctional& e, const ScalarField& u);
ScalarField residual_eps(const EnergyFunctional& e, const ScalarField& u);

}  // namespace cfbp
