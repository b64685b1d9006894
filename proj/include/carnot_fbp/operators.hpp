#pragma once

#include <iosfwd>
#include <memory>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "carnot_fbp/geometry.hpp"

namespace cfbp {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Reference data of the multilinear (Q1) element on [0,1]^d: tensor Gauss
/// points, their weights (summing to 1) and shape-function values/derivatives.
struct Q1Reference {
  explicit Q1Reference(int dim);

  int dim;
  int nv;  // 2^dim vertices
  int nq;  // 2^dim Gauss points
  std::vector<std::array<double, 3>> tau;  // reference coordinates
  std::vector<double> weight;
  std::vector<double> phi;   // [q * nv + v]
  std::vector<double> dphi;  // [(q * nv + v) * dim + a], d/dtau_a
};

/// Nodal values of Z_1 u, ..., Z_m u; one row per node.
struct HorizontalField {
  std::shared_ptr<const Grid> grid;
  Eigen::MatrixXd values;  // num_nodes x num_generators

  int components() const noexcept { return static_cast<int>(values.cols()); }
  double norm_at(std::size_t node) const { return values.row(static_cast<Eigen::Index>(node)).norm(); }
};

/// Q1 Galerkin discretization of -L. The element stiffness at each Gauss point
/// is (Z phi)^T (Z phi) times the quadrature weight, so <A u, v> equals the
/// Gauss-point quadrature of <grad_G u, grad_G v> for every pair.
class DiscreteOperator {
public:
  DiscreteOperator(const GroupModel& group, std::shared_ptr<const Grid> grid);

  const GroupModel& group() const noexcept { return group_; }
  const Grid& grid() const noexcept { return *grid_; }
  const std::shared_ptr<const Grid>& grid_ptr() const noexcept { return grid_; }

  /// Interior (Dirichlet) block, indexed by dof.
  const SparseMatrix& interior() const noexcept { return a_; }
  /// All nodes, indexed by node.
  const SparseMatrix& full() const noexcept { return k_; }

  Eigen::VectorXd restrict_to_dofs(const Eigen::VectorXd& nodal) const;
  /// Dof vector to nodal vector with zero boundary values.
  Eigen::VectorXd prolong(const Eigen::VectorXd& dofs) const;

  /// K u on all nodes.
  Eigen::VectorXd apply_full(const Eigen::VectorXd& u) const;
  /// u^T K u.
  double quadratic_form(const Eigen::VectorXd& u) const;

  /// Writes "row col value" lines (node indices) for the full matrix.
  void dump_triplets(std::ostream& os) const;

private:
  GroupModel group_;
  std::shared_ptr<const Grid> grid_;
  SparseMatrix k_;
  SparseMatrix a_;
  Eigen::VectorXd row_sum_;
};

/// Matrix-free K u for grids too large to assemble.
Eigen::VectorXd apply_sub_laplacian_matrix_free(const GroupModel& group, const Grid& grid,
                                                const Eigen::VectorXd& u);

/// <grad_G u, grad_G v> evaluated directly at the Gauss points, independent of
/// the assembled matrix.
double gauss_point_inner_product(const GroupModel& group, const Grid& grid, const Eigen::VectorXd& u,
                                 const Eigen::VectorXd& v);

/// Centered differences (one-sided on the boundary) combined with the frame.
HorizontalField horizontal_gradient(const GroupModel& group, const ScalarField& u);

double h1_seminorm_sq(const DiscreteOperator& op, const ScalarField& u);
double lp_norm(const ScalarField& u, double p);
double sup_norm(const ScalarField& u);
double sup_norm(const Eigen::VectorXd& u);

/// Max over interior nodes of |grad_G u|.
double lipschitz_estimate(const GroupModel& group, const ScalarField& u);

}  // namespace cfbp
