#pragma once

#include <memory>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "carnot_fbp/operators.hpp"

namespace cfbp {

/// Solver for the SPD interior operator. Sparse LDLT for 1-D/2-D grids,
/// conjugate gradients with incomplete Cholesky in 3-D.
class SpdSolver {
public:
  SpdSolver(const SparseMatrix& a, int dim, double rel_tol = 1e-10);
  ~SpdSolver();
  SpdSolver(const SpdSolver&) = delete;
  SpdSolver& operator=(const SpdSolver&) = delete;

  /// Throws SolverError if the iterative solve does not reach the tolerance.
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  /// Cheap approximate inverse (exact in the direct case).
  Eigen::VectorXd precondition(const Eigen::VectorXd& b) const;

  bool direct() const noexcept { return direct_; }
  const SparseMatrix& matrix() const noexcept { return *a_; }
  double tolerance() const noexcept { return tol_; }

private:
  struct Impl;
  const SparseMatrix* a_;
  bool direct_;
  double tol_;
  std::unique_ptr<Impl> impl_;
};

struct SymmetricSolveResult {
  Eigen::VectorXd x;
  bool ok = false;
  /// Negative pivots of the LDL^T factorization (direct path only, else -1).
  int negative_pivots = -1;
  int iterations = 0;
};

/// Solves H x = b for symmetric H. The direct path factors H (and reports its
/// inertia); the iterative path runs CG when `definite`, MINRES otherwise,
/// both preconditioned with `pre`.
SymmetricSolveResult solve_symmetric(const SparseMatrix& h, const Eigen::VectorXd& b, bool definite,
                                     const SpdSolver& pre, double rel_tol = 1e-10, int max_iter = 4000);

/// Grid, operator and solver bundled together; immutable after construction.
struct Discretization {
  Discretization(GroupModel g, std::shared_ptr<const Grid> gr);

  GroupModel group;
  std::shared_ptr<const Grid> grid;
  DiscreteOperator op;
  std::unique_ptr<SpdSolver> solver;

  std::size_t num_dofs() const noexcept { return grid->num_dofs(); }
  /// Solves A x = b on dofs.
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const { return solver->solve(b); }
};

using DiscretizationPtr = std::shared_ptr<const Discretization>;
DiscretizationPtr make_discretization(GroupKind kind, const Point& lo, const Point& hi, const std::vector<int>& nodes);

}  // namespace cfbp
