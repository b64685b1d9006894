#include "carnot_fbp/linear_solver.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <unsupported/Eigen/IterativeSolvers>

#include "carnot_fbp/errors.hpp"

namespace cfbp {

namespace {

// Adapter so Eigen's Krylov solvers can use an SpdSolver as preconditioner.
class SpdPreconditioner {
public:
  SpdPreconditioner() = default;
  template <typename M>
  SpdPreconditioner& analyzePattern(const M&) { return *this; }
  template <typename M>
  SpdPreconditioner& factorize(const M&) { return *this; }
  template <typename M>
  SpdPreconditioner& compute(const M&) { return *this; }
  template <typename Rhs>
  Eigen::VectorXd solve(const Rhs& b) const {
    Eigen::VectorXd r = b;
    return inner ? inner->precondition(r) : r;
  }
  Eigen::ComputationInfo info() const { return Eigen::Success; }

  const SpdSolver* inner = nullptr;
};

using IcCg = Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper, Eigen::IncompleteCholesky<double>>;

}  // namespace

struct SpdSolver::Impl {
  Eigen::SimplicialLDLT<SparseMatrix> ldlt;
  IcCg cg;
};

SpdSolver::SpdSolver(const SparseMatrix& a, int dim, double rel_tol)
    : a_(&a), direct_(dim <= 2), tol_(rel_tol), impl_(std::make_unique<Impl>()) {
  if (direct_) {
    impl_->ldlt.compute(a);
    if (impl_->ldlt.info() != Eigen::Success) throw SolverError("LDLT factorization of the operator failed");
  } else {
    impl_->cg.setTolerance(rel_tol);
    impl_->cg.setMaxIterations(5000);
    impl_->cg.compute(a);
    if (impl_->cg.info() != Eigen::Success) throw SolverError("incomplete Cholesky of the operator failed");
  }
}

SpdSolver::~SpdSolver() = default;

Eigen::VectorXd SpdSolver::solve(const Eigen::VectorXd& b) const {
  if (direct_) return impl_->ldlt.solve(b);
  if (b.squaredNorm() == 0.0) return Eigen::VectorXd::Zero(b.size());
  Eigen::VectorXd x = impl_->cg.solve(b);
  if (impl_->cg.info() != Eigen::Success)
    throw SolverError("CG on the operator stalled, relative error " + std::to_string(impl_->cg.error()));
  return x;
}

Eigen::VectorXd SpdSolver::precondition(const Eigen::VectorXd& b) const {
  if (direct_) return impl_->ldlt.solve(b);
  return impl_->cg.preconditioner().solve(b);
}

SymmetricSolveResult solve_symmetric(const SparseMatrix& h, const Eigen::VectorXd& b, bool definite,
                                     const SpdSolver& pre, double rel_tol, int max_iter) {
  SymmetricSolveResult res;
  if (pre.direct()) {
    Eigen::SimplicialLDLT<SparseMatrix> f(h);
    if (f.info() != Eigen::Success) return res;
    const Eigen::VectorXd& dd = f.vectorD();
    res.negative_pivots = 0;
    for (Eigen::Index i = 0; i < dd.size(); ++i) {
      if (dd[i] < 0.0) ++res.negative_pivots;
      if (dd[i] == 0.0 || !std::isfinite(dd[i])) return res;
    }
    res.x = f.solve(b);
    res.ok = res.x.allFinite();
    return res;
  }
  if (definite) {
    Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper, SpdPreconditioner> cg;
    cg.setTolerance(rel_tol);
    cg.setMaxIterations(max_iter);
    cg.compute(h);
    cg.preconditioner().inner = &pre;
    res.x = cg.solve(b);
    res.iterations = static_cast<int>(cg.iterations());
    res.ok = cg.info() == Eigen::Success && res.x.allFinite();
  } else {
    Eigen::MINRES<SparseMatrix, Eigen::Lower | Eigen::Upper, SpdPreconditioner> mr;
    mr.setTolerance(rel_tol);
    mr.setMaxIterations(max_iter);
    mr.compute(h);
    mr.preconditioner().inner = &pre;
    res.x = mr.solve(b);
    res.iterations = static_cast<int>(mr.iterations());
    res.ok = res.x.allFinite() && (h * res.x - b).norm() <= 1e3 * rel_tol * b.norm();
  }
  return res;
}

Discretization::Discretization(GroupModel g, std::shared_ptr<const Grid> gr)
    : group(std::move(g)), grid(std::move(gr)), op(group, grid) {
  solver = std::make_unique<SpdSolver>(op.interior(), grid->dim());
}

DiscretizationPtr make_discretization(GroupKind kind, const Point& lo, const Point& hi,
                                      const std::vector<int>& nodes) {
  auto grid = std::make_shared<const Grid>(lo, hi, nodes);
  return std::make_shared<const Discretization>(GroupModel::from_kind(kind), grid);
}

}  // namespace cfbp
