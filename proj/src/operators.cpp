#include "carnot_fbp/operators.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <Eigen/SparseCore>

#include "carnot_fbp/errors.hpp"
#include "carnot_fbp/parallel.hpp"

namespace cfbp {

Q1Reference::Q1Reference(int d) : dim(d), nv(1 << d), nq(1 << d) {
  const double g[2] = {0.5 - 0.5 / std::sqrt(3.0), 0.5 + 0.5 / std::sqrt(3.0)};
  tau.resize(static_cast<std::size_t>(nq));
  weight.assign(static_cast<std::size_t>(nq), 1.0 / nq);
  phi.resize(static_cast<std::size_t>(nq * nv));
  dphi.resize(static_cast<std::size_t>(nq * nv * dim));
  for (int q = 0; q < nq; ++q) {
    tau[q] = {0.0, 0.0, 0.0};
    for (int a = 0; a < dim; ++a) tau[q][a] = g[(q >> a) & 1];
    for (int v = 0; v < nv; ++v) {
      double val = 1.0;
      for (int a = 0; a < dim; ++a) val *= ((v >> a) & 1) ? tau[q][a] : 1.0 - tau[q][a];
      phi[q * nv + v] = val;
      for (int a = 0; a < dim; ++a) {
        double der = ((v >> a) & 1) ? 1.0 : -1.0;
        for (int b = 0; b < dim; ++b)
          if (b != a) der *= ((v >> b) & 1) ? tau[q][b] : 1.0 - tau[q][b];
        dphi[(q * nv + v) * dim + a] = der;
      }
    }
  }
}

namespace {

// Z_i phi_v at every Gauss point of one cell: zphi[(q * gens + i) * nv + v].
void cell_frame_gradients(const GroupModel& group, const Grid& grid, const Q1Reference& ref,
                          std::size_t cell, std::vector<double>& zphi) {
  const int d = grid.dim();
  const int gens = group.num_generators();
  const std::size_t base = grid.cell_base_node(cell);
  double x0[3];
  grid.coords(base, x0);
  double x[3] = {0, 0, 0};
  double frame[9];
  zphi.assign(static_cast<std::size_t>(ref.nq * gens * ref.nv), 0.0);
  for (int q = 0; q < ref.nq; ++q) {
    for (int a = 0; a < d; ++a) x[a] = x0[a] + ref.tau[q][a] * grid.spacing(a);
    group.frame_into(x, frame);
    for (int i = 0; i < gens; ++i) {
      for (int v = 0; v < ref.nv; ++v) {
        double s = 0.0;
        for (int a = 0; a < d; ++a)
          s += frame[i * d + a] * ref.dphi[(q * ref.nv + v) * d + a] / grid.spacing(a);
        zphi[(q * gens + i) * ref.nv + v] = s;
      }
    }
  }
}

void local_stiffness(const GroupModel& group, const Grid& grid, const Q1Reference& ref, std::size_t cell,
                     std::vector<double>& zphi, std::vector<double>& kloc) {
  cell_frame_gradients(group, grid, ref, cell, zphi);
  const int gens = group.num_generators();
  const int nv = ref.nv;
  const double vol = grid.cell_volume();
  kloc.assign(static_cast<std::size_t>(nv * nv), 0.0);
  for (int v = 0; v < nv; ++v) {
    for (int w = v; w < nv; ++w) {
      double s = 0.0;
      for (int q = 0; q < ref.nq; ++q) {
        double t = 0.0;
        for (int i = 0; i < gens; ++i)
          t += zphi[(q * gens + i) * nv + v] * zphi[(q * gens + i) * nv + w];
        s += ref.weight[q] * t;
      }
      kloc[v * nv + w] = vol * s;
      kloc[w * nv + v] = vol * s;
    }
  }
}

}  // namespace

DiscreteOperator::DiscreteOperator(const GroupModel& group, std::shared_ptr<const Grid> grid)
    : group_(group), grid_(std::move(grid)) {
  const Grid& gr = *grid_;
  if (group_.ambient_dim() != gr.dim()) throw InvalidArgument("operator: group and grid dimensions differ");
  const int d = gr.dim();
  const auto n = static_cast<Eigen::Index>(gr.num_nodes());

  // Insert the 3^d stencil pattern, then accumulate element contributions.
  int stencil = 1;
  for (int a = 0; a < d; ++a) stencil *= 3;
  k_.resize(n, n);
  k_.reserve(Eigen::VectorXi::Constant(n, stencil));
  for (Eigen::Index col = 0; col < n; ++col) {
    const auto idx = gr.multi_index(static_cast<std::size_t>(col));
    for (int s = 0; s < stencil; ++s) {
      std::array<int, 3> nb = idx;
      int code = s;
      bool ok = true;
      for (int a = 0; a < d; ++a) {
        nb[a] += code % 3 - 1;
        code /= 3;
        if (nb[a] < 0 || nb[a] >= gr.nodes(a)) ok = false;
      }
      if (ok) k_.insert(static_cast<Eigen::Index>(gr.node_index(nb)), col) = 0.0;
    }
  }
  k_.makeCompressed();

  Q1Reference ref(d);
  std::vector<double> zphi, kloc;
  std::vector<std::size_t> vn(static_cast<std::size_t>(ref.nv));
  const bool constant = group_.constant_frame();
  if (constant) local_stiffness(group_, gr, ref, 0, zphi, kloc);
  for (std::size_t c = 0; c < gr.num_cells(); ++c) {
    if (!constant) local_stiffness(group_, gr, ref, c, zphi, kloc);
    for (int v = 0; v < ref.nv; ++v) vn[v] = gr.cell_vertex(c, v);
    for (int v = 0; v < ref.nv; ++v)
      for (int w = 0; w < ref.nv; ++w)
        k_.coeffRef(static_cast<Eigen::Index>(vn[v]), static_cast<Eigen::Index>(vn[w])) += kloc[v * ref.nv + w];
  }

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(gr.num_dofs() * static_cast<std::size_t>(stencil));
  for (Eigen::Index col = 0; col < k_.outerSize(); ++col) {
    const long dc = gr.dof(static_cast<std::size_t>(col));
    if (dc < 0) continue;
    for (SparseMatrix::InnerIterator it(k_, col); it; ++it) {
      const long dr = gr.dof(static_cast<std::size_t>(it.row()));
      if (dr >= 0) trip.emplace_back(static_cast<int>(dr), static_cast<int>(dc), it.value());
    }
  }
  const auto m = static_cast<Eigen::Index>(gr.num_dofs());
  a_.resize(m, m);
  a_.setFromTriplets(trip.begin(), trip.end());
  a_.makeCompressed();
  row_sum_ = k_ * Eigen::VectorXd::Ones(k_.cols());
}

Eigen::VectorXd DiscreteOperator::restrict_to_dofs(const Eigen::VectorXd& nodal) const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(grid_->num_dofs()));
  for (std::size_t k = 0; k < grid_->num_dofs(); ++k)
    out[static_cast<Eigen::Index>(k)] = nodal[static_cast<Eigen::Index>(grid_->node_of_dof(k))];
  return out;
}

Eigen::VectorXd DiscreteOperator::prolong(const Eigen::VectorXd& dofs) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid_->num_nodes()));
  for (std::size_t k = 0; k < grid_->num_dofs(); ++k)
    out[static_cast<Eigen::Index>(grid_->node_of_dof(k))] = dofs[static_cast<Eigen::Index>(k)];
  return out;
}

Eigen::VectorXd DiscreteOperator::apply_full(const Eigen::VectorXd& u) const { return k_ * u; }

// sum_i r_i u_i^2 - sum_{i<j} k_ij (u_i - u_j)^2, r the row sums (zero up to
// rounding). u.dot(K u) loses a factor ~1/h^2 to cancellation inside K u.
double DiscreteOperator::quadratic_form(const Eigen::VectorXd& u) const {
  std::vector<double> part(static_cast<std::size_t>(reduction_chunks()), 0.0);
  parallel_chunks(static_cast<std::size_t>(k_.outerSize()), [&](int chunk, std::size_t b, std::size_t e) {
    // Neumaier-compensated: finite-difference checks difference two of these
    double s = 0.0, comp = 0.0;
    auto add = [&](double x) {
      const double t = s + x;
      comp += std::abs(s) >= std::abs(x) ? (s - t) + x : (x - t) + s;
      s = t;
    };
    for (std::size_t c = b; c < e; ++c) {
      const auto col = static_cast<Eigen::Index>(c);
      const double uc = u[col];
      add(row_sum_[col] * uc * uc);
      for (SparseMatrix::InnerIterator it(k_, col); it; ++it)
        if (it.row() < col) {
          const double d = u[it.row()] - uc;
          add(-it.value() * d * d);
        }
    }
    part[static_cast<std::size_t>(chunk)] = s + comp;
  });
  double total = 0.0;
  for (double p : part) total += p;
  return total;
}

void DiscreteOperator::dump_triplets(std::ostream& os) const {
  os.precision(17);
  for (Eigen::Index col = 0; col < k_.outerSize(); ++col)
    for (SparseMatrix::InnerIterator it(k_, col); it; ++it)
      os << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
}

Eigen::VectorXd apply_sub_laplacian_matrix_free(const GroupModel& group, const Grid& grid,
                                                const Eigen::VectorXd& u) {
  if (static_cast<std::size_t>(u.size()) != grid.num_nodes()) throw InvalidArgument("matrix-free apply: size mismatch");
  const Q1Reference ref(grid.dim());
  const int chunks = reduction_chunks();
  std::vector<Eigen::VectorXd> partial(static_cast<std::size_t>(chunks));
  parallel_chunks(grid.num_cells(), [&](int chunk, std::size_t b, std::size_t e) {
    Eigen::VectorXd& out = partial[static_cast<std::size_t>(chunk)];
    out = Eigen::VectorXd::Zero(u.size());
    std::vector<double> zphi, kloc;
    const bool constant = group.constant_frame();
    if (constant) local_stiffness(group, grid, ref, 0, zphi, kloc);
    for (std::size_t c = b; c < e; ++c) {
      if (!constant) local_stiffness(group, grid, ref, c, zphi, kloc);
      for (int v = 0; v < ref.nv; ++v) {
        double s = 0.0;
        for (int w = 0; w < ref.nv; ++w) s += kloc[v * ref.nv + w] * u[static_cast<Eigen::Index>(grid.cell_vertex(c, w))];
        out[static_cast<Eigen::Index>(grid.cell_vertex(c, v))] += s;
      }
    }
  });
  Eigen::VectorXd out = Eigen::VectorXd::Zero(u.size());
  for (const auto& p : partial)
    if (p.size() == u.size()) out += p;
  return out;
}

double gauss_point_inner_product(const GroupModel& group, const Grid& grid, const Eigen::VectorXd& u,
                                 const Eigen::VectorXd& v) {
  const Q1Reference ref(grid.dim());
  const int d = grid.dim();
  const int gens = group.num_generators();
  double total = 0.0;
  double x0[3], x[3] = {0, 0, 0}, frame[9];
  for (std::size_t c = 0; c < grid.num_cells(); ++c) {
    grid.coords(grid.cell_base_node(c), x0);
    double cell_sum = 0.0;
    for (int q = 0; q < ref.nq; ++q) {
      // Euclidean gradients of the interpolants, then the frame.
      double du[3] = {0, 0, 0}, dv[3] = {0, 0, 0};
      for (int w = 0; w < ref.nv; ++w) {
        const auto node = static_cast<Eigen::Index>(grid.cell_vertex(c, w));
        for (int a = 0; a < d; ++a) {
          const double s = ref.dphi[(q * ref.nv + w) * d + a] / grid.spacing(a);
          du[a] += u[node] * s;
          dv[a] += v[node] * s;
        }
      }
      for (int a = 0; a < d; ++a) x[a] = x0[a] + ref.tau[q][a] * grid.spacing(a);
      group.frame_into(x, frame);
      double dot = 0.0;
      for (int i = 0; i < gens; ++i) {
        double zu = 0.0, zv = 0.0;
        for (int a = 0; a < d; ++a) {
          zu += frame[i * d + a] * du[a];
          zv += frame[i * d + a] * dv[a];
        }
        dot += zu * zv;
      }
      cell_sum += ref.weight[q] * dot;
    }
    total += grid.cell_volume() * cell_sum;
  }
  return total;
}

HorizontalField horizontal_gradient(const GroupModel& group, const ScalarField& u) {
  const Grid& grid = u.grid();
  const int d = grid.dim();
  const int gens = group.num_generators();
  HorizontalField out{u.grid_ptr(), Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(grid.num_nodes()), gens)};
  parallel_chunks(grid.num_nodes(), [&](int, std::size_t b, std::size_t e) {
    double x[3], frame[9], du[3];
    for (std::size_t n = b; n < e; ++n) {
      const auto idx = grid.multi_index(n);
      for (int a = 0; a < d; ++a) {
        const std::size_t s = grid.stride(a);
        const double h = grid.spacing(a);
        if (idx[a] == 0)
          du[a] = (u[n + s] - u[n]) / h;
        else if (idx[a] == grid.nodes(a) - 1)
          du[a] = (u[n] - u[n - s]) / h;
        else
          du[a] = (u[n + s] - u[n - s]) / (2.0 * h);
      }
      grid.coords(n, x);
      group.frame_into(x, frame);
      for (int i = 0; i < gens; ++i) {
        double z = 0.0;
        for (int a = 0; a < d; ++a) z += frame[i * d + a] * du[a];
        out.values(static_cast<Eigen::Index>(n), i) = z;
      }
    }
  });
  return out;
}

double h1_seminorm_sq(const DiscreteOperator& op, const ScalarField& u) { return op.quadratic_form(u.values()); }

double lp_norm(const ScalarField& u, double p) {
  if (!(p >= 1.0)) throw InvalidArgument("lp_norm: p must be >= 1");
  const Eigen::VectorXd& w = u.grid().haar_weights();
  double s = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i) s += w[i] * std::pow(std::abs(u.values()[i]), p);
  return std::pow(s, 1.0 / p);
}

double sup_norm(const Eigen::VectorXd& u) { return u.size() == 0 ? 0.0 : u.cwiseAbs().maxCoeff(); }

double sup_norm(const ScalarField& u) { return sup_norm(u.values()); }

double lipschitz_estimate(const GroupModel& group, const ScalarField& u) {
  const HorizontalField g = horizontal_gradient(group, u);
  double m = 0.0;
  for (std::size_t n = 0; n < u.size(); ++n)
    if (u.grid().is_interior(n)) m = std::max(m, g.norm_at(n));
  return m;
}

}  // namespace cfbp
