#include "carnot_fbp/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "carnot_fbp/errors.hpp"

namespace cfbp {

std::string to_string(GroupKind kind) {
  switch (kind) {
    case GroupKind::euclid1: return "euclid1";
    case GroupKind::euclid2: return "euclid2";
    case GroupKind::euclid3: return "euclid3";
    case GroupKind::heis1: return "heis1";
  }
  return "unknown";
}

GroupKind group_kind_from_string(const std::string& name) {
  if (name == "euclid1") return GroupKind::euclid1;
  if (name == "euclid2") return GroupKind::euclid2;
  if (name == "euclid3") return GroupKind::euclid3;
  if (name == "heis1") return GroupKind::heis1;
  throw InvalidArgument("unknown group '" + name + "' (expected euclid1, euclid2, euclid3 or heis1)");
}

GroupModel::GroupModel(int dim, int gens, std::vector<int> r, std::string name)
    : dim_(dim),
      gens_(gens),
      r_(std::move(r)),
      c0_(static_cast<std::size_t>(gens * dim), 0.0),
      c1_(static_cast<std::size_t>(gens * dim * dim), 0.0),
      name_(std::move(name)) {}

GroupModel GroupModel::euclidean(int dim) {
  if (dim < 1 || dim > 3) throw InvalidArgument("Euclidean model supports dimension 1..3");
  GroupModel g(dim, dim, std::vector<int>(static_cast<std::size_t>(dim), 1),
               "euclid" + std::to_string(dim));
  for (int i = 0; i < dim; ++i) g.c0_[static_cast<std::size_t>(i * dim + i)] = 1.0;
  return g;
}

GroupModel GroupModel::heisenberg() {
  GroupModel g(3, 2, {1, 1, 2}, "heis1");
  auto c1 = [&g](int i, int k, int m) -> double& {
    return g.c1_[static_cast<std::size_t>((i * 3 + k) * 3 + m)];
  };
  // Z_1 = d/dx1 + 2 x2 d/dx3,  Z_2 = d/dx2 - 2 x1 d/dx3
  g.c0_[0 * 3 + 0] = 1.0;
  g.c0_[1 * 3 + 1] = 1.0;
  c1(0, 2, 1) = 2.0;
  c1(1, 2, 0) = -2.0;
  g.constant_ = false;
  return g;
}

GroupModel GroupModel::from_kind(GroupKind kind) {
  switch (kind) {
    case GroupKind::euclid1: return euclidean(1);
    case GroupKind::euclid2: return euclidean(2);
    case GroupKind::euclid3: return euclidean(3);
    case GroupKind::heis1: return heisenberg();
  }
  throw InvalidArgument("unknown group kind");
}

int GroupModel::homogeneous_dimension() const noexcept {
  return std::accumulate(r_.begin(), r_.end(), 0);
}

Point GroupModel::dilate(std::span<const double> x, double d) const {
  if (static_cast<int>(x.size()) != dim_)
    throw InvalidArgument("dilate: point has " + std::to_string(x.size()) +
                          " coordinates, model " + name_ + " needs " + std::to_string(dim_));
  if (!(d > 0.0)) throw InvalidArgument("dilate: factor must be positive");
  Point out(x.begin(), x.end());
  for (int i = 0; i < dim_; ++i) out[static_cast<std::size_t>(i)] *= std::pow(d, r_[static_cast<std::size_t>(i)]);
  return out;
}

void GroupModel::frame_into(const double* x, double* out) const noexcept {
  for (int i = 0; i < gens_; ++i) {
    for (int k = 0; k < dim_; ++k) {
      double c = c0_[static_cast<std::size_t>(i * dim_ + k)];
      if (!constant_) {
        for (int m = 0; m < dim_; ++m) c += c1_[static_cast<std::size_t>((i * dim_ + k) * dim_ + m)] * x[m];
      }
      out[i * dim_ + k] = c;
    }
  }
}

std::vector<Point> GroupModel::frame_at(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim_) throw InvalidArgument("frame_at: dimension mismatch");
  std::vector<double> flat(static_cast<std::size_t>(gens_ * dim_));
  frame_into(x.data(), flat.data());
  std::vector<Point> rows(static_cast<std::size_t>(gens_));
  for (int i = 0; i < gens_; ++i)
    rows[static_cast<std::size_t>(i)].assign(flat.begin() + i * dim_, flat.begin() + (i + 1) * dim_);
  return rows;
}

// ---------------------------------------------------------------------------

Grid::Grid(Point lo, Point hi, std::vector<int> nodes_per_axis)
    : dim_(static_cast<int>(lo.size())), lo_(std::move(lo)), hi_(std::move(hi)), n_(std::move(nodes_per_axis)) {
  if (dim_ < 1 || dim_ > 3) throw InvalidArgument("grid dimension must be 1..3");
  if (static_cast<int>(hi_.size()) != dim_ || static_cast<int>(n_.size()) != dim_)
    throw InvalidArgument("grid: lo, hi and resolution must have the same length");
  h_.resize(static_cast<std::size_t>(dim_));
  for (int a = 0; a < dim_; ++a) {
    if (!(hi_[a] > lo_[a])) throw InvalidArgument("grid: box_hi must exceed box_lo on every axis");
    if (n_[a] < 3) throw InvalidArgument("grid: need at least 3 nodes per axis");
    h_[a] = (hi_[a] - lo_[a]) / (n_[a] - 1);
  }
  std::size_t s = 1, cs = 1;
  for (int a = dim_ - 1; a >= 0; --a) {
    stride_[a] = s;
    cell_stride_[a] = cs;
    s *= static_cast<std::size_t>(n_[a]);
    cs *= static_cast<std::size_t>(n_[a] - 1);
  }
  num_nodes_ = s;
  num_cells_ = cs;

  interior_.assign(num_nodes_, 0);
  weight_.resize(static_cast<Eigen::Index>(num_nodes_));
  node_to_dof_.assign(num_nodes_, -1);
  for (std::size_t node = 0; node < num_nodes_; ++node) {
    const auto idx = multi_index(node);
    bool inside = true;
    double w = 1.0;
    for (int a = 0; a < dim_; ++a) {
      const bool end = idx[a] == 0 || idx[a] == n_[a] - 1;
      inside = inside && !end;
      w *= end ? 0.5 * h_[a] : h_[a];
    }
    interior_[node] = inside ? 1 : 0;
    weight_[static_cast<Eigen::Index>(node)] = w;
    if (inside) {
      node_to_dof_[node] = static_cast<long>(dof_to_node_.size());
      dof_to_node_.push_back(node);
    }
  }
  vertex_offset_.resize(static_cast<std::size_t>(1 << dim_));
  for (int v = 0; v < (1 << dim_); ++v) {
    std::size_t off = 0;
    for (int a = 0; a < dim_; ++a)
      if (v & (1 << a)) off += stride_[a];
    vertex_offset_[static_cast<std::size_t>(v)] = off;
  }
}

double Grid::volume() const noexcept {
  double v = 1.0;
  for (int a = 0; a < dim_; ++a) v *= hi_[a] - lo_[a];
  return v;
}

double Grid::cell_volume() const noexcept {
  double v = 1.0;
  for (int a = 0; a < dim_; ++a) v *= h_[a];
  return v;
}

double Grid::min_spacing() const noexcept { return *std::min_element(h_.begin(), h_.end()); }

std::array<int, 3> Grid::multi_index(std::size_t node) const noexcept {
  std::array<int, 3> idx{0, 0, 0};
  for (int a = 0; a < dim_; ++a) {
    idx[a] = static_cast<int>(node / stride_[a]);
    node %= stride_[a];
  }
  return idx;
}

std::size_t Grid::node_index(const std::array<int, 3>& idx) const noexcept {
  std::size_t node = 0;
  for (int a = 0; a < dim_; ++a) node += static_cast<std::size_t>(idx[a]) * stride_[a];
  return node;
}

double Grid::coord(std::size_t node, int axis) const noexcept {
  const auto i = static_cast<int>((node / stride_[axis]) % static_cast<std::size_t>(n_[axis]));
  return lo_[axis] + i * h_[axis];
}

void Grid::coords(std::size_t node, double* out) const noexcept {
  for (int a = 0; a < dim_; ++a) out[a] = coord(node, a);
}

Point Grid::point(std::size_t node) const {
  Point p(static_cast<std::size_t>(dim_));
  coords(node, p.data());
  return p;
}

std::size_t Grid::cell_base_node(std::size_t cell) const noexcept {
  std::size_t node = 0;
  for (int a = 0; a < dim_; ++a) {
    const std::size_t i = cell / cell_stride_[a];
    cell %= cell_stride_[a];
    node += i * stride_[a];
  }
  return node;
}

std::size_t Grid::cell_vertex(std::size_t cell, int v) const noexcept {
  return cell_base_node(cell) + vertex_offset_[static_cast<std::size_t>(v)];
}

double Grid::distance_to_boundary(std::size_t node) const noexcept {
  double d = std::numeric_limits<double>::infinity();
  for (int a = 0; a < dim_; ++a) {
    const double x = coord(node, a);
    d = std::min({d, x - lo_[a], hi_[a] - x});
  }
  return d;
}

double haar_measure_of(const Grid& grid, const std::vector<unsigned char>& mask) {
  if (mask.size() != grid.num_nodes()) throw InvalidArgument("haar_measure_of: mask size mismatch");
  double total = 0.0;
  for (std::size_t n = 0; n < mask.size(); ++n)
    if (mask[n]) total += grid.weight(n);
  return total;
}

// ---------------------------------------------------------------------------

ScalarField::ScalarField(std::shared_ptr<const Grid> grid)
    : grid_(std::move(grid)), values_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid_->num_nodes()))) {}

ScalarField::ScalarField(std::shared_ptr<const Grid> grid, Eigen::VectorXd values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (static_cast<std::size_t>(values_.size()) != grid_->num_nodes())
    throw InvalidArgument("ScalarField: value count does not match the grid");
}

ScalarField ScalarField::from_function(std::shared_ptr<const Grid> grid,
                                       const std::function<double(const double*)>& f) {
  ScalarField field(grid);
  double x[3];
  for (std::size_t n = 0; n < grid->num_nodes(); ++n) {
    grid->coords(n, x);
    field[n] = f(x);
  }
  return field;
}

bool ScalarField::all_finite() const noexcept { return values_.allFinite(); }

bool ScalarField::satisfies_dirichlet() const noexcept {
  for (std::size_t n = 0; n < size(); ++n)
    if (!grid_->is_interior(n) && values_[static_cast<Eigen::Index>(n)] != 0.0) return false;
  return true;
}

void ScalarField::apply_dirichlet() noexcept {
  for (std::size_t n = 0; n < size(); ++n)
    if (!grid_->is_interior(n)) values_[static_cast<Eigen::Index>(n)] = 0.0;
}

}  // namespace cfbp
