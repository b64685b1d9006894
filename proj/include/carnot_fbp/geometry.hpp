#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace cfbp {

using Point = std::vector<double>;

enum class GroupKind { euclid1, euclid2, euclid3, heis1 };

std::string to_string(GroupKind kind);
GroupKind group_kind_from_string(const std::string& name);

/// A homogeneous stratified group on R^N, described by its dilation exponents
/// and the horizontal frame Z_1..Z_{N1}. Frame coefficients are affine in the
/// point, c_ik(x) = c0_ik + sum_m c1_ikm x_m, which covers the Euclidean
/// spaces and the Heisenberg group H^1.
class GroupModel {
public:
  static GroupModel euclidean(int dim);
  static GroupModel heisenberg();
  static GroupModel from_kind(GroupKind kind);

  int ambient_dim() const noexcept { return dim_; }
  int num_generators() const noexcept { return gens_; }
  const std::vector<int>& dilation_exponents() const noexcept { return r_; }
  int homogeneous_dimension() const noexcept;
  const std::string& name() const noexcept { return name_; }
  bool constant_frame() const noexcept { return constant_; }

  /// T_d(x) = (d^{r_1} x_1, ..., d^{r_N} x_N).
  Point dilate(std::span<const double> x, double d) const;

  /// Row i holds the coefficients of Z_i at x.
  std::vector<Point> frame_at(std::span<const double> x) const;

  /// Allocation-free variant; out has num_generators * ambient_dim entries,
  /// row-major by generator.
  void frame_into(const double* x, double* out) const noexcept;

private:
  GroupModel(int dim, int gens, std::vector<int> r, std::string name);

  int dim_;
  int gens_;
  std::vector<int> r_;
  std::vector<double> c0_;  // gens x dim
  std::vector<double> c1_;  // gens x dim x dim
  std::string name_;
  bool constant_ = true;
};

/// Uniform tensor grid on an axis-aligned box. Nodes are numbered row-major
/// (last axis fastest). Boundary nodes carry the Dirichlet value 0.
class Grid {
public:
  Grid(Point lo, Point hi, std::vector<int> nodes_per_axis);

  int dim() const noexcept { return dim_; }
  int nodes(int axis) const { return n_[axis]; }
  double spacing(int axis) const { return h_[axis]; }
  const Point& lo() const noexcept { return lo_; }
  const Point& hi() const noexcept { return hi_; }
  double volume() const noexcept;
  double cell_volume() const noexcept;
  double min_spacing() const noexcept;

  std::size_t num_nodes() const noexcept { return num_nodes_; }
  std::size_t num_cells() const noexcept { return num_cells_; }
  std::size_t num_dofs() const noexcept { return dof_to_node_.size(); }

  std::array<int, 3> multi_index(std::size_t node) const noexcept;
  std::size_t node_index(const std::array<int, 3>& idx) const noexcept;
  std::size_t stride(int axis) const noexcept { return stride_[axis]; }
  double coord(std::size_t node, int axis) const noexcept;
  void coords(std::size_t node, double* out) const noexcept;
  Point point(std::size_t node) const;

  bool is_interior(std::size_t node) const noexcept { return interior_[node] != 0; }
  const std::vector<unsigned char>& interior_mask() const noexcept { return interior_; }
  double weight(std::size_t node) const noexcept { return weight_[node]; }
  const Eigen::VectorXd& haar_weights() const noexcept { return weight_; }

  /// Dof numbering of the interior nodes; -1 on the boundary.
  long dof(std::size_t node) const noexcept { return node_to_dof_[node]; }
  std::size_t node_of_dof(std::size_t dof) const noexcept { return dof_to_node_[dof]; }

  /// Lowest-corner node of a cell; vertex v of the cell sits at offset bit a of
  /// v along axis a.
  std::size_t cell_base_node(std::size_t cell) const noexcept;
  std::size_t cell_vertex(std::size_t cell, int v) const noexcept;
  int vertices_per_cell() const noexcept { return 1 << dim_; }

  /// Euclidean distance from a node to the box boundary.
  double distance_to_boundary(std::size_t node) const noexcept;

private:
  int dim_;
  Point lo_, hi_;
  std::vector<int> n_;
  std::vector<double> h_;
  std::array<std::size_t, 3> stride_{};
  std::array<std::size_t, 3> cell_stride_{};
  std::size_t num_nodes_ = 0;
  std::size_t num_cells_ = 0;
  std::vector<unsigned char> interior_;
  Eigen::VectorXd weight_;
  std::vector<long> node_to_dof_;
  std::vector<std::size_t> dof_to_node_;
  std::vector<std::size_t> vertex_offset_;
};

/// Sum of Haar weights over the masked nodes.
double haar_measure_of(const Grid& grid, const std::vector<unsigned char>& mask);

/// Nodal values of a scalar function on a grid.
class ScalarField {
public:
  ScalarField() = default;
  explicit ScalarField(std::shared_ptr<const Grid> grid);
  ScalarField(std::shared_ptr<const Grid> grid, Eigen::VectorXd values);

  static ScalarField from_function(std::shared_ptr<const Grid> grid,
                                   const std::function<double(const double*)>& f);

  const Grid& grid() const noexcept { return *grid_; }
  const std::shared_ptr<const Grid>& grid_ptr() const noexcept { return grid_; }
  Eigen::VectorXd& values() noexcept { return values_; }
  const Eigen::VectorXd& values() const noexcept { return values_; }
  double operator[](std::size_t node) const noexcept { return values_[static_cast<Eigen::Index>(node)]; }
  double& operator[](std::size_t node) noexcept { return values_[static_cast<Eigen::Index>(node)]; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(values_.size()); }

  bool all_finite() const noexcept;
  /// Boundary nodes hold exactly zero.
  bool satisfies_dirichlet() const noexcept;
  void apply_dirichlet() noexcept;

private:
  std::shared_ptr<const Grid> grid_;
  Eigen::VectorXd values_;
};

}  // namespace cfbp
