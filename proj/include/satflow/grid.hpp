#pragma once

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace satflow {

inline constexpr int kMaxDim = 3;

using MultiIndex = std::array<int, kMaxDim>;
using Point = Eigen::VectorXd;

class GridError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Tensor grid spacing h = (h_1, ..., h_d). Cell i is centered at (i_1 h_1, ..., i_d h_d).
class MeshSpec {
 public:
  explicit MeshSpec(std::vector<double> spacing);
  static MeshSpec uniform(int dimension, double h);

  int dimension() const { return static_cast<int>(spacing_.size()); }
  double spacing(int axis) const { return spacing_[axis]; }
  const std::vector<double>& spacings() const { return spacing_; }
  double cell_volume() const;
  MeshSpec halved() const;

 private:
  std::vector<double> spacing_;
};

struct BoundingBox {
  Point lower;
  Point upper;
  double volume() const;
  bool contains(const Point& x) const;
};

/// An open domain given by a membership predicate inside a bounding box.
class DomainShape {
 public:
  DomainShape(std::string name, BoundingBox box, std::function<bool(const Point&)> predicate);

  static DomainShape interval(double a, double b);
  static DomainShape box(const Point& lower, const Point& upper);
  static DomainShape ball(const Point& center, double radius);
  /// {(x, y) : (x^2 - a)^2 + y^2 < r^2}
  static DomainShape peanut(double a = 3.9, double r = 4.0);

  const std::string& name() const { return name_; }
  const BoundingBox& bounding_box() const { return box_; }
  int dimension() const { return static_cast<int>(box_.lower.size()); }
  /// Never true outside the bounding box.
  bool contains(const Point& x) const { return box_.contains(x) && predicate_(x); }

 private:
  std::string name_;
  BoundingBox box_;
  std::function<bool(const Point&)> predicate_;
};

/// Interior face between dense cells `lower` (multi-index `cell`) and `upper` (cell + e_axis).
struct Face {
  MultiIndex cell{};
  int axis = 0;
  int lower = -1;
  int upper = -1;
};

/// Admissible cells of a mesh over a domain, in lexicographic order.
class CellIndexSet {
 public:
  CellIndexSet(MeshSpec mesh, std::vector<MultiIndex> indices);

  const MeshSpec& mesh() const { return mesh_; }
  int dimension() const { return mesh_.dimension(); }
  int size() const { return static_cast<int>(indices_.size()); }
  double cell_volume() const { return mesh_.cell_volume(); }
  double spacing(int axis) const { return mesh_.spacing(axis); }

  const std::vector<MultiIndex>& indices() const { return indices_; }
  const MultiIndex& index(int pos) const { return indices_[pos]; }
  std::optional<int> find(const MultiIndex& i) const;
  Point center(int pos) const;
  Point center_of(const MultiIndex& i) const;

  /// Dense position of i + e_axis (or i - e_axis), or -1 when not admissible.
  int upper_neighbor(int pos, int axis) const { return upper_[axis][pos]; }
  int lower_neighbor(int pos, int axis) const { return lower_[axis][pos]; }
  /// All admissible axis-neighbors of each cell.
  const std::vector<std::vector<int>>& adjacency() const { return adjacency_; }
  const std::vector<Face>& faces() const { return faces_; }

  /// Dense position of the cell whose closed box contains x, if admissible.
  std::optional<int> locate(const Point& x) const;

 private:
  MeshSpec mesh_;
  std::vector<MultiIndex> indices_;
  std::map<MultiIndex, int> lookup_;
  std::array<std::vector<int>, kMaxDim> upper_;
  std::array<std::vector<int>, kMaxDim> lower_;
  std::vector<std::vector<int>> adjacency_;
  std::vector<Face> faces_;
};

/// Cells whose centers lie inside the domain.
CellIndexSet build_index_set(const MeshSpec& mesh, const DomainShape& domain);

/// Faces with both cells admissible; each appears once.
std::vector<Face> interior_faces(const CellIndexSet& cells);

/// Piecewise-constant space-time interpolant of a trajectory.
///
/// `levels[0]` is the initial datum; on [n tau, (n+1) tau) the value is
/// levels[n+1] on the cell containing x, and 0 outside the admissible cells.
double interpolate_piecewise(const CellIndexSet& cells, std::span<const Eigen::VectorXd> levels,
                             double tau, double t, const Point& x);

}  // namespace satflow
