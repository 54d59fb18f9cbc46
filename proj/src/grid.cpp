#include "satflow/grid.hpp"

#include <cmath>
#include <numeric>
#include <utility>

namespace satflow {

MeshSpec::MeshSpec(std::vector<double> spacing) : spacing_(std::move(spacing)) {
  if (spacing_.empty() || static_cast<int>(spacing_.size()) > kMaxDim) {
    throw GridError("mesh dimension must be between 1 and " + std::to_string(kMaxDim));
  }
  for (double h : spacing_) {
    if (!(h > 0.0) || !std::isfinite(h)) throw GridError("mesh spacing must be positive");
  }
}

MeshSpec MeshSpec::uniform(int dimension, double h) {
  if (dimension < 1) throw GridError("mesh dimension must be between 1 and " + std::to_string(kMaxDim));
  return MeshSpec(std::vector<double>(static_cast<std::size_t>(dimension), h));
}

double MeshSpec::cell_volume() const {
  return std::accumulate(spacing_.begin(), spacing_.end(), 1.0, std::multiplies<>());
}

MeshSpec MeshSpec::halved() const {
  std::vector<double> half = spacing_;
  for (double& h : half) h *= 0.5;
  return MeshSpec(std::move(half));
}

double BoundingBox::volume() const { return (upper - lower).prod(); }

bool BoundingBox::contains(const Point& x) const {
  for (Eigen::Index k = 0; k < lower.size(); ++k) {
    if (x[k] < lower[k] || x[k] > upper[k]) return false;
  }
  return true;
}

DomainShape::DomainShape(std::string name, BoundingBox box, std::function<bool(const Point&)> predicate)
    : name_(std::move(name)), box_(std::move(box)), predicate_(std::move(predicate)) {
  if (box_.lower.size() != box_.upper.size() || box_.lower.size() < 1 || box_.lower.size() > kMaxDim) {
    throw GridError("bounding box has inconsistent dimension");
  }
  if (!box_.lower.allFinite() || !box_.upper.allFinite() || (box_.upper.array() <= box_.lower.array()).any()) {
    throw GridError("bounding box must be finite and non-degenerate");
  }
}

DomainShape DomainShape::interval(double a, double b) {
  return DomainShape("interval", {Point::Constant(1, a), Point::Constant(1, b)},
                     [a, b](const Point& x) { return x[0] > a && x[0] < b; });
}

DomainShape DomainShape::box(const Point& lower, const Point& upper) {
  return DomainShape("box", {lower, upper}, [lower, upper](const Point& x) {
    return (x.array() > lower.array()).all() && (x.array() < upper.array()).all();
  });
}

DomainShape DomainShape::ball(const Point& center, double radius) {
  if (!(radius > 0.0)) throw GridError("ball radius must be positive");
  const Point r = Point::Constant(center.size(), radius);
  return DomainShape("ball", {center - r, center + r},
                     [center, radius](const Point& x) { return (x - center).squaredNorm() < radius * radius; });
}

DomainShape DomainShape::peanut(double a, double r) {
  if (!(r > 0.0)) throw GridError("peanut radius must be positive");
  // |y| < r and x^2 < a + r bound the set.
  const double xmax = std::sqrt(std::max(a + r, 0.0));
  Point lo(2), hi(2);
  lo << -xmax, -r;
  hi << xmax, r;
  return DomainShape("peanut", {lo, hi}, [a, r](const Point& x) {
    const double s = x[0] * x[0] - a;
    return s * s + x[1] * x[1] < r * r;
  });
}

CellIndexSet::CellIndexSet(MeshSpec mesh, std::vector<MultiIndex> indices)
    : mesh_(std::move(mesh)), indices_(std::move(indices)) {
  if (indices_.empty()) throw GridError("domain resolves to zero cells at this spacing");
  const int d = mesh_.dimension();
  for (int pos = 0; pos < size(); ++pos) {
    if (pos > 0 && !(indices_[pos - 1] < indices_[pos])) {
      throw GridError("cell indices must be unique and lexicographically sorted");
    }
    lookup_.emplace(indices_[pos], pos);
  }
  adjacency_.assign(indices_.size(), {});
  for (int k = 0; k < d; ++k) {
    upper_[k].assign(indices_.size(), -1);
    lower_[k].assign(indices_.size(), -1);
  }
  for (int pos = 0; pos < size(); ++pos) {
    for (int k = 0; k < d; ++k) {
      MultiIndex next = indices_[pos];
      ++next[k];
      if (auto it = lookup_.find(next); it != lookup_.end()) {
        upper_[k][pos] = it->second;
        lower_[k][it->second] = pos;
        faces_.push_back({indices_[pos], k, pos, it->second});
        adjacency_[pos].push_back(it->second);
        adjacency_[it->second].push_back(pos);
      }
    }
  }
}

std::optional<int> CellIndexSet::find(const MultiIndex& i) const {
  if (auto it = lookup_.find(i); it != lookup_.end()) return it->second;
  return std::nullopt;
}

Point CellIndexSet::center_of(const MultiIndex& i) const {
  Point x(dimension());
  for (int k = 0; k < dimension(); ++k) x[k] = i[k] * mesh_.spacing(k);
  return x;
}

Point CellIndexSet::center(int pos) const { return center_of(indices_[pos]); }

std::optional<int> CellIndexSet::locate(const Point& x) const {
  MultiIndex i{};
  for (int k = 0; k < dimension(); ++k) {
    i[k] = static_cast<int>(std::floor(x[k] / mesh_.spacing(k) + 0.5));
  }
  return find(i);
}

CellIndexSet build_index_set(const MeshSpec& mesh, const DomainShape& domain) {
  const int d = mesh.dimension();
  if (domain.dimension() != d) throw GridError("mesh and domain dimensions differ");
  const BoundingBox& box = domain.bounding_box();

  MultiIndex first{}, last{};
  for (int k = 0; k < d; ++k) {
    first[k] = static_cast<int>(std::ceil(box.lower[k] / mesh.spacing(k)));
    last[k] = static_cast<int>(std::floor(box.upper[k] / mesh.spacing(k)));
    if (last[k] < first[k]) throw GridError("domain resolves to zero cells at this spacing");
  }

  std::vector<MultiIndex> indices;
  MultiIndex i = first;
  Point x(d);
  // Odometer over the box with axis 0 slowest, which yields lexicographic order.
  while (true) {
    for (int k = 0; k < d; ++k) x[k] = i[k] * mesh.spacing(k);
    if (domain.contains(x)) indices.push_back(i);
    int k = d - 1;
    while (k >= 0 && i[k] == last[k]) {
      i[k] = first[k];
      --k;
    }
    if (k < 0) break;
    ++i[k];
  }
  return CellIndexSet(mesh, std::move(indices));
}

std::vector<Face> interior_faces(const CellIndexSet& cells) { return cells.faces(); }

double interpolate_piecewise(const CellIndexSet& cells, std::span<const Eigen::VectorXd> levels,
                             double tau, double t, const Point& x) {
  if (levels.size() < 2) throw GridError("trajectory needs at least one computed level");
  const double n_steps = static_cast<double>(levels.size() - 1);
  if (!(t >= 0.0) || !(t < n_steps * tau)) throw GridError("time outside the computed trajectory");
  auto slab = static_cast<std::size_t>(std::floor(t / tau));
  slab = std::min(slab, levels.size() - 2);
  const auto pos = cells.locate(x);
  if (!pos) return 0.0;
  return levels[slab + 1][*pos];
}

}  // namespace satflow
