#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "satflow/dual.hpp"

namespace satflow {

template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using DualVec = Vec<Dual>;
using ResidualFn = std::function<DualVec(const DualVec&)>;

class JacobianError : public std::runtime_error {
 public:
  JacobianError(const std::string& what, Eigen::Index column)
      : std::runtime_error(what + " (column " + std::to_string(column) + ")"), column_(column) {}
  Eigen::Index column() const { return column_; }

 private:
  Eigen::Index column_;
};

/// Seeds `point` with unit direction `dir` (or with every column of one color).
inline DualVec seed(const Eigen::VectorXd& point, const Eigen::VectorXd& dir) {
  DualVec x(point.size());
  for (Eigen::Index i = 0; i < point.size(); ++i) x[i] = Dual{point[i], dir[i]};
  return x;
}

/// Dense Jacobian by column seeding: one residual evaluation per unknown.
inline Eigen::MatrixXd jacobian(const ResidualFn& residual, const Eigen::VectorXd& point) {
  const Eigen::Index n = point.size();
  Eigen::MatrixXd jac(n, n);
  Eigen::VectorXd dir = Eigen::VectorXd::Zero(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    dir[j] = 1.0;
    DualVec r;
    try {
      r = residual(seed(point, dir));
    } catch (const DualDomainError& e) {
      throw JacobianError(e.what(), j);
    }
    if (r.size() != n) throw JacobianError("residual is not square", j);
    for (Eigen::Index i = 0; i < n; ++i) jac(i, j) = r[i].der;
    dir[j] = 0.0;
  }
  return jac;
}

/// Greedy distance-2 coloring of a symmetric stencil graph.
///
/// `neighbors[i]` lists the cells adjacent to i (excluding i). Two columns
/// share a color only if no residual row depends on both.
std::vector<int> distance2_coloring(const std::vector<std::vector<int>>& neighbors);

/// Sparse Jacobian for a residual whose row i depends only on i and its
/// neighbors. One residual evaluation per color.
Eigen::SparseMatrix<double> colored_jacobian(const ResidualFn& residual,
                                             const Eigen::VectorXd& point,
                                             const std::vector<std::vector<int>>& neighbors,
                                             const std::vector<int>& colors);

}  // namespace satflow
