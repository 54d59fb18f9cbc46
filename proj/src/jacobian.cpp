#include "satflow/jacobian.hpp"

#include <algorithm>

namespace satflow {

std::vector<int> distance2_coloring(const std::vector<std::vector<int>>& neighbors) {
  const auto n = static_cast<int>(neighbors.size());
  std::vector<int> colors(n, -1);
  std::vector<int> banned_by(n + 1, -1);
  for (int i = 0; i < n; ++i) {
    auto ban = [&](int j) {
      if (colors[j] >= 0) banned_by[colors[j]] = i;
    };
    for (int j : neighbors[i]) {
      ban(j);
      for (int k : neighbors[j]) ban(k);
    }
    int c = 0;
    while (banned_by[c] == i) ++c;
    colors[i] = c;
  }
  return colors;
}

Eigen::SparseMatrix<double> colored_jacobian(const ResidualFn& residual,
                                             const Eigen::VectorXd& point,
                                             const std::vector<std::vector<int>>& neighbors,
                                             const std::vector<int>& colors) {
  const Eigen::Index n = point.size();
  const int n_colors = colors.empty() ? 0 : *std::max_element(colors.begin(), colors.end()) + 1;

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(n) * 5);
  Eigen::VectorXd dir(n);
  for (int c = 0; c < n_colors; ++c) {
    for (Eigen::Index j = 0; j < n; ++j) dir[j] = colors[j] == c ? 1.0 : 0.0;
    DualVec r;
    try {
      r = residual(seed(point, dir));
    } catch (const DualDomainError& e) {
      throw JacobianError(e.what(), c);
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      // Row i picks up only the single column of color c in its stencil.
      if (colors[i] == c) triplets.emplace_back(i, i, r[i].der);
      for (int j : neighbors[i]) {
        if (colors[j] == c) triplets.emplace_back(i, j, r[i].der);
      }
    }
  }
  Eigen::SparseMatrix<double> jac(n, n);
  jac.setFromTriplets(triplets.begin(), triplets.end());
  return jac;
}

}  // namespace satflow
