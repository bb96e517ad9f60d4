#ifndef BDHPD_PCA_HPP
#define BDHPD_PCA_HPP

#include <array>
#include <cstddef>
#include <vector>

namespace bdhpd {

// Top-2 principal components of a set of row vectors. Deterministic: the
// eigensolver is cyclic Jacobi on the covariance matrix and each component's
// sign is fixed by forcing its largest-magnitude loading positive.
struct Pca2 {
  std::vector<double> mean;
  std::array<std::vector<double>, 2> components;
  std::array<double, 2> eigenvalues{};

  std::array<double, 2> project(const std::vector<double>& row) const;
};

Pca2 pca_top2(const std::vector<std::vector<double>>& rows);

} // namespace bdhpd

#endif
