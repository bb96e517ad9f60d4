#include "bdhpd/pca.hpp"

#include <cmath>

#include "bdhpd/errors.hpp"

namespace bdhpd {

std::array<double, 2> Pca2::project(const std::vector<double>& row) const {
  std::array<double, 2> out{0.0, 0.0};
  for (std::size_t c = 0; c < 2; ++c)
    for (std::size_t j = 0; j < row.size(); ++j)
      out[c] += (row[j] - mean[j]) * components[c][j];
  return out;
}

Pca2 pca_top2(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw UsageError("pca: empty input");
  const std::size_t n = rows.size(), d = rows[0].size();
  if (d < 2) throw UsageError("pca: need at least 2 dimensions");

  Pca2 out;
  out.mean.assign(d, 0.0);
  for (const auto& r : rows)
    for (std::size_t j = 0; j < d; ++j) out.mean[j] += r[j];
  for (double& m : out.mean) m /= static_cast<double>(n);

  // covariance (population)
  std::vector<double> cov(d * d, 0.0);
  for (const auto& r : rows)
    for (std::size_t a = 0; a < d; ++a) {
      const double ca = r[a] - out.mean[a];
      for (std::size_t b = a; b < d; ++b) cov[a * d + b] += ca * (r[b] - out.mean[b]);
    }
  for (std::size_t a = 0; a < d; ++a)
    for (std::size_t b = a; b < d; ++b) {
      cov[a * d + b] /= static_cast<double>(n);
      cov[b * d + a] = cov[a * d + b];
    }

  // cyclic Jacobi eigendecomposition
  std::vector<double> vecs(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) vecs[i * d + i] = 1.0;
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < d; ++p)
      for (std::size_t q = p + 1; q < d; ++q) off += cov[p * d + q] * cov[p * d + q];
    if (off < 1e-24) break;
    for (std::size_t p = 0; p < d; ++p) {
      for (std::size_t q = p + 1; q < d; ++q) {
        const double apq = cov[p * d + q];
        if (std::fabs(apq) < 1e-300) continue;
        const double app = cov[p * d + p], aqq = cov[q * d + q];
        const double theta = 0.5 * std::atan2(2.0 * apq, aqq - app);
        const double c = std::cos(theta), s = std::sin(theta);
        for (std::size_t k = 0; k < d; ++k) {
          const double akp = cov[k * d + p], akq = cov[k * d + q];
          cov[k * d + p] = c * akp - s * akq;
          cov[k * d + q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < d; ++k) {
          const double apk = cov[p * d + k], aqk = cov[q * d + k];
          cov[p * d + k] = c * apk - s * aqk;
          cov[q * d + k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < d; ++k) {
          const double vkp = vecs[k * d + p], vkq = vecs[k * d + q];
          vecs[k * d + p] = c * vkp - s * vkq;
          vecs[k * d + q] = s * vkp + c * vkq;
        }
      }
    }
  }

  // pick the two largest eigenvalues
  std::array<std::size_t, 2> top{0, 0};
  std::array<double, 2> best{-1.0, -1.0};
  for (std::size_t j = 0; j < d; ++j) {
    const double ev = cov[j * d + j];
    if (ev > best[0]) {
      best[1] = best[0];
      top[1] = top[0];
      best[0] = ev;
      top[0] = j;
    } else if (ev > best[1]) {
      best[1] = ev;
      top[1] = j;
    }
  }
  for (std::size_t c = 0; c < 2; ++c) {
    out.eigenvalues[c] = best[c];
    out.components[c].resize(d);
    for (std::size_t k = 0; k < d; ++k) out.components[c][k] = vecs[k * d + top[c]];
    // sign convention: largest-magnitude loading is positive
    std::size_t arg = 0;
    for (std::size_t k = 1; k < d; ++k)
      if (std::fabs(out.components[c][k]) > std::fabs(out.components[c][arg])) arg = k;
    if (out.components[c][arg] < 0.0)
      for (double& v : out.components[c]) v = -v;
  }
  return out;
}

} // namespace bdhpd
