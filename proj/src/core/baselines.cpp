#include "core/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "core/errors.hpp"
#include "core/svd.hpp"

namespace feta {

Matrix hard_threshold(const Matrix& w, double threshold) {
  if (threshold < 0.0 || !std::isfinite(threshold)) {
    throw ValidationError("hard_threshold: threshold must be finite and >= 0");
  }
  Matrix out = w;
  double* p = out.data();
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!(std::fabs(p[i]) > threshold)) p[i] = 0.0;
  }
  return out;
}

double threshold_for_sparsity(const Matrix& w, double target_sparsity) {
  if (w.empty()) throw DimensionError("threshold_for_sparsity: empty matrix");
  if (!(target_sparsity >= 0.0 && target_sparsity <= 1.0)) {
    throw ValidationError("threshold_for_sparsity: target must lie in [0, 1]");
  }
  const std::size_t n = w.size();
  const std::size_t k =
      static_cast<std::size_t>(std::ceil(target_sparsity * static_cast<double>(n)));
  if (k == 0) return 0.0;

  std::vector<double> mags(n);
  const double* p = w.data();
  for (std::size_t i = 0; i < n; ++i) mags[i] = std::fabs(p[i]);
  std::nth_element(mags.begin(), mags.begin() + (k - 1), mags.end());
  return mags[k - 1];  // k-th smallest magnitude; thresholding at it kills >= k entries
}

double zero_fraction(const Matrix& w) {
  if (w.empty()) return 0.0;
  std::size_t zeros = 0;
  const double* p = w.data();
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (p[i] == 0.0) ++zeros;
  }
  return static_cast<double>(zeros) / static_cast<double>(w.size());
}

LowRankFactors truncated_svd(const Matrix& w, std::size_t k) {
  if (w.empty()) throw DimensionError("truncated_svd: empty matrix");
  const std::size_t full = std::min(w.rows(), w.cols());
  if (k == 0 || k > full) {
    throw ValidationError("truncated_svd: rank " + std::to_string(k) + " outside [1, " +
                          std::to_string(full) + "]");
  }
  const SvdResult s = svd(w);
  LowRankFactors f;
  f.left = Matrix(w.rows(), k);
  f.right = Matrix(w.cols(), k);
  for (std::size_t j = 0; j < k; ++j) {
    const double sv = s.singular_values[j];
    for (std::size_t i = 0; i < w.rows(); ++i) f.left(i, j) = s.left(i, j) * sv;
    for (std::size_t i = 0; i < w.cols(); ++i) f.right(i, j) = s.right(i, j);
  }
  return f;
}

Matrix low_rank_reconstruct(const LowRankFactors& f) {
  return matmul_a_bt(f.left, f.right);
}

double compression_ratio(std::size_t d1, std::size_t d2, std::size_t k) {
  if (d1 == 0 || d2 == 0) throw ValidationError("compression_ratio: zero dimensions");
  const double stored = static_cast<double>(k * d1 + k + k * d2);
  return stored / static_cast<double>(d1 * d2);
}

}  // namespace feta
