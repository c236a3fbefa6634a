#include "core/svd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "core/errors.hpp"

namespace feta {

namespace {

constexpr int kMaxSweeps = 60;
constexpr double kOrthTol = 1e-13;      // relative column-orthogonality target
constexpr double kRankTol = 1e-14;      // sigma_i <= tol * sigma_max counts as zero

double column_dot(const Matrix& m, std::size_t p, std::size_t q) {
  double acc = 0.0;
  for (std::size_t i = 0; i < m.rows(); ++i) acc += m(i, p) * m(i, q);
  return acc;
}

void rotate_columns(Matrix& m, std::size_t p, std::size_t q, double c, double s) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double mp = m(i, p);
    const double mq = m(i, q);
    m(i, p) = c * mp - s * mq;
    m(i, q) = s * mp + c * mq;
  }
}

// Orthonormal completion for columns whose singular value vanished: take the
// standard basis vector farthest from the span of the existing columns and
// Gram-Schmidt it in. Deterministic by construction. Requiring a *good*
// candidate (rather than the first passable one) matters when most of the
// basis is degenerate: the leftover complement can spread so thin that every
// individual coordinate vector keeps only a small residual.
void complete_column(Matrix& u, std::size_t col) {
  const std::size_t m = u.rows();
  // Residual mass of e_b against the current columns is 1 - sum_j u(b,j)^2.
  std::size_t best = 0;
  double best_mass = -1.0;
  for (std::size_t b = 0; b < m; ++b) {
    double row_mass = 0.0;
    for (std::size_t j = 0; j < u.cols(); ++j) {
      if (j == col) continue;
      row_mass += u(b, j) * u(b, j);
    }
    if (1.0 - row_mass > best_mass) {
      best_mass = 1.0 - row_mass;
      best = b;
    }
  }
  std::vector<double> v(m, 0.0);
  v[best] = 1.0;
  // Two projection passes keep the result orthogonal even when the residual
  // is small and one pass would leave O(eps/norm) contamination.
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t j = 0; j < u.cols(); ++j) {
      if (j == col) continue;
      double proj = 0.0;
      for (std::size_t i = 0; i < m; ++i) proj += u(i, j) * v[i];
      for (std::size_t i = 0; i < m; ++i) v[i] -= proj * u(i, j);
    }
  }
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  if (norm <= 1e-8) throw ValidationError("svd: failed to complete orthonormal basis");
  for (std::size_t i = 0; i < m; ++i) u(i, col) = v[i] / norm;
}

SvdResult svd_tall(const Matrix& input) {
  // Hestenes: orthogonalize the columns of W = input by plane rotations,
  // accumulating them into V; then sigma_j = ||w_j|| and u_j = w_j / sigma_j.
  Matrix w = input;
  const std::size_t n = w.cols();
  Matrix v = Matrix::identity(n);

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool converged = true;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double alpha = column_dot(w, p, p);
        const double beta = column_dot(w, q, q);
        const double gamma = column_dot(w, p, q);
        if (gamma == 0.0) continue;
        if (std::fabs(gamma) <= kOrthTol * std::sqrt(alpha * beta)) continue;
        converged = false;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) /
                         (std::fabs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        rotate_columns(w, p, q, c, s);
        rotate_columns(v, p, q, c, s);
      }
    }
    if (converged) break;
  }

  std::vector<double> sigma(n);
  for (std::size_t j = 0; j < n; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < w.rows(); ++i) acc += w(i, j) * w(i, j);
    sigma[j] = std::sqrt(acc);
  }

  // Sort nonincreasing (stable for ties) and permute factors accordingly.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return sigma[a] > sigma[b]; });

  SvdResult result;
  result.left = Matrix(w.rows(), n);
  result.right = Matrix(n, n);
  result.singular_values.resize(n);
  const double sigma_max = sigma.empty() ? 0.0 : sigma[order[0]];
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t src = order[j];
    result.singular_values[j] = sigma[src];
    for (std::size_t i = 0; i < n; ++i) result.right(i, j) = v(i, src);
    if (sigma[src] > kRankTol * sigma_max && sigma[src] > 0.0) {
      for (std::size_t i = 0; i < w.rows(); ++i) result.left(i, j) = w(i, src) / sigma[src];
    }
  }
  // Degenerate columns get an orthonormal completion (their sigma stays as
  // computed, which is zero or negligible).
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t src = order[j];
    if (!(sigma[src] > kRankTol * sigma_max && sigma[src] > 0.0)) {
      complete_column(result.left, j);
    }
  }
  return result;
}

}  // namespace

SvdResult svd(const Matrix& m) {
  if (m.empty()) throw DimensionError("svd: empty matrix");
  if (m.rows() >= m.cols()) return svd_tall(m);
  SvdResult t = svd_tall(transpose(m));
  return SvdResult{std::move(t.right), std::move(t.singular_values), std::move(t.left)};
}

Matrix svd_reconstruct(const SvdResult& s) {
  Matrix scaled = s.left;
  for (std::size_t i = 0; i < scaled.rows(); ++i) {
    for (std::size_t j = 0; j < scaled.cols(); ++j) scaled(i, j) *= s.singular_values[j];
  }
  return matmul_a_bt(scaled, s.right);
}

double spectral_norm(const Matrix& m) {
  if (m.empty()) throw DimensionError("spectral_norm: empty matrix");
  const std::size_t n = m.cols();

  std::vector<double> v(n, 1.0 / std::sqrt(static_cast<double>(n)));
  auto iterate = [&](std::vector<double>& vec) -> double {
    // One power step on mT m; returns ||m v|| for the *input* vector.
    std::vector<double> w(m.rows(), 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
      const double* mi = m.row(i);
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += mi[j] * vec[j];
      w[i] = acc;
    }
    double wnorm = 0.0;
    for (double x : w) wnorm += x * x;
    wnorm = std::sqrt(wnorm);

    std::vector<double> next(n, 0.0);
    for (std::size_t i = 0; i < m.rows(); ++i) {
      const double* mi = m.row(i);
      const double wi = w[i];
      if (wi == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) next[j] += mi[j] * wi;
    }
    double nnorm = 0.0;
    for (double x : next) nnorm += x * x;
    nnorm = std::sqrt(nnorm);
    if (nnorm > 0.0) {
      for (std::size_t j = 0; j < n; ++j) vec[j] = next[j] / nnorm;
    }
    return wnorm;
  };

  double estimate = iterate(v);
  if (estimate == 0.0) {
    // All-ones start may sit in the null space; perturb once and retry.
    for (std::size_t j = 0; j < n; ++j) v[j] = 1.0 + 1e-12 * static_cast<double>(j + 1);
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
    estimate = iterate(v);
    if (estimate == 0.0) return 0.0;  // genuinely the zero matrix
  }

  for (int it = 0; it < 1000; ++it) {
    const double next = iterate(v);
    const double change = std::fabs(next - estimate);
    estimate = next;
    if (change <= 1e-9 * std::max(estimate, 1e-300)) break;
  }
  return estimate;
}

}  // namespace feta
