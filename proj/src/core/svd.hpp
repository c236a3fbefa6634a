#pragma once

#include <vector>

#include "core/matrix.hpp"

namespace feta {

// Full thin SVD: m = left * diag(singular_values) * rightT.
// left is rows x k, right is cols x k with k = min(rows, cols); columns of
// both factors are orthonormal and singular values are sorted nonincreasing.
struct SvdResult {
  Matrix left;
  std::vector<double> singular_values;
  Matrix right;
};

// One-sided Jacobi (Hestenes) SVD. Chosen over bringing in a linear-algebra
// dependency: the matrices here are small-to-moderate and Jacobi gives high
// relative accuracy with very little code.
SvdResult svd(const Matrix& m);

Matrix svd_reconstruct(const SvdResult& s);

// Largest singular value via power iteration on mT m (relative accuracy
// ~1e-8, capped at 1000 iterations). Deterministic all-ones start vector
// with a fixed perturbation fallback if that start lies in the null space.
double spectral_norm(const Matrix& m);

}  // namespace feta
