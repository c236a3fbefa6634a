#pragma once

#include "core/matrix.hpp"

namespace feta {

enum class RegKind {
  None,
  L1,       // entrywise soft thresholding, promotes sparsity
  Nuclear,  // singular-value soft thresholding, promotes low rank
};

// Convex penalty lambda * Omega(U) together with its proximal operator.
// When exclude_last_row is set the last row of U is treated as a folded-in
// bias: it contributes nothing to the penalty and passes through the prox
// untouched.
struct Regularizer {
  RegKind kind = RegKind::None;
  double lambda = 0.0;
  bool exclude_last_row = false;
};

double penalty(const Regularizer& reg, const Matrix& u);  // Omega(U), without lambda

// prox_{step * lambda * Omega}(v) = argmin_x  0.5 ||x - v||_F^2 + step * lambda * Omega(x)
Matrix prox(const Regularizer& reg, const Matrix& v, double step);

}  // namespace feta
