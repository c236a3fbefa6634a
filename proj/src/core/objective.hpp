#pragma once

#include <span>

#include "core/matrix.hpp"
#include "core/regularizer.hpp"

namespace feta {

// Captured input/output pairs for one dense layer: inputs (m x d1) feed the
// layer, outputs (m x d2) are its post-ReLU responses. Rows are samples.
struct LayerData {
  Matrix inputs;
  Matrix outputs;

  LayerData(Matrix in, Matrix out);

  std::size_t samples() const { return inputs.rows(); }
  std::size_t d1() const { return inputs.cols(); }
  std::size_t d2() const { return outputs.cols(); }
};

// Parameters of the smooth ReLU surrogate rho(x) = log(1 + exp(beta x)) / beta.
// Larger beta tracks the exact ReLU more closely; beta = 20 keeps the gap
// below log(2)/20 ~ 0.035 while staying well-conditioned.
struct SmoothReluParams {
  double beta = 20.0;
};

// Overflow-safe softplus and its derivative (the logistic sigmoid of beta*x).
double softplus(double x, const SmoothReluParams& p);
double softplus_grad(double x, const SmoothReluParams& p);

// The layer reconstruction loss sum_j ||rho(UT a_j) - b_j||^2 splits into a
// difference of two convex functions, g - h:
//
//   g(U) = sum_j sum_i [ rho(u_iT a_j)^2 + b_ji^2 ]  +  sum_{j,i: b_ji < 0} -2 b_ji rho(u_iT a_j)
//   h(U) = sum_{j,i: b_ji >= 0} 2 b_ji rho(u_iT a_j)
//
// Nonnegative outputs (the usual case, post-ReLU captures) put all the cross
// terms into h; negative targets keep their convex cross terms inside g.
double g_value(const Matrix& u, const LayerData& data, const SmoothReluParams& p);
double h_value(const Matrix& u, const LayerData& data, const SmoothReluParams& p);
Matrix grad_g(const Matrix& u, const LayerData& data, const SmoothReluParams& p);
Matrix grad_h(const Matrix& u, const LayerData& data, const SmoothReluParams& p);

// Same quantities restricted to a row subset of the data (minibatches).
double g_value_rows(const Matrix& u, const LayerData& data, const SmoothReluParams& p,
                    std::span<const std::size_t> rows);
Matrix grad_g_rows(const Matrix& u, const LayerData& data, const SmoothReluParams& p,
                   std::span<const std::size_t> rows);
Matrix grad_h_rows(const Matrix& u, const LayerData& data, const SmoothReluParams& p,
                   std::span<const std::size_t> rows);

// Full composite objective g - h + lambda * penalty (smoothed loss).
double f_value(const Matrix& u, const LayerData& data, const SmoothReluParams& p,
               const Regularizer& reg);

// Exact-ReLU counterparts, used for reporting and as test oracles; the
// identity g - h == sum_j ||max(0, UT a_j) - b_j||^2 holds exactly there.
double g_value_relu(const Matrix& u, const LayerData& data);
double h_value_relu(const Matrix& u, const LayerData& data);
double reconstruction_loss_relu(const Matrix& u, const LayerData& data);  // summed
double layer_mse_relu(const Matrix& u, const LayerData& data);            // per-sample mean

}  // namespace feta
