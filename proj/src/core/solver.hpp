#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "core/errors.hpp"
#include "core/matrix.hpp"
#include "core/regularizer.hpp"

namespace feta {

// Smooth part of a composite objective, presented through callables so the
// solver stays independent of any particular loss. minibatch_gradient must be
// an unbiased estimator of full_gradient that reduces to it exactly when
// handed every index. full_value is used for step-size fallback and traces.
struct SmoothOracle {
  std::function<Matrix(const Matrix&)> full_gradient;
  std::function<Matrix(const Matrix&, std::span<const std::size_t>)> minibatch_gradient;
  std::function<double(const Matrix&)> full_value;
  std::size_t sample_count = 0;
};

struct SolverParams {
  std::size_t epochs = 3;       // outer snapshot rounds
  std::size_t inner_steps = 0;  // per epoch; 0 means ceil(samples / minibatch)
  double step_eta = 0.0;        // 0 means auto: 1e-3 with 1e-4 fallback
  double momentum_beta = 0.95;
  std::size_t minibatch = 128;  // clamped to the sample count
  std::uint64_t seed = 0;
};

// Accelerated proximal SVRG for min_x  smooth(x) + lambda * Omega(x).
//
// Each epoch takes a full-gradient snapshot at x~, then runs inner_steps
// variance-reduced proximal steps with Nesterov-style extrapolation:
//
//   u_t     = grad_mb(y_t) - grad_mb(x~) + grad(x~)
//   x_{t+1} = prox_{eta lambda Omega}(y_t - eta u_t)
//   y_{t+1} = x_{t+1} + momentum * (x_{t+1} - x_t)
//
// The epoch ends by promoting the last iterate to the next snapshot.
// Minibatches are drawn without replacement per step; momentum restarts at
// every epoch. With step_eta = 0 the solver tries 1e-3 and restarts from
// init with 1e-4 if the first epoch raised the objective by more than 10%.
//
// If epoch_objectives is non-null it receives the composite objective at
// init and after every epoch of the final (accepted) run.
Matrix acc_prox_svrg(const SmoothOracle& oracle, const Regularizer& reg, const Matrix& init,
                     const SolverParams& params, std::vector<double>* epoch_objectives = nullptr);

}  // namespace feta
