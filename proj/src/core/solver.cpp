#include "core/solver.hpp"

#include <cmath>
#include <utility>

#include "core/rng.hpp"

namespace feta {

namespace {

struct RunOutcome {
  Matrix result;
  bool first_epoch_regressed = false;
};

double composite_value(const SmoothOracle& oracle, const Regularizer& reg, const Matrix& x) {
  return oracle.full_value(x) + reg.lambda * penalty(reg, x);
}

RunOutcome run_once(const SmoothOracle& oracle, const Regularizer& reg, const Matrix& init,
                    const SolverParams& p, double eta, bool detect_regression,
                    std::vector<double>* epoch_objectives) {
  const std::size_t m = oracle.sample_count;
  const std::size_t mb = std::min(std::max<std::size_t>(p.minibatch, 1), m);
  const std::size_t steps =
      p.inner_steps > 0 ? p.inner_steps : (m + mb - 1) / mb;  // ceil(m / mb)

  Rng rng(p.seed);
  Matrix snapshot = init;
  double value_before = 0.0;
  if (detect_regression || epoch_objectives) {
    value_before = composite_value(oracle, reg, snapshot);
  }
  if (epoch_objectives) {
    epoch_objectives->clear();
    epoch_objectives->push_back(value_before);
  }

  RunOutcome out;
  for (std::size_t epoch = 0; epoch < p.epochs; ++epoch) {
    const Matrix snapshot_grad = oracle.full_gradient(snapshot);
    if (!snapshot_grad.all_finite()) {
      throw DivergedError("solver: non-finite snapshot gradient", std::move(snapshot));
    }

    Matrix x = snapshot;
    Matrix y = snapshot;
    for (std::size_t t = 0; t < steps; ++t) {
      const auto batch = rng.sample_without_replacement(m, mb);
      Matrix direction = oracle.minibatch_gradient(y, batch);
      const Matrix correction = oracle.minibatch_gradient(snapshot, batch);
      axpy(-1.0, correction, direction);
      axpy(1.0, snapshot_grad, direction);
      if (!direction.all_finite()) {
        throw DivergedError("solver: non-finite search direction", std::move(x));
      }

      Matrix shifted = y;
      axpy(-eta, direction, shifted);
      Matrix x_next = prox(reg, shifted, eta);

      y = x_next;
      axpy(p.momentum_beta, x_next, y);
      axpy(-p.momentum_beta, x, y);
      x = std::move(x_next);
    }
    if (!x.all_finite()) throw DivergedError("solver: non-finite iterate", std::move(snapshot));
    snapshot = std::move(x);

    if ((detect_regression && epoch == 0) || epoch_objectives) {
      const double value_now = composite_value(oracle, reg, snapshot);
      if (epoch_objectives) epoch_objectives->push_back(value_now);
      if (detect_regression && epoch == 0 &&
          (!std::isfinite(value_now) ||
           value_now > value_before + 0.1 * std::fabs(value_before) + 1e-15)) {
        out.first_epoch_regressed = true;
        out.result = std::move(snapshot);
        return out;  // caller restarts with the fallback step size
      }
    }
  }
  out.result = std::move(snapshot);
  return out;
}

}  // namespace

Matrix acc_prox_svrg(const SmoothOracle& oracle, const Regularizer& reg, const Matrix& init,
                     const SolverParams& params, std::vector<double>* epoch_objectives) {
  if (!oracle.full_gradient || !oracle.minibatch_gradient || !oracle.full_value) {
    throw ValidationError("solver: oracle callbacks must all be set");
  }
  if (oracle.sample_count == 0) throw ValidationError("solver: oracle has no samples");
  if (params.epochs == 0) throw ValidationError("solver: epochs must be >= 1");
  if (params.step_eta < 0.0 || !std::isfinite(params.step_eta)) {
    throw ValidationError("solver: step size must be finite and >= 0");
  }
  if (params.momentum_beta < 0.0 || params.momentum_beta >= 1.0) {
    throw ValidationError("solver: momentum must lie in [0, 1)");
  }
  if (init.empty()) throw ValidationError("solver: empty initial iterate");

  if (params.step_eta > 0.0) {
    return run_once(oracle, reg, init, params, params.step_eta, false, epoch_objectives).result;
  }

  // Auto step size: optimistic first, conservative on first-epoch regression.
  constexpr double kPrimary = 1e-3;
  constexpr double kFallback = 1e-4;
  try {
    RunOutcome attempt = run_once(oracle, reg, init, params, kPrimary, true, epoch_objectives);
    if (!attempt.first_epoch_regressed) return std::move(attempt.result);
  } catch (const DivergedError&) {
    // fall through to the smaller step
  }
  return run_once(oracle, reg, init, params, kFallback, false, epoch_objectives).result;
}

}  // namespace feta
