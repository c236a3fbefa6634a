#include "core/prune.hpp"

#include <algorithm>
#include <cmath>

#include "core/svd.hpp"

namespace feta {

namespace {

constexpr double kZeroSnap = 1e-12;   // |u| at or below this collapses to zero
constexpr double kRankCut = 1e-10;    // sigma <= cut * sigma_max counts as rank-deficient

Regularizer effective_reg(const PruneConfig& cfg) {
  Regularizer reg = cfg.reg;
  if (cfg.bias_row) reg.exclude_last_row = true;
  return reg;
}

// Convex subproblem oracle for one round: smooth part
// (g(U) - <U, C>) / m with C = grad_h at the round's anchor point.
SmoothOracle make_round_oracle(const LayerData& data, const Matrix& linearization,
                               const SmoothReluParams& smooth) {
  const double inv_m = 1.0 / static_cast<double>(data.samples());
  SmoothOracle oracle;
  oracle.sample_count = data.samples();
  oracle.full_value = [&data, &linearization, smooth, inv_m](const Matrix& u) {
    return (g_value(u, data, smooth) - dot(u, linearization)) * inv_m;
  };
  oracle.full_gradient = [&data, &linearization, smooth, inv_m](const Matrix& u) {
    Matrix grad = grad_g(u, data, smooth);
    axpy(-1.0, linearization, grad);
    return scale(grad, inv_m);
  };
  oracle.minibatch_gradient = [&data, &linearization, smooth, inv_m](
                                  const Matrix& u, std::span<const std::size_t> rows) {
    // (m / |rows|) * sum of per-sample grads keeps the estimator unbiased for
    // the full sum; the linearization term is deterministic.
    const double upscale = static_cast<double>(data.samples()) / static_cast<double>(rows.size());
    Matrix grad = scale(grad_g_rows(u, data, smooth, rows), upscale);
    axpy(-1.0, linearization, grad);
    return scale(grad, inv_m);
  };
  return oracle;
}

std::size_t penalized_rows(const Matrix& u, const Regularizer& reg) {
  if (!reg.exclude_last_row) return u.rows();
  if (u.rows() == 0) throw DimensionError("sparsity: empty matrix");
  return u.rows() - 1;
}

void snap_small_to_zero(Matrix& u) {
  double* p = u.data();
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (std::fabs(p[i]) <= kZeroSnap) p[i] = 0.0;
  }
}

}  // namespace

double prune_objective(const Matrix& u, const LayerData& data, const PruneConfig& cfg) {
  const Regularizer reg = effective_reg(cfg);
  const double inv_m = 1.0 / static_cast<double>(data.samples());
  return (g_value(u, data, cfg.smooth) - h_value(u, data, cfg.smooth)) * inv_m +
         reg.lambda * penalty(reg, u);
}

std::size_t effective_rank(const Matrix& u, const Regularizer& reg) {
  const std::size_t rows = penalized_rows(u, reg);
  if (rows == 0 || u.cols() == 0) return 0;
  const SvdResult s = svd(row_range(u, 0, rows));
  const double sigma_max = s.singular_values.empty() ? 0.0 : s.singular_values.front();
  if (sigma_max == 0.0) return 0;
  std::size_t rank = 0;
  for (double sv : s.singular_values) {
    if (sv > kRankCut * sigma_max) ++rank;
  }
  return rank;
}

double achieved_sparsity(const Matrix& u, const Regularizer& reg) {
  const std::size_t rows = penalized_rows(u, reg);
  if (rows == 0 || u.cols() == 0) return 0.0;
  if (reg.kind == RegKind::Nuclear) {
    const std::size_t full = std::min(rows, u.cols());
    return static_cast<double>(effective_rank(u, reg)) / static_cast<double>(full);
  }
  std::size_t zeros = 0;
  for (std::size_t i = 0; i < rows; ++i) {
    const double* p = u.row(i);
    for (std::size_t j = 0; j < u.cols(); ++j) {
      if (std::fabs(p[j]) <= kZeroSnap) ++zeros;
    }
  }
  return static_cast<double>(zeros) / static_cast<double>(rows * u.cols());
}

PruneResult prune_layer(const LayerData& data, const Matrix& init, const PruneConfig& cfg) {
  if (init.rows() != data.d1() || init.cols() != data.d2()) {
    throw DimensionError("prune: init is " + std::to_string(init.rows()) + "x" +
                         std::to_string(init.cols()) + ", expected " + std::to_string(data.d1()) +
                         "x" + std::to_string(data.d2()));
  }
  if (cfg.outer_iters == 0) throw ValidationError("prune: outer_iters must be >= 1");
  if (cfg.reg.lambda < 0.0 || !std::isfinite(cfg.reg.lambda)) {
    throw ValidationError("prune: lambda must be finite and >= 0");
  }
  if (cfg.bias_row && data.d1() < 2) {
    throw ValidationError("prune: bias_row needs at least two input columns");
  }

  const Regularizer reg = effective_reg(cfg);
  PruneResult result;
  Matrix u = init;

  for (std::size_t round = 0; round < cfg.outer_iters; ++round) {
    const Matrix linearization = grad_h(u, data, cfg.smooth);
    const SmoothOracle oracle = make_round_oracle(data, linearization, cfg.smooth);

    SolverParams solver = cfg.solver;
    solver.seed = cfg.solver.seed + round;  // fresh, reproducible stream per round

    Matrix u_next;
    try {
      u_next = acc_prox_svrg(oracle, reg, u, solver);
    } catch (const DivergedError& e) {
      result.pruned = u;
      result.iterations_used = round;
      throw PruneDivergedError(std::string("prune: inner solver diverged: ") + e.what(),
                               std::move(result));
    }

    const double delta = frobenius_norm(sub(u_next, u));
    const double base = std::max(frobenius_norm(u), 1e-12);
    u = std::move(u_next);

    result.objective_trace.push_back(prune_objective(u, data, cfg));
    result.iterations_used = round + 1;
    if (cfg.keep_history) result.history.push_back(u);
    if (delta / base < cfg.convergence_tol) {
      result.converged = true;
      break;
    }
  }

  snap_small_to_zero(u);
  result.achieved_sparsity = achieved_sparsity(u, reg);
  result.layer_mse = layer_mse_relu(u, data);
  result.pruned = std::move(u);
  return result;
}

std::vector<std::pair<double, PruneResult>> lambda_sweep(const LayerData& data,
                                                         const Matrix& init,
                                                         const PruneConfig& cfg,
                                                         std::vector<double> lambdas) {
  std::sort(lambdas.begin(), lambdas.end());
  std::vector<std::pair<double, PruneResult>> out;
  out.reserve(lambdas.size());
  for (double lambda : lambdas) {
    PruneConfig run_cfg = cfg;
    run_cfg.reg.lambda = lambda;
    out.emplace_back(lambda, prune_layer(data, init, run_cfg));
  }
  return out;
}

}  // namespace feta
