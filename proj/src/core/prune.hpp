#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "core/matrix.hpp"
#include "core/objective.hpp"
#include "core/regularizer.hpp"
#include "core/solver.hpp"

namespace feta {

struct PruneConfig {
  Regularizer reg;                 // penalty kind and strength
  SmoothReluParams smooth;         // surrogate sharpness
  std::size_t outer_iters = 10;    // difference-of-convex rounds
  double convergence_tol = 1e-4;   // relative iterate change for early stop
  SolverParams solver;             // inner solver; seed also feeds round seeds
  bool bias_row = false;           // last row of U is a folded-in bias
  bool keep_history = false;       // retain a copy of U after every round
};

struct PruneResult {
  Matrix pruned;                       // final U
  std::vector<double> objective_trace; // composite objective after each round
  double achieved_sparsity = 0.0;      // zero fraction (L1) or rank fraction (Nuclear)
  double layer_mse = 0.0;              // exact-ReLU reconstruction error, mean per sample
  std::size_t iterations_used = 0;
  bool converged = false;
  std::vector<Matrix> history;         // per-round iterates when requested
};

// Thrown when the inner solver diverges mid-run; carries what was computed
// up to the failure so callers can report partial progress.
class PruneDivergedError : public Error {
 public:
  PruneDivergedError(const std::string& msg, PruneResult partial)
      : Error(msg), partial_result(std::move(partial)) {}
  PruneResult partial_result;
};

// Prunes one dense layer by difference-of-convex iterations. The smoothed
// reconstruction loss splits as g - h with both parts convex; each round
// linearizes h at the current iterate and hands the resulting convex
// composite problem
//
//   min_U  (g(U) - <U, grad_h(U^k)>) / m  +  lambda * Omega(U)
//
// to the variance-reduced proximal solver. The 1/m factor keeps step sizes
// meaningful across sample counts; the reported objective trace is the full
// composite (g - h)/m + lambda * Omega at the end of every round, which is
// nonincreasing up to inner-solve tolerance.
//
// With bias_row set, the last row of U rides along unpenalized (it is the
// layer bias folded into an all-ones input column) and is excluded from the
// sparsity statistics.
PruneResult prune_layer(const LayerData& data, const Matrix& init, const PruneConfig& cfg);

// Objective value as traced by prune_layer, exposed for diagnostics/tests.
double prune_objective(const Matrix& u, const LayerData& data, const PruneConfig& cfg);

// Zero fraction of the penalized block (entries of magnitude <= 1e-12), or
// for the nuclear penalty the fraction of singular values above
// 1e-10 * sigma_max, i.e. effective rank / min dimension.
double achieved_sparsity(const Matrix& u, const Regularizer& reg);

// Effective rank of the penalized block under the same cutoff.
std::size_t effective_rank(const Matrix& u, const Regularizer& reg);

// Independent runs over the given penalty strengths (sorted ascending
// internally), every run starting from the same init and seed so results are
// comparable. Returns (lambda, result) pairs in ascending lambda order.
std::vector<std::pair<double, PruneResult>> lambda_sweep(const LayerData& data,
                                                         const Matrix& init,
                                                         const PruneConfig& cfg,
                                                         std::vector<double> lambdas);

}  // namespace feta
