#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <memory>

#include "commands.hpp"
#include "common.hpp"

namespace cli {

namespace {

struct PruneOpts {
  DataOpts data;
  std::string model;
  std::size_t layer = 0;
  std::string reg = "l1";  // l1 | nuclear
  std::vector<double> lambdas;
  double sparsity_target = -1.0;
  long long rank_target = -1;

  std::size_t outer_iters = 10;
  double tol = 1e-4;
  double softplus_beta = 20.0;
  std::size_t epochs = 3;
  std::size_t inner_steps = 0;
  double eta = 0.0;
  double momentum = 0.95;
  std::size_t minibatch = 128;
  std::uint64_t seed = 0;

  std::string out_model;
  std::string csv;
};

struct TimedRun {
  PruneResultHandle result;
  double seconds = 0.0;
};

TimedRun run_once(const feta_layerdata* data, const feta_matrix* init,
                  const feta_prune_config& cfg) {
  TimedRun run;
  const auto start = std::chrono::steady_clock::now();
  check(feta_prune_run(data, init, &cfg, run.result.out()), "pruning");
  run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return run;
}

double result_sparsity(const feta_prune_result* r) {
  double s = 0.0;
  check(feta_prune_result_sparsity(r, &s), "reading sparsity");
  return s;
}

void run_prune(const PruneOpts& o) {
  if (o.model.empty()) throw CommandError(2, "prune needs --model");
  const int modes = (!o.lambdas.empty() ? 1 : 0) + (o.sparsity_target >= 0.0 ? 1 : 0) +
                    (o.rank_target >= 0 ? 1 : 0);
  if (modes != 1) {
    throw CommandError(2, "pick exactly one of --lambda/--lambda-list, --sparsity-target, "
                          "--rank-target");
  }
  const bool nuclear = o.reg == "nuclear";
  if (o.sparsity_target >= 0.0 && nuclear) {
    throw CommandError(2, "--sparsity-target applies to --reg l1; use --rank-target for nuclear");
  }
  if (o.rank_target >= 0 && !nuclear) {
    throw CommandError(2, "--rank-target applies to --reg nuclear");
  }

  CsvSink csv(o.csv);
  NetworkHandle net;
  check(feta_network_load(o.model.c_str(), net.out()), "loading model");
  if (o.layer >= feta_network_layer_count(net)) {
    throw CommandError(2, "layer " + std::to_string(o.layer) + " out of range (model has " +
                              std::to_string(feta_network_layer_count(net)) + " layers)");
  }
  std::size_t d_in = 0, d_out = 0;
  check(feta_network_layer_dims(net, o.layer, &d_in, &d_out), "layer dims");

  const DataSplit ds = materialize(o.data, o.seed);
  LayerDataHandle captured;
  check(feta_network_capture(net, ds.train, o.layer, /*augment_bias=*/1, captured.out()),
        "capturing layer activations");
  MatrixHandle init;
  check(feta_network_augmented_weights(net, o.layer, init.out()), "reading layer weights");

  const double acc_before = accuracy_of(net, ds.eval(), "evaluating unpruned model");

  feta_prune_config cfg;
  feta_prune_config_init(&cfg);
  cfg.reg_kind = nuclear ? FETA_REG_NUCLEAR : FETA_REG_L1;
  cfg.softplus_beta = o.softplus_beta;
  cfg.outer_iters = o.outer_iters;
  cfg.convergence_tol = o.tol;
  cfg.epochs = o.epochs;
  cfg.inner_steps = o.inner_steps;
  cfg.step_eta = o.eta;
  cfg.momentum = o.momentum;
  cfg.minibatch = o.minibatch;
  cfg.seed = o.seed;
  cfg.bias_row = 1;

  const char* method = nuclear ? "feta-nuclear" : "feta-l1";
  csv.row({"method", "layer", "lambda", "sparsity", "layer_mse", "acc_before", "acc_after",
           "seconds"});

  NetworkHandle last_applied;
  auto emit = [&](double lambda, const feta_prune_result* result, double seconds) {
    MatrixHandle pruned;
    check(feta_prune_result_matrix(result, pruned.out()), "reading pruned matrix");
    NetworkHandle applied;
    check(feta_network_clone(net, applied.out()), "cloning model");
    check(feta_network_apply_augmented(applied, o.layer, pruned), "installing pruned layer");
    const double acc_after = accuracy_of(applied, ds.eval(), "evaluating pruned model");
    double mse = 0.0;
    check(feta_prune_result_layer_mse(result, &mse), "reading layer mse");
    csv.row({method, std::to_string(o.layer), fmt_full(lambda),
             fmt_full(result_sparsity(result)), fmt_full(mse), fmt_full(acc_before),
             fmt_full(acc_after), fmt_seconds(seconds)});
    last_applied = std::move(applied);
  };

  if (!o.lambdas.empty()) {
    std::vector<double> lambdas = o.lambdas;
    std::sort(lambdas.begin(), lambdas.end());
    for (double lambda : lambdas) {
      cfg.lambda = lambda;
      const TimedRun run = run_once(captured, init, cfg);
      emit(lambda, run.result, run.seconds);
    }
  } else if (o.sparsity_target >= 0.0) {
    // Log-grid bisection: sparsity grows with lambda, so shrink the bracket
    // until the achieved zero fraction lands within one point of the target.
    if (o.sparsity_target > 1.0) throw CommandError(2, "--sparsity-target must lie in [0, 1]");
    double lo = 1e-7, hi = 10.0;
    double best_lambda = lo;
    double best_gap = 2.0;
    TimedRun best;
    double total_seconds = 0.0;
    for (int iter = 0; iter < 20; ++iter) {
      const double lambda = std::sqrt(lo * hi);
      cfg.lambda = lambda;
      TimedRun run = run_once(captured, init, cfg);
      total_seconds += run.seconds;
      const double sparsity = result_sparsity(run.result);
      const double gap = std::fabs(sparsity - o.sparsity_target);
      if (gap < best_gap) {
        best_gap = gap;
        best_lambda = lambda;
        best = std::move(run);
      }
      if (best_gap <= 0.01) break;
      if (sparsity < o.sparsity_target) lo = lambda;
      else hi = lambda;
    }
    if (best_gap > 0.01) {
      std::fprintf(stderr, "warning: sparsity search ended %.4f away from target\n", best_gap);
    }
    emit(best_lambda, best.result, total_seconds);
  } else {
    // Rank decreases as lambda grows; bisect until the effective rank hits
    // the target (or the bracket is exhausted, keeping the nearest rank).
    const std::size_t min_dim = std::min(d_in, d_out);
    if (o.rank_target < 1 || static_cast<std::size_t>(o.rank_target) > min_dim) {
      throw CommandError(2, "--rank-target must lie in [1, " + std::to_string(min_dim) + "]");
    }
    double lo = 1e-7, hi = 10.0;
    long long best_rank = -1;
    double best_lambda = lo;
    TimedRun best;
    double total_seconds = 0.0;
    for (int iter = 0; iter < 25; ++iter) {
      const double lambda = std::sqrt(lo * hi);
      cfg.lambda = lambda;
      TimedRun run = run_once(captured, init, cfg);
      total_seconds += run.seconds;
      const long long rank =
          std::llround(result_sparsity(run.result) * static_cast<double>(min_dim));
      if (best_rank < 0 ||
          std::llabs(rank - o.rank_target) < std::llabs(best_rank - o.rank_target)) {
        best_rank = rank;
        best_lambda = lambda;
        best = std::move(run);
      }
      if (rank == o.rank_target) break;
      if (rank > o.rank_target) lo = lambda;
      else hi = lambda;
    }
    if (best_rank != o.rank_target) {
      std::fprintf(stderr, "warning: rank search settled at %lld (target %lld)\n", best_rank,
                   o.rank_target);
    }
    double cr = 0.0;
    check(feta_compression_ratio(d_in, d_out, static_cast<std::size_t>(best_rank), &cr),
          "compression ratio");
    if (cr >= 1.0) {
      std::fprintf(stderr, "warning: rank %lld does not compress a %zux%zu layer (ratio %.3f)\n",
                   best_rank, d_in, d_out, cr);
    } else {
      std::fprintf(stderr, "compression ratio %.4f at rank %lld\n", cr, best_rank);
    }
    emit(best_lambda, best.result, total_seconds);
  }

  if (!o.out_model.empty()) {
    if (!last_applied) throw CommandError(1, "no pruned model produced");
    check(feta_network_save(last_applied, o.out_model.c_str()), "saving pruned model");
    std::fprintf(stderr, "pruned model saved to %s\n", o.out_model.c_str());
  }
}

}  // namespace

void setup_prune(CLI::App& app) {
  auto opts = std::make_shared<PruneOpts>();
  CLI::App* cmd = app.add_subcommand(
      "prune", "Refit one layer on captured activations under a sparsity or rank penalty");
  add_data_flags(cmd, opts->data);
  cmd->add_option("--model", opts->model, "Trained model file")->required();
  cmd->add_option("--layer", opts->layer, "Layer index to prune")->capture_default_str();
  cmd->add_option("--reg", opts->reg, "Penalty: l1 or nuclear")
      ->check(CLI::IsMember({"l1", "nuclear"}))
      ->capture_default_str();
  cmd->add_option("--lambda,--lambda-list", opts->lambdas,
                  "Penalty strength(s); several values run a sweep")
      ->delimiter(',');
  cmd->add_option("--sparsity-target", opts->sparsity_target,
                  "Bisect lambda until this zero fraction is reached (l1)");
  cmd->add_option("--rank-target", opts->rank_target,
                  "Bisect lambda until this rank is reached (nuclear)");
  cmd->add_option("--outer-iters", opts->outer_iters, "Convex-split rounds")
      ->capture_default_str();
  cmd->add_option("--tol", opts->tol, "Relative iterate change for early stop")
      ->capture_default_str();
  cmd->add_option("--softplus-beta", opts->softplus_beta, "Smooth-ReLU sharpness")
      ->capture_default_str();
  cmd->add_option("--epochs", opts->epochs, "Inner solver epochs")->capture_default_str();
  cmd->add_option("--inner-steps", opts->inner_steps,
                  "Inner steps per epoch (0 = one pass over the data)");
  cmd->add_option("--eta", opts->eta, "Inner step size (0 = auto)");
  cmd->add_option("--momentum", opts->momentum, "Inner extrapolation weight")
      ->capture_default_str();
  cmd->add_option("--minibatch", opts->minibatch, "Inner minibatch size")->capture_default_str();
  cmd->add_option("--seed", opts->seed, "Master seed")->capture_default_str();
  cmd->add_option("--out", opts->out_model, "Where to save the pruned model");
  cmd->add_option("--csv", opts->csv, "CSV output file (default: stdout)");
  cmd->callback([opts] { run_prune(*opts); });
}

}  // namespace cli
