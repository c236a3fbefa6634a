#include <chrono>
#include <cmath>
#include <cstdio>
#include <memory>
#include <vector>

#include "commands.hpp"
#include "common.hpp"

namespace cli {

namespace {

struct BaselineOpts {
  DataOpts data;
  std::string model;
  std::size_t layer = 0;
  std::string method;  // threshold | svd
  double sparsity_target = -1.0;
  double threshold = -1.0;
  long long rank = -1;
  std::uint64_t seed = 0;
  std::string out_model;
  std::string csv;
};

// Mean squared row distance between two output matrices of equal shape.
double mean_row_mse(const feta_matrix* a, const feta_matrix* b) {
  const std::size_t rows = feta_matrix_rows(a);
  const std::size_t cols = feta_matrix_cols(a);
  if (rows != feta_matrix_rows(b) || cols != feta_matrix_cols(b)) {
    throw CommandError(2, "layer outputs changed shape");
  }
  std::vector<double> va(rows * cols), vb(rows * cols);
  check(feta_matrix_copy_data(a, va.data(), va.size()), "reading outputs");
  check(feta_matrix_copy_data(b, vb.data(), vb.size()), "reading outputs");
  double acc = 0.0;
  for (std::size_t i = 0; i < va.size(); ++i) {
    const double d = va[i] - vb[i];
    acc += d * d;
  }
  return acc / static_cast<double>(rows);
}

void run_baseline(const BaselineOpts& o) {
  if (o.model.empty()) throw CommandError(2, "baseline needs --model");
  const bool is_threshold = o.method == "threshold";
  const bool is_svd = o.method == "svd";
  if (!is_threshold && !is_svd) throw CommandError(2, "--method must be threshold or svd");
  if (is_threshold && o.sparsity_target < 0.0 && o.threshold < 0.0) {
    throw CommandError(2, "threshold baseline needs --sparsity-target or --threshold");
  }
  if (is_svd && o.rank < 1) throw CommandError(2, "svd baseline needs --rank >= 1");

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
  const double acc_before = accuracy_of(net, ds.eval(), "evaluating original model");

  MatrixHandle weights;
  check(feta_network_layer_weights(net, o.layer, weights.out()), "reading layer weights");

  const auto start = std::chrono::steady_clock::now();
  MatrixHandle replacement;
  double knob = 0.0;  // threshold value or rank, reported in the lambda column
  double sparsity = 0.0;
  if (is_threshold) {
    double t = o.threshold;
    if (t < 0.0) {
      check(feta_threshold_for_sparsity(weights, o.sparsity_target, &t), "choosing threshold");
    }
    check(feta_hard_threshold(weights, t, replacement.out()), "thresholding");
    check(feta_matrix_zero_fraction(replacement, &sparsity), "measuring sparsity");
    knob = t;
  } else {
    const std::size_t k = static_cast<std::size_t>(o.rank);
    check(feta_truncated_svd(weights, k, replacement.out()), "truncating");
    sparsity = static_cast<double>(k) / static_cast<double>(std::min(d_in, d_out));
    knob = static_cast<double>(k);
    double cr = 0.0;
    check(feta_compression_ratio(d_in, d_out, k, &cr), "compression ratio");
    if (cr >= 1.0) {
      std::fprintf(stderr, "warning: rank %zu does not compress a %zux%zu layer (ratio %.3f)\n",
                   k, d_in, d_out, cr);
    } else {
      std::fprintf(stderr, "compression ratio %.4f at rank %zu\n", cr, k);
    }
  }

  NetworkHandle applied;
  check(feta_network_clone(net, applied.out()), "cloning model");
  check(feta_network_replace_weights(applied, o.layer, replacement), "installing weights");
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  // Reconstruction error of the swapped layer on the training activations.
  MatrixHandle original_inputs;
  check(feta_network_activations(net, ds.train, o.layer, original_inputs.out()),
        "computing layer inputs");
  MatrixHandle outputs_before, outputs_after;
  check(feta_network_layer_apply(net, o.layer, original_inputs, outputs_before.out()),
        "original layer outputs");
  check(feta_network_layer_apply(applied, o.layer, original_inputs, outputs_after.out()),
        "replacement layer outputs");
  const double layer_mse = mean_row_mse(outputs_before, outputs_after);

  const double acc_after = accuracy_of(applied, ds.eval(), "evaluating pruned model");

  csv.row({"method", "layer", "lambda", "sparsity", "layer_mse", "acc_before", "acc_after",
           "seconds"});
  csv.row({o.method, std::to_string(o.layer), fmt_full(knob), fmt_full(sparsity),
           fmt_full(layer_mse), fmt_full(acc_before), fmt_full(acc_after),
           fmt_seconds(seconds)});

  if (!o.out_model.empty()) {
    check(feta_network_save(applied, o.out_model.c_str()), "saving pruned model");
    std::fprintf(stderr, "pruned model saved to %s\n", o.out_model.c_str());
  }
}

}  // namespace

void setup_baseline(CLI::App& app) {
  auto opts = std::make_shared<BaselineOpts>();
  CLI::App* cmd = app.add_subcommand(
      "baseline", "One-shot layer compression: magnitude thresholding or truncated SVD");
  add_data_flags(cmd, opts->data);
  cmd->add_option("--model", opts->model, "Trained model file")->required();
  cmd->add_option("--layer", opts->layer, "Layer index")->capture_default_str();
  cmd->add_option("--method", opts->method, "threshold or svd")->required();
  cmd->add_option("--sparsity-target", opts->sparsity_target,
                  "Zero fraction to reach (threshold method)");
  cmd->add_option("--threshold", opts->threshold, "Explicit magnitude threshold");
  cmd->add_option("--rank", opts->rank, "Rank to keep (svd method)");
  cmd->add_option("--seed", opts->seed, "Master seed (dataset regeneration)")
      ->capture_default_str();
  cmd->add_option("--out", opts->out_model, "Where to save the modified model");
  cmd->add_option("--csv", opts->csv, "CSV output file (default: stdout)");
  cmd->callback([opts] { run_baseline(*opts); });
}

}  // namespace cli
