#include <cmath>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "commands.hpp"
#include "common.hpp"

namespace cli {

namespace {

struct BoundsOpts {
  DataOpts data;
  std::string model;
  std::string pruned_model;
  double c_m = 1.0;
  double k = 20.0;
  double delta = 0.05;
  double base_ge = -1.0;  // < 0: measure |train acc - test acc| of the original
  std::size_t max_cover = 2000;
  bool require_finite = false;
  std::uint64_t seed = 0;
  std::string csv;
};

std::string report_cells(feta_ge_report r, double score_stat) {
  r.score = score_stat;
  char buf[256];
  check(feta_ge_report_csv(&r, buf, sizeof(buf)), "formatting report");
  return buf;
}

void emit_report(CsvSink& csv, const std::string& kind, const std::string& layer,
                 const std::string& variant, const std::string& cells,
                 const std::string& extra) {
  // The report cells are already comma-joined in the documented order.
  std::string line = csv_cell(kind) + "," + csv_cell(layer) + "," + csv_cell(variant) + "," +
                     cells + "," + csv_cell(extra) + "\n";
  csv.raw(line);
}

// First count rows of a matrix handle, copied out and rebuilt. Used to cap
// the quadratic covering computation on large captures.
MatrixHandle head_rows(const feta_matrix* m, std::size_t count) {
  const std::size_t cols = feta_matrix_cols(m);
  std::vector<double> data(feta_matrix_rows(m) * cols);
  check(feta_matrix_copy_data(m, data.data(), data.size()), "copying activations");
  MatrixHandle out;
  check(feta_matrix_create(count, cols, data.data(), out.out()), "building subsample");
  return out;
}

void run_bounds(const BoundsOpts& o) {
  if (o.model.empty()) throw CommandError(2, "bounds needs --model");
  if (o.pruned_model.empty()) throw CommandError(2, "bounds needs --pruned-model");

  CsvSink csv(o.csv);
  NetworkHandle original, pruned;
  check(feta_network_load(o.model.c_str(), original.out()), "loading model");
  check(feta_network_load(o.pruned_model.c_str(), pruned.out()), "loading pruned model");

  const std::size_t layers = feta_network_layer_count(original);
  if (feta_network_layer_count(pruned) != layers) {
    throw CommandError(2, "models disagree on layer count");
  }
  for (std::size_t i = 0; i < layers; ++i) {
    std::size_t a_in = 0, a_out = 0, b_in = 0, b_out = 0;
    check(feta_network_layer_dims(original, i, &a_in, &a_out), "layer dims");
    check(feta_network_layer_dims(pruned, i, &b_in, &b_out), "layer dims");
    if (a_in != b_in || a_out != b_out) {
      throw CommandError(2, "models disagree on layer " + std::to_string(i) + " shape");
    }
  }

  const DataSplit ds = materialize(o.data, o.seed);
  const std::size_t m = feta_dataset_size(ds.train);

  std::vector<double> norms(layers);
  check(feta_network_spectral_norms(original, norms.data(), norms.size()), "spectral norms");
  double norm_product = 1.0;
  for (double n : norms) norm_product *= n;

  double smin = 0.0, smean = 0.0;
  check(feta_network_min_score(original, ds.train, &smin), "min score");
  check(feta_network_mean_score(original, ds.train, &smean), "mean score");
  const double gamma = smin / norm_product;

  double base_ge = o.base_ge;
  if (base_ge < 0.0) {
    if (ds.test) {
      const double train_acc = accuracy_of(original, ds.train, "train accuracy");
      const double test_acc = accuracy_of(original, ds.test, "test accuracy");
      base_ge = std::fabs(train_acc - test_acc);
    } else {
      base_ge = 0.01;
      std::fprintf(stderr, "note: no test split; assuming base generalization error 0.01\n");
    }
  }

  feta_manifold_params mp;
  mp.c_m = o.c_m;
  mp.k = o.k;
  mp.n_y = feta_dataset_classes(ds.train);
  mp.m = m;
  mp.delta = o.delta;

  // Per-layer distortions: worst squared output distance over the training
  // activations, plus the off-sample variant inflated by the covering slack
  // of the test activations.
  std::vector<double> c_emp(layers, 0.0);
  std::vector<double> c_off(layers, 0.0);
  const bool have_test = static_cast<bool>(ds.test);
  for (std::size_t i = 0; i < layers; ++i) {
    MatrixHandle inputs;
    check(feta_network_activations(original, ds.train, i, inputs.out()), "layer activations");
    MatrixHandle out_before, out_after;
    check(feta_network_layer_apply(original, i, inputs, out_before.out()), "layer outputs");
    check(feta_network_layer_apply(pruned, i, inputs, out_after.out()), "pruned layer outputs");
    check(feta_layer_distortion(out_before, out_after, &c_emp[i]), "distortion");

    if (have_test) {
      MatrixHandle test_inputs;
      check(feta_network_activations(original, ds.test, i, test_inputs.out()),
            "test activations");
      MatrixHandle anchors_view, probes_view;
      const feta_matrix* anchors = inputs;
      const feta_matrix* probes = test_inputs;
      if (feta_matrix_rows(inputs) > o.max_cover) {
        std::fprintf(stderr,
                     "warning: covering slack for layer %zu uses the first %zu of %zu anchors\n",
                     i, o.max_cover, feta_matrix_rows(inputs));
        anchors_view = head_rows(inputs, o.max_cover);
        anchors = anchors_view;
      }
      if (feta_matrix_rows(test_inputs) > o.max_cover) {
        probes_view = head_rows(test_inputs, o.max_cover);
        probes = probes_view;
      }
      double eps = 0.0;
      check(feta_covering_epsilon(anchors, probes, &eps), "covering slack");

      MatrixHandle w_orig, w_pruned;
      check(feta_network_layer_weights(original, i, w_orig.out()), "layer weights");
      check(feta_network_layer_weights(pruned, i, w_pruned.out()), "pruned layer weights");
      double n_orig = 0.0, n_pruned = 0.0;
      check(feta_matrix_spectral_norm(w_orig, &n_orig), "weight norm");
      check(feta_matrix_spectral_norm(w_pruned, &n_pruned), "pruned weight norm");
      check(feta_offsample_distortion(c_emp[i], n_orig, n_pruned, eps, &c_off[i]),
            "off-sample distortion");
    } else {
      c_off[i] = c_emp[i];
    }
  }
  if (!have_test) {
    std::fprintf(stderr, "note: no test split; off-sample rows reuse on-sample distortion\n");
  }

  csv.row({"kind", "layer", "variant", "score", "gamma", "penalty", "a_const", "b_const",
           "bound", "vacuous", "extra"});

  bool any_finite_perturbed = false;
  feta_ge_report report;
  check(feta_ge_bound_base(gamma, &mp, &report), "base bound");
  emit_report(csv, "base", "", "", report_cells(report, smin), "");

  for (std::size_t i = 0; i < layers; ++i) {
    if (c_emp[i] == 0.0 && c_off[i] == 0.0) continue;  // untouched layer
    check(feta_ge_bound_single_layer(gamma, c_emp[i], norms.data(), layers, i, &mp, &report),
          "single-layer bound");
    if (!report.vacuous) any_finite_perturbed = true;
    emit_report(csv, "single", std::to_string(i), "empirical", report_cells(report, smin),
                fmt_full(c_emp[i]));
    check(feta_ge_bound_single_layer(gamma, c_off[i], norms.data(), layers, i, &mp, &report),
          "single-layer off-sample bound");
    if (!report.vacuous) any_finite_perturbed = true;
    emit_report(csv, "single", std::to_string(i), "offsample", report_cells(report, smin),
                fmt_full(c_off[i]));
  }

  check(feta_ge_bound_multi_layer(gamma, c_emp.data(), norms.data(), layers, &mp, &report),
        "multi-layer bound");
  if (!report.vacuous) any_finite_perturbed = true;
  emit_report(csv, "multi", "", "empirical", report_cells(report, smin), "");
  check(feta_ge_bound_multi_layer(gamma, c_off.data(), norms.data(), layers, &mp, &report),
        "multi-layer off-sample bound");
  if (!report.vacuous) any_finite_perturbed = true;
  emit_report(csv, "multi", "", "offsample", report_cells(report, smin), "");

  // Relative prediction off the mean score; VACUOUS when the layer damage
  // swallows the margin.
  double predicted = 0.0;
  const feta_status pred_st = feta_ge_ratio_prediction(base_ge, smean, c_emp.data(),
                                                       norms.data(), layers, o.k, &predicted);
  std::string predicted_cell;
  if (pred_st == FETA_OK) {
    predicted_cell = fmt_full(predicted);
    any_finite_perturbed = true;
  } else if (pred_st == FETA_ERR_VACUOUS) {
    predicted_cell = "VACUOUS";
  } else {
    check(pred_st, "ratio prediction");
  }
  csv.row({"prediction", "", "ratio", fmt_full(smean), "", "", "", "", predicted_cell,
           pred_st == FETA_ERR_VACUOUS ? "1" : "0", fmt_full(base_ge)});

  double flipped = 0.0;
  check(feta_network_disagreement(original, pruned, ds.eval(), &flipped), "disagreement");
  csv.row({"disagreement", "", "", "", "", "", "", "", "", "", fmt_full(flipped)});

  if (o.require_finite && !any_finite_perturbed) {
    throw CommandError(1, "all perturbed bounds are vacuous");
  }
}

}  // namespace

void setup_bounds(CLI::App& app) {
  auto opts = std::make_shared<BoundsOpts>();
  CLI::App* cmd = app.add_subcommand(
      "bounds", "Margin-based generalization bounds before/after pruning");
  add_data_flags(cmd, opts->data);
  cmd->add_option("--model", opts->model, "Original model file")->required();
  cmd->add_option("--pruned-model", opts->pruned_model, "Pruned model file")->required();
  cmd->add_option("--cm", opts->c_m, "Per-dimension data extent")->capture_default_str();
  cmd->add_option("--k", opts->k, "Intrinsic data dimension")->capture_default_str();
  cmd->add_option("--delta", opts->delta, "Confidence level")->capture_default_str();
  cmd->add_option("--base-ge", opts->base_ge,
                  "Measured base generalization error (default: |train acc - test acc|)");
  cmd->add_option("--max-cover", opts->max_cover,
                  "Row cap for the quadratic covering-slack computation")
      ->capture_default_str();
  cmd->add_flag("--require-finite", opts->require_finite,
                "Exit with status 1 if every perturbed bound is vacuous");
  cmd->add_option("--seed", opts->seed, "Master seed (dataset regeneration)")
      ->capture_default_str();
  cmd->add_option("--csv", opts->csv, "CSV output file (default: stdout)");
  cmd->callback([opts] { run_bounds(*opts); });
}

}  // namespace cli
