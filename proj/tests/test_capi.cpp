// Exercises the C interface end to end through the shared library: handle
// lifecycles, status codes, and a miniature train/capture/prune round trip.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <feta/feta.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>
#include <string>
#include <vector>

namespace {

template <auto F>
struct FnDeleter {
  template <class T>
  void operator()(T* p) const {
    F(p);
  }
};

using matrix_ptr = std::unique_ptr<feta_matrix, FnDeleter<feta_matrix_free>>;
using dataset_ptr = std::unique_ptr<feta_dataset, FnDeleter<feta_dataset_free>>;
using layerdata_ptr = std::unique_ptr<feta_layerdata, FnDeleter<feta_layerdata_free>>;
using network_ptr = std::unique_ptr<feta_network, FnDeleter<feta_network_free>>;
using result_ptr = std::unique_ptr<feta_prune_result, FnDeleter<feta_prune_result_free>>;

matrix_ptr make_matrix(size_t rows, size_t cols, const std::vector<double>& data) {
  feta_matrix* raw = nullptr;
  REQUIRE(feta_matrix_create(rows, cols, data.empty() ? nullptr : data.data(), &raw) == FETA_OK);
  return matrix_ptr(raw);
}

std::vector<double> entries(const feta_matrix* m) {
  std::vector<double> out(feta_matrix_rows(m) * feta_matrix_cols(m));
  REQUIRE(feta_matrix_copy_data(m, out.data(), out.size()) == FETA_OK);
  return out;
}

}  // namespace

TEST_CASE("version and status names") {
  CHECK(std::string(feta_version()) == "1.0.0");
  CHECK(std::string(feta_status_name(FETA_OK)) == "ok");
  CHECK(std::string(feta_status_name(FETA_ERR_VACUOUS)) == "vacuous bound");
  CHECK(std::string(feta_status_name(static_cast<feta_status>(99))) == "unknown status");
}

TEST_CASE("null arguments are rejected without crashing") {
  CHECK(feta_matrix_create(2, 2, nullptr, nullptr) == FETA_ERR_NULL_ARG);
  CHECK(std::string(feta_last_error()).find("null") != std::string::npos);
  double x = 0.0;
  CHECK(feta_matrix_spectral_norm(nullptr, &x) == FETA_ERR_NULL_ARG);
  CHECK(feta_network_accuracy(nullptr, nullptr, &x) == FETA_ERR_NULL_ARG);
  // Frees take NULL as a no-op, like free(3).
  feta_matrix_free(nullptr);
  feta_dataset_free(nullptr);
  feta_layerdata_free(nullptr);
  feta_network_free(nullptr);
  feta_prune_result_free(nullptr);
}

TEST_CASE("matrix lifecycle and reductions") {
  const std::vector<double> data = {1, 2, 3, 4, 5, 6};
  matrix_ptr m = make_matrix(2, 3, data);
  CHECK(feta_matrix_rows(m.get()) == 2);
  CHECK(feta_matrix_cols(m.get()) == 3);
  CHECK(entries(m.get()) == data);

  double copied[5];
  CHECK(feta_matrix_copy_data(m.get(), copied, 5) == FETA_ERR_DIMENSION);
  CHECK(std::string(feta_last_error()).find("capacity") != std::string::npos);

  double fro = 0.0;
  CHECK(feta_matrix_frobenius_norm(m.get(), &fro) == FETA_OK);
  CHECK(fro == doctest::Approx(std::sqrt(91.0)).epsilon(1e-12));

  matrix_ptr diag = make_matrix(2, 2, {3, 0, 0, 4});
  double spec = 0.0;
  CHECK(feta_matrix_spectral_norm(diag.get(), &spec) == FETA_OK);
  CHECK(spec == doctest::Approx(4.0).epsilon(1e-9));
  double zf = 0.0;
  CHECK(feta_matrix_zero_fraction(diag.get(), &zf) == FETA_OK);
  CHECK(zf == doctest::Approx(0.5).epsilon(1e-15));

  // Zero matrix when data is NULL.
  feta_matrix* zero = nullptr;
  REQUIRE(feta_matrix_create(3, 2, nullptr, &zero) == FETA_OK);
  matrix_ptr z(zero);
  CHECK(feta_matrix_zero_fraction(z.get(), &zf) == FETA_OK);
  CHECK(zf == 1.0);

  // Non-finite entries are refused at the door.
  const std::vector<double> bad = {1.0, HUGE_VAL};
  feta_matrix* rejected = nullptr;
  CHECK(feta_matrix_create(1, 2, bad.data(), &rejected) == FETA_ERR_INVALID_ARG);
}

TEST_CASE("dataset construction, splitting, and validation") {
  feta_dataset* raw = nullptr;
  REQUIRE(feta_dataset_synth_blobs(3, 4, 5, 0.5, 7, &raw) == FETA_OK);
  dataset_ptr blobs(raw);
  CHECK(feta_dataset_size(blobs.get()) == 15);
  CHECK(feta_dataset_dim(blobs.get()) == 4);
  CHECK(feta_dataset_classes(blobs.get()) == 3);

  feta_dataset *head_raw = nullptr, *tail_raw = nullptr;
  REQUIRE(feta_dataset_split_per_class(blobs.get(), 3, &head_raw, &tail_raw) == FETA_OK);
  dataset_ptr head(head_raw), tail(tail_raw);
  CHECK(feta_dataset_size(head.get()) == 9);
  CHECK(feta_dataset_size(tail.get()) == 6);

  feta_dataset* taken_raw = nullptr;
  REQUIRE(feta_dataset_take(blobs.get(), 4, &taken_raw) == FETA_OK);
  dataset_ptr taken(taken_raw);
  CHECK(feta_dataset_size(taken.get()) == 4);

  // A label outside [0, classes) is invalid.
  matrix_ptr inputs = make_matrix(2, 2, {1, 2, 3, 4});
  const int32_t bad_labels[] = {0, 5};
  feta_dataset* rejected = nullptr;
  CHECK(feta_dataset_create(inputs.get(), bad_labels, 2, 2, &rejected) == FETA_ERR_INVALID_ARG);

  CHECK(feta_dataset_load_idx("/tmp/feta-missing-images.idx", "/tmp/feta-missing-labels.idx",
                              &rejected) == FETA_ERR_IO);
}

TEST_CASE("layer data shapes and mismatch detection") {
  feta_layerdata* raw = nullptr;
  REQUIRE(feta_layerdata_toy_gaussian(6, 3, 20, 1, &raw) == FETA_OK);
  layerdata_ptr toy(raw);
  CHECK(feta_layerdata_samples(toy.get()) == 20);
  CHECK(feta_layerdata_input_dim(toy.get()) == 6);
  CHECK(feta_layerdata_output_dim(toy.get()) == 3);

  matrix_ptr in = make_matrix(4, 2, {1, 2, 3, 4, 5, 6, 7, 8});
  matrix_ptr out = make_matrix(3, 2, {1, 2, 3, 4, 5, 6});
  feta_layerdata* rejected = nullptr;
  CHECK(feta_layerdata_create(in.get(), out.get(), &rejected) == FETA_ERR_DIMENSION);
}

TEST_CASE("network train, persist, capture, prune round trip") {
  feta_dataset* data_raw = nullptr;
  REQUIRE(feta_dataset_synth_blobs(3, 8, 30, 0.5, 7, &data_raw) == FETA_OK);
  dataset_ptr data(data_raw);

  const size_t hidden[] = {6};
  feta_network* net_raw = nullptr;
  REQUIRE(feta_network_create_mlp(8, hidden, 1, 3, 5, &net_raw) == FETA_OK);
  network_ptr net(net_raw);
  REQUIRE(feta_network_layer_count(net.get()) == 2);

  size_t d_in = 0, d_out = 0;
  REQUIRE(feta_network_layer_dims(net.get(), 0, &d_in, &d_out) == FETA_OK);
  CHECK(d_in == 8);
  CHECK(d_out == 6);
  REQUIRE(feta_network_layer_dims(net.get(), 1, &d_in, &d_out) == FETA_OK);
  CHECK(d_in == 6);
  CHECK(d_out == 3);
  CHECK(feta_network_layer_dims(net.get(), 9, &d_in, &d_out) != FETA_OK);

  REQUIRE(feta_network_train_sgd(net.get(), data.get(), 10, 0.1, 16, 3) == FETA_OK);
  double acc = 0.0;
  REQUIRE(feta_network_accuracy(net.get(), data.get(), &acc) == FETA_OK);
  CHECK(acc >= 0.95);  // well-separated blobs are easy

  feta_network* clone_raw = nullptr;
  REQUIRE(feta_network_clone(net.get(), &clone_raw) == FETA_OK);
  network_ptr clone(clone_raw);
  double disagree = 1.0;
  REQUIRE(feta_network_disagreement(net.get(), clone.get(), data.get(), &disagree) == FETA_OK);
  CHECK(disagree == 0.0);

  const std::string path = "/tmp/feta_capi_" + std::to_string(getpid()) + ".feta";
  REQUIRE(feta_network_save(net.get(), path.c_str()) == FETA_OK);
  feta_network* loaded_raw = nullptr;
  REQUIRE(feta_network_load(path.c_str(), &loaded_raw) == FETA_OK);
  network_ptr loaded(loaded_raw);
  std::remove(path.c_str());
  double loaded_acc = 0.0;
  REQUIRE(feta_network_accuracy(loaded.get(), data.get(), &loaded_acc) == FETA_OK);
  CHECK(loaded_acc == acc);

  double norms[2] = {0, 0};
  REQUIRE(feta_network_spectral_norms(net.get(), norms, 2) == FETA_OK);
  CHECK(norms[0] > 0.0);
  CHECK(norms[1] > 0.0);
  CHECK(feta_network_spectral_norms(net.get(), norms, 1) == FETA_ERR_DIMENSION);

  double probe[8] = {0};
  int32_t predicted = -1;
  REQUIRE(feta_network_predict(net.get(), probe, 8, &predicted) == FETA_OK);
  CHECK(predicted >= 0);
  CHECK(predicted < 3);

  // Capture the first layer with the bias folded in and prune it.
  feta_layerdata* captured_raw = nullptr;
  REQUIRE(feta_network_capture(net.get(), data.get(), 0, 1, &captured_raw) == FETA_OK);
  layerdata_ptr captured(captured_raw);
  CHECK(feta_layerdata_samples(captured.get()) == 90);
  CHECK(feta_layerdata_input_dim(captured.get()) == 9);
  CHECK(feta_layerdata_output_dim(captured.get()) == 6);

  feta_matrix* aug_raw = nullptr;
  REQUIRE(feta_network_augmented_weights(net.get(), 0, &aug_raw) == FETA_OK);
  matrix_ptr aug(aug_raw);
  CHECK(feta_matrix_rows(aug.get()) == 9);
  CHECK(feta_matrix_cols(aug.get()) == 6);

  feta_prune_config cfg;
  feta_prune_config_init(&cfg);
  CHECK(cfg.reg_kind == FETA_REG_L1);
  CHECK(cfg.softplus_beta == 20.0);
  CHECK(cfg.momentum == 0.95);
  cfg.lambda = 0.05;
  cfg.outer_iters = 3;
  cfg.convergence_tol = 0.0;
  cfg.epochs = 2;
  cfg.minibatch = 32;
  cfg.step_eta = 0.01;
  cfg.seed = 3;
  cfg.bias_row = 1;

  feta_prune_result* res_raw = nullptr;
  REQUIRE(feta_prune_run(captured.get(), aug.get(), &cfg, &res_raw) == FETA_OK);
  result_ptr res(res_raw);

  feta_matrix* pruned_raw = nullptr;
  REQUIRE(feta_prune_result_matrix(res.get(), &pruned_raw) == FETA_OK);
  matrix_ptr pruned(pruned_raw);
  CHECK(feta_matrix_rows(pruned.get()) == 9);
  CHECK(feta_matrix_cols(pruned.get()) == 6);

  double sparsity = -1.0, mse = -1.0;
  size_t iters = 0;
  int converged = -1;
  REQUIRE(feta_prune_result_sparsity(res.get(), &sparsity) == FETA_OK);
  REQUIRE(feta_prune_result_layer_mse(res.get(), &mse) == FETA_OK);
  REQUIRE(feta_prune_result_iterations(res.get(), &iters) == FETA_OK);
  REQUIRE(feta_prune_result_converged(res.get(), &converged) == FETA_OK);
  CHECK(sparsity >= 0.0);
  CHECK(sparsity <= 1.0);
  CHECK(mse >= 0.0);
  CHECK(iters >= 1);
  CHECK(iters <= 3);
  CHECK((converged == 0 || converged == 1));

  // Trace protocol: NULL out queries the length, short capacity truncates.
  size_t length = 0;
  REQUIRE(feta_prune_result_trace(res.get(), nullptr, 0, &length) == FETA_OK);
  REQUIRE(length >= 2);
  std::vector<double> trace(length);
  REQUIRE(feta_prune_result_trace(res.get(), trace.data(), length, &length) == FETA_OK);
  CHECK(trace.back() <= trace.front() + 1e-9 * (1.0 + std::fabs(trace.front())));
  double first_only = 0.0;
  size_t len2 = 0;
  REQUIRE(feta_prune_result_trace(res.get(), &first_only, 1, &len2) == FETA_OK);
  CHECK(len2 == length);
  CHECK(first_only == trace[0]);

  // Install the pruned weights and make sure the net still answers.
  REQUIRE(feta_network_apply_augmented(clone.get(), 0, pruned.get()) == FETA_OK);
  double pruned_acc = 0.0;
  REQUIRE(feta_network_accuracy(clone.get(), data.get(), &pruned_acc) == FETA_OK);
  CHECK(pruned_acc >= 0.0);

  matrix_ptr wrong = make_matrix(2, 2, {1, 2, 3, 4});
  CHECK(feta_network_replace_weights(clone.get(), 0, wrong.get()) == FETA_ERR_DIMENSION);

  // Rejected config values surface as status codes, not exceptions.
  feta_prune_config bad = cfg;
  bad.lambda = -1.0;
  CHECK(feta_prune_run(captured.get(), aug.get(), &bad, &res_raw) == FETA_ERR_INVALID_ARG);
  bad = cfg;
  bad.reg_kind = 42;
  CHECK(feta_prune_run(captured.get(), aug.get(), &bad, &res_raw) == FETA_ERR_INVALID_ARG);
}

TEST_CASE("baseline compressors") {
  matrix_ptr w = make_matrix(2, 2, {1.0, -0.5, 0.2, 3.0});
  feta_matrix* kept_raw = nullptr;
  REQUIRE(feta_hard_threshold(w.get(), 0.5, &kept_raw) == FETA_OK);
  matrix_ptr kept(kept_raw);
  CHECK(entries(kept.get()) == std::vector<double>{1.0, 0.0, 0.0, 3.0});

  matrix_ptr mags = make_matrix(2, 2, {1, 2, 3, 4});
  double threshold = 0.0;
  REQUIRE(feta_threshold_for_sparsity(mags.get(), 0.5, &threshold) == FETA_OK);
  CHECK(threshold == 2.0);

  matrix_ptr diag = make_matrix(2, 2, {3, 0, 0, 1});
  feta_matrix* rank1_raw = nullptr;
  REQUIRE(feta_truncated_svd(diag.get(), 1, &rank1_raw) == FETA_OK);
  matrix_ptr rank1(rank1_raw);
  double fro = 0.0;
  REQUIRE(feta_matrix_frobenius_norm(rank1.get(), &fro) == FETA_OK);
  CHECK(fro == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(feta_truncated_svd(diag.get(), 0, &rank1_raw) == FETA_ERR_INVALID_ARG);

  double cr = 0.0;
  REQUIRE(feta_compression_ratio(100, 10, 5, &cr) == FETA_OK);
  CHECK(cr == doctest::Approx(0.555).epsilon(1e-15));
}

TEST_CASE("bound reports and the ratio prediction") {
  feta_manifold_params mp;
  mp.c_m = 1.0;
  mp.k = 2.0;
  mp.n_y = 2;
  mp.m = 1000;
  mp.delta = 0.01;

  feta_ge_report report;
  REQUIRE(feta_ge_bound_base(1.0, &mp, &report) == FETA_OK);
  CHECK(report.a_const == doctest::Approx(0.1053108).epsilon(1e-6));
  CHECK(report.b_const == doctest::Approx(0.09597045).epsilon(1e-6));
  CHECK(report.bound == doctest::Approx(report.a_const + report.b_const).epsilon(1e-12));
  CHECK(report.vacuous == 0);
  CHECK(feta_ge_bound_base(0.0, &mp, &report) == FETA_ERR_INVALID_ARG);

  const double norms[] = {1.0, 1.0};
  feta_ge_report vac;
  REQUIRE(feta_ge_bound_single_layer(1.0, 4.0, norms, 2, 1, &mp, &vac) == FETA_OK);
  CHECK(vac.vacuous == 1);
  CHECK(std::isinf(vac.bound));

  const double c2s[] = {0.0, 4.0};
  feta_ge_report multi;
  REQUIRE(feta_ge_bound_multi_layer(1.0, c2s, norms, 2, &mp, &multi) == FETA_OK);
  CHECK(multi.penalty == doctest::Approx(vac.penalty).epsilon(1e-12));

  const double two_norms[] = {2.0, 3.0};
  const double light[] = {0.0, 1.0};
  double predicted = 0.0;
  REQUIRE(feta_ge_ratio_prediction(0.01, 4.0, light, two_norms, 2, 2.0, &predicted) == FETA_OK);
  CHECK(predicted == doctest::Approx(0.01 * 4.0 / 3.0).epsilon(1e-12));
  const double heavy[] = {100.0, 100.0};
  CHECK(feta_ge_ratio_prediction(0.01, 4.0, heavy, two_norms, 2, 2.0, &predicted) ==
        FETA_ERR_VACUOUS);
  CHECK(std::string(feta_last_error()).find("vacuous") != std::string::npos);

  char buf[256];
  REQUIRE(feta_ge_report_csv(&report, buf, sizeof buf) == FETA_OK);
  const std::string cells(buf);
  CHECK(std::count(cells.begin(), cells.end(), ',') == 6);
  CHECK(cells.back() == '0');
  CHECK(feta_ge_report_csv(&report, buf, 4) == FETA_ERR_DIMENSION);
}

TEST_CASE("margin scores over a dataset") {
  feta_dataset* data_raw = nullptr;
  REQUIRE(feta_dataset_synth_blobs(3, 8, 20, 0.5, 21, &data_raw) == FETA_OK);
  dataset_ptr data(data_raw);
  const size_t hidden[] = {6};
  feta_network* net_raw = nullptr;
  REQUIRE(feta_network_create_mlp(8, hidden, 1, 3, 2, &net_raw) == FETA_OK);
  network_ptr net(net_raw);
  REQUIRE(feta_network_train_sgd(net.get(), data.get(), 8, 0.1, 16, 4) == FETA_OK);

  double lo = 0.0, avg = 0.0;
  REQUIRE(feta_network_min_score(net.get(), data.get(), &lo) == FETA_OK);
  REQUIRE(feta_network_mean_score(net.get(), data.get(), &avg) == FETA_OK);
  CHECK(std::isfinite(lo));
  CHECK(std::isfinite(avg));
  CHECK(lo <= avg);
}
