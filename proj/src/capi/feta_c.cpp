// C shim over the C++ core: opaque handles, status codes, thread-local error
// text. Exceptions never cross this boundary.

#include "feta/feta.h"

#include <algorithm>
#include <cstring>
#include <exception>
#include <new>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "core/baselines.hpp"
#include "core/bounds.hpp"
#include "core/data.hpp"
#include "core/errors.hpp"
#include "core/network.hpp"
#include "core/prune.hpp"
#include "core/svd.hpp"

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& msg) { g_last_error = msg; }

feta_status status_of(const std::exception& e) {
  set_error(e.what());
  if (dynamic_cast<const feta::DimensionError*>(&e)) return FETA_ERR_DIMENSION;
  if (dynamic_cast<const feta::FormatError*>(&e)) return FETA_ERR_FORMAT;
  if (dynamic_cast<const feta::IoError*>(&e)) return FETA_ERR_IO;
  if (dynamic_cast<const feta::DivergedError*>(&e)) return FETA_ERR_DIVERGED;
  if (dynamic_cast<const feta::PruneDivergedError*>(&e)) return FETA_ERR_DIVERGED;
  if (dynamic_cast<const feta::ValidationError*>(&e)) return FETA_ERR_INVALID_ARG;
  if (dynamic_cast<const std::bad_alloc*>(&e)) return FETA_ERR_INVALID_ARG;
  return FETA_ERR_INVALID_ARG;
}

feta_status null_arg(const char* what) {
  set_error(std::string("null argument: ") + what);
  return FETA_ERR_NULL_ARG;
}

template <typename Fn>
feta_status guarded(Fn&& fn) {
  try {
    fn();
    return FETA_OK;
  } catch (const std::exception& e) {
    return status_of(e);
  }
}

}  // namespace

struct feta_matrix_s {
  feta::Matrix m;
};

struct feta_dataset_s {
  feta::Dataset d;
};

struct feta_layerdata_s {
  feta::LayerData d;
};

struct feta_network_s {
  feta::Network n;
};

struct feta_prune_result_s {
  feta::PruneResult r;
};

extern "C" {

const char* feta_status_name(feta_status status) {
  switch (status) {
    case FETA_OK: return "ok";
    case FETA_ERR_NULL_ARG: return "null argument";
    case FETA_ERR_DIMENSION: return "dimension mismatch";
    case FETA_ERR_INVALID_ARG: return "invalid argument";
    case FETA_ERR_IO: return "io error";
    case FETA_ERR_FORMAT: return "format error";
    case FETA_ERR_DIVERGED: return "diverged";
    case FETA_ERR_VACUOUS: return "vacuous bound";
  }
  return "unknown status";
}

const char* feta_last_error(void) { return g_last_error.c_str(); }

const char* feta_version(void) { return "1.0.0"; }

/* ---------------- matrices ---------------- */

feta_status feta_matrix_create(size_t rows, size_t cols, const double* data, feta_matrix** out) {
  if (!out) return null_arg("out");
  return guarded([&] {
    if (data) {
      *out = new feta_matrix_s{feta::Matrix(rows, cols, std::vector<double>(data, data + rows * cols))};
    } else {
      *out = new feta_matrix_s{feta::Matrix(rows, cols)};
    }
  });
}

void feta_matrix_free(feta_matrix* m) { delete m; }

size_t feta_matrix_rows(const feta_matrix* m) { return m ? m->m.rows() : 0; }

size_t feta_matrix_cols(const feta_matrix* m) { return m ? m->m.cols() : 0; }

feta_status feta_matrix_copy_data(const feta_matrix* m, double* out, size_t capacity) {
  if (!m) return null_arg("matrix");
  if (!out) return null_arg("out");
  if (capacity < m->m.size()) {
    set_error("matrix copy: capacity " + std::to_string(capacity) + " < " +
              std::to_string(m->m.size()));
    return FETA_ERR_DIMENSION;
  }
  std::memcpy(out, m->m.data(), m->m.size() * sizeof(double));
  return FETA_OK;
}

feta_status feta_matrix_spectral_norm(const feta_matrix* m, double* out) {
  if (!m) return null_arg("matrix");
  if (!out) return null_arg("out");
  return guarded([&] { *out = feta::spectral_norm(m->m); });
}

feta_status feta_matrix_frobenius_norm(const feta_matrix* m, double* out) {
  if (!m) return null_arg("matrix");
  if (!out) return null_arg("out");
  *out = feta::frobenius_norm(m->m);
  return FETA_OK;
}

feta_status feta_matrix_zero_fraction(const feta_matrix* m, double* out) {
  if (!m) return null_arg("matrix");
  if (!out) return null_arg("out");
  *out = feta::zero_fraction(m->m);
  return FETA_OK;
}

/* ---------------- datasets ---------------- */

feta_status feta_dataset_create(const feta_matrix* inputs, const int32_t* labels, size_t count,
                                int32_t classes, feta_dataset** out) {
  if (!inputs) return null_arg("inputs");
  if (!labels) return null_arg("labels");
  if (!out) return null_arg("out");
  return guarded([&] {
    *out = new feta_dataset_s{
        feta::Dataset(inputs->m, std::vector<int32_t>(labels, labels + count), classes)};
  });
}

void feta_dataset_free(feta_dataset* d) { delete d; }

size_t feta_dataset_size(const feta_dataset* d) { return d ? d->d.size() : 0; }

size_t feta_dataset_dim(const feta_dataset* d) { return d ? d->d.dim() : 0; }

int32_t feta_dataset_classes(const feta_dataset* d) { return d ? d->d.classes : 0; }

feta_status feta_dataset_synth_blobs(int32_t classes, size_t dim, size_t per_class, double spread,
                                     uint64_t seed, feta_dataset** out) {
  if (!out) return null_arg("out");
  return guarded([&] {
    *out = new feta_dataset_s{feta::synth_blobs(classes, dim, per_class, spread, seed)};
  });
}

feta_status feta_dataset_load_idx(const char* images_path, const char* labels_path,
                                  feta_dataset** out) {
  if (!images_path) return null_arg("images_path");
  if (!labels_path) return null_arg("labels_path");
  if (!out) return null_arg("out");
  return guarded([&] { *out = new feta_dataset_s{feta::load_idx(images_path, labels_path)}; });
}

feta_status feta_dataset_split_per_class(const feta_dataset* d, size_t take_per_class,
                                         feta_dataset** out_first, feta_dataset** out_second) {
  if (!d) return null_arg("dataset");
  if (!out_first) return null_arg("out_first");
  if (!out_second) return null_arg("out_second");
  return guarded([&] {
    auto [first, second] = feta::split_per_class(d->d, take_per_class);
    *out_first = new feta_dataset_s{std::move(first)};
    *out_second = new feta_dataset_s{std::move(second)};
  });
}

feta_status feta_dataset_take(const feta_dataset* d, size_t count, feta_dataset** out) {
  if (!d) return null_arg("dataset");
  if (!out) return null_arg("out");
  return guarded([&] { *out = new feta_dataset_s{feta::take(d->d, count)}; });
}

/* ---------------- layer data ---------------- */

feta_status feta_layerdata_create(const feta_matrix* inputs, const feta_matrix* outputs,
                                  feta_layerdata** out) {
  if (!inputs) return null_arg("inputs");
  if (!outputs) return null_arg("outputs");
  if (!out) return null_arg("out");
  return guarded([&] { *out = new feta_layerdata_s{feta::LayerData(inputs->m, outputs->m)}; });
}

void feta_layerdata_free(feta_layerdata* d) { delete d; }

size_t feta_layerdata_samples(const feta_layerdata* d) { return d ? d->d.samples() : 0; }

size_t feta_layerdata_input_dim(const feta_layerdata* d) { return d ? d->d.d1() : 0; }

size_t feta_layerdata_output_dim(const feta_layerdata* d) { return d ? d->d.d2() : 0; }

feta_status feta_layerdata_toy_gaussian(size_t d1, size_t d2, size_t samples, uint64_t seed,
                                        feta_layerdata** out) {
  if (!out) return null_arg("out");
  return guarded([&] {
    feta::ToySpec spec;
    spec.d1 = d1;
    spec.d2 = d2;
    spec.n = samples;
    spec.seed = seed;
    *out = new feta_layerdata_s{feta::toy_gaussian(spec)};
  });
}

/* ---------------- networks ---------------- */

feta_status feta_network_create_mlp(size_t input_dim, const size_t* hidden_widths,
                                    size_t hidden_count, int32_t classes, uint64_t seed,
                                    feta_network** out) {
  if (!out) return null_arg("out");
  if (hidden_count > 0 && !hidden_widths) return null_arg("hidden_widths");
  return guarded([&] {
    *out = new feta_network_s{feta::Network::mlp(
        input_dim, std::span<const size_t>(hidden_widths, hidden_count), classes, seed)};
  });
}

void feta_network_free(feta_network* n) { delete n; }

feta_status feta_network_clone(const feta_network* n, feta_network** out) {
  if (!n) return null_arg("network");
  if (!out) return null_arg("out");
  return guarded([&] { *out = new feta_network_s{n->n}; });
}

feta_status feta_network_save(const feta_network* n, const char* path) {
  if (!n) return null_arg("network");
  if (!path) return null_arg("path");
  return guarded([&] { n->n.save(path); });
}

feta_status feta_network_load(const char* path, feta_network** out) {
  if (!path) return null_arg("path");
  if (!out) return null_arg("out");
  return guarded([&] { *out = new feta_network_s{feta::Network::load(path)}; });
}

size_t feta_network_layer_count(const feta_network* n) { return n ? n->n.layer_count() : 0; }

feta_status feta_network_layer_dims(const feta_network* n, size_t layer, size_t* d_in,
                                    size_t* d_out) {
  if (!n) return null_arg("network");
  if (!d_in || !d_out) return null_arg("out");
  return guarded([&] {
    const feta::Layer& l = n->n.layer(layer);
    *d_in = l.weights.rows();
    *d_out = l.weights.cols();
  });
}

feta_status feta_network_layer_weights(const feta_network* n, size_t layer, feta_matrix** out) {
  if (!n) return null_arg("network");
  if (!out) return null_arg("out");
  return guarded([&] { *out = new feta_matrix_s{n->n.layer(layer).weights}; });
}

feta_status feta_network_augmented_weights(const feta_network* n, size_t layer,
                                           feta_matrix** out) {
  if (!n) return null_arg("network");
  if (!out) return null_arg("out");
  return guarded([&] {
    const feta::Layer& l = n->n.layer(layer);
    feta::Matrix aug(l.weights.rows() + 1, l.weights.cols());
    std::memcpy(aug.data(), l.weights.data(), l.weights.size() * sizeof(double));
    std::memcpy(aug.row(l.weights.rows()), l.bias.data(), l.bias.size() * sizeof(double));
    *out = new feta_matrix_s{std::move(aug)};
  });
}

feta_status feta_network_train_sgd(feta_network* n, const feta_dataset* data, size_t epochs,
                                   double learning_rate, size_t minibatch, uint64_t seed) {
  if (!n) return null_arg("network");
  if (!data) return null_arg("data");
  return guarded([&] { n->n.train_sgd(data->d, epochs, learning_rate, minibatch, seed); });
}

feta_status feta_network_accuracy(const feta_network* n, const feta_dataset* data, double* out) {
  if (!n) return null_arg("network");
  if (!data) return null_arg("data");
  if (!out) return null_arg("out");
  return guarded([&] { *out = n->n.accuracy(data->d); });
}

feta_status feta_network_predict(const feta_network* n, const double* x, size_t dim,
                                 int32_t* out) {
  if (!n) return null_arg("network");
  if (!x) return null_arg("x");
  if (!out) return null_arg("out");
  return guarded([&] { *out = n->n.predict(std::span<const double>(x, dim)); });
}

feta_status feta_network_capture(const feta_network* n, const feta_dataset* data, size_t layer,
                                 int augment_bias, feta_layerdata** out) {
  if (!n) return null_arg("network");
  if (!data) return null_arg("data");
  if (!out) return null_arg("out");
  return guarded([&] {
    *out = new feta_layerdata_s{n->n.capture(data->d, layer, augment_bias != 0)};
  });
}

feta_status feta_network_activations(const feta_network* n, const feta_dataset* data,
                                     size_t depth, feta_matrix** out) {
  if (!n) return null_arg("network");
  if (!data) return null_arg("data");
  if (!out) return null_arg("out");
  return guarded([&] { *out = new feta_matrix_s{n->n.activations(data->d.inputs, depth)}; });
}

feta_status feta_network_layer_apply(const feta_network* n, size_t layer,
                                     const feta_matrix* inputs, feta_matrix** out) {
  if (!n) return null_arg("network");
  if (!inputs) return null_arg("inputs");
  if (!out) return null_arg("out");
  return guarded([&] { *out = new feta_matrix_s{n->n.layer_apply(layer, inputs->m)}; });
}

feta_status feta_network_replace_weights(feta_network* n, size_t layer,
                                         const feta_matrix* weights) {
  if (!n) return null_arg("network");
  if (!weights) return null_arg("weights");
  return guarded([&] { n->n.replace_weights(layer, weights->m); });
}

feta_status feta_network_apply_augmented(feta_network* n, size_t layer,
                                         const feta_matrix* augmented) {
  if (!n) return null_arg("network");
  if (!augmented) return null_arg("augmented");
  return guarded([&] { n->n.apply_augmented(layer, augmented->m); });
}

feta_status feta_network_spectral_norms(const feta_network* n, double* out, size_t capacity) {
  if (!n) return null_arg("network");
  if (!out) return null_arg("out");
  if (capacity < n->n.layer_count()) {
    set_error("spectral norms: capacity " + std::to_string(capacity) + " < " +
              std::to_string(n->n.layer_count()));
    return FETA_ERR_DIMENSION;
  }
  return guarded([&] {
    const std::vector<double> norms = n->n.spectral_norms();
    std::memcpy(out, norms.data(), norms.size() * sizeof(double));
  });
}

feta_status feta_network_disagreement(const feta_network* a, const feta_network* b,
                                      const feta_dataset* data, double* out) {
  if (!a || !b) return null_arg("network");
  if (!data) return null_arg("data");
  if (!out) return null_arg("out");
  return guarded([&] { *out = feta::Network::disagreement(a->n, b->n, data->d); });
}

/* ---------------- pruning ---------------- */

void feta_prune_config_init(feta_prune_config* cfg) {
  if (!cfg) return;
  cfg->reg_kind = FETA_REG_L1;
  cfg->lambda = 0.0;
  cfg->softplus_beta = 20.0;
  cfg->outer_iters = 10;
  cfg->convergence_tol = 1e-4;
  cfg->epochs = 3;
  cfg->inner_steps = 0;
  cfg->step_eta = 0.0;
  cfg->momentum = 0.95;
  cfg->minibatch = 128;
  cfg->seed = 0;
  cfg->bias_row = 0;
}

feta_status feta_prune_run(const feta_layerdata* data, const feta_matrix* init,
                           const feta_prune_config* cfg, feta_prune_result** out) {
  if (!data) return null_arg("data");
  if (!init) return null_arg("init");
  if (!cfg) return null_arg("config");
  if (!out) return null_arg("out");
  if (cfg->reg_kind < FETA_REG_NONE || cfg->reg_kind > FETA_REG_NUCLEAR) {
    set_error("prune: unknown regularizer kind " + std::to_string(cfg->reg_kind));
    return FETA_ERR_INVALID_ARG;
  }
  return guarded([&] {
    feta::PruneConfig c;
    c.reg.kind = static_cast<feta::RegKind>(cfg->reg_kind);
    c.reg.lambda = cfg->lambda;
    c.smooth.beta = cfg->softplus_beta;
    c.outer_iters = cfg->outer_iters;
    c.convergence_tol = cfg->convergence_tol;
    c.solver.epochs = cfg->epochs;
    c.solver.inner_steps = cfg->inner_steps;
    c.solver.step_eta = cfg->step_eta;
    c.solver.momentum_beta = cfg->momentum;
    c.solver.minibatch = cfg->minibatch;
    c.solver.seed = cfg->seed;
    c.bias_row = cfg->bias_row != 0;
    *out = new feta_prune_result_s{feta::prune_layer(data->d, init->m, c)};
  });
}

void feta_prune_result_free(feta_prune_result* r) { delete r; }

feta_status feta_prune_result_matrix(const feta_prune_result* r, feta_matrix** out) {
  if (!r) return null_arg("result");
  if (!out) return null_arg("out");
  return guarded([&] { *out = new feta_matrix_s{r->r.pruned}; });
}

feta_status feta_prune_result_sparsity(const feta_prune_result* r, double* out) {
  if (!r) return null_arg("result");
  if (!out) return null_arg("out");
  *out = r->r.achieved_sparsity;
  return FETA_OK;
}

feta_status feta_prune_result_layer_mse(const feta_prune_result* r, double* out) {
  if (!r) return null_arg("result");
  if (!out) return null_arg("out");
  *out = r->r.layer_mse;
  return FETA_OK;
}

feta_status feta_prune_result_iterations(const feta_prune_result* r, size_t* out) {
  if (!r) return null_arg("result");
  if (!out) return null_arg("out");
  *out = r->r.iterations_used;
  return FETA_OK;
}

feta_status feta_prune_result_converged(const feta_prune_result* r, int* out) {
  if (!r) return null_arg("result");
  if (!out) return null_arg("out");
  *out = r->r.converged ? 1 : 0;
  return FETA_OK;
}

feta_status feta_prune_result_trace(const feta_prune_result* r, double* out, size_t capacity,
                                    size_t* length) {
  if (!r) return null_arg("result");
  if (!length) return null_arg("length");
  *length = r->r.objective_trace.size();
  if (out) {
    const size_t n = std::min(capacity, r->r.objective_trace.size());
    std::memcpy(out, r->r.objective_trace.data(), n * sizeof(double));
  }
  return FETA_OK;
}

/* ---------------- baselines ---------------- */

feta_status feta_hard_threshold(const feta_matrix* w, double threshold, feta_matrix** out) {
  if (!w) return null_arg("matrix");
  if (!out) return null_arg("out");
  return guarded([&] { *out = new feta_matrix_s{feta::hard_threshold(w->m, threshold)}; });
}

feta_status feta_threshold_for_sparsity(const feta_matrix* w, double target_sparsity,
                                        double* out) {
  if (!w) return null_arg("matrix");
  if (!out) return null_arg("out");
  return guarded([&] { *out = feta::threshold_for_sparsity(w->m, target_sparsity); });
}

feta_status feta_truncated_svd(const feta_matrix* w, size_t k, feta_matrix** out) {
  if (!w) return null_arg("matrix");
  if (!out) return null_arg("out");
  return guarded([&] {
    *out = new feta_matrix_s{feta::low_rank_reconstruct(feta::truncated_svd(w->m, k))};
  });
}

feta_status feta_compression_ratio(size_t d1, size_t d2, size_t k, double* out) {
  if (!out) return null_arg("out");
  return guarded([&] { *out = feta::compression_ratio(d1, d2, k); });
}

/* ---------------- bounds ---------------- */

namespace {

feta::ManifoldParams convert(const feta_manifold_params* mp) {
  feta::ManifoldParams out;
  out.c_m = mp->c_m;
  out.k = mp->k;
  out.n_y = mp->n_y;
  out.m = mp->m;
  out.delta = mp->delta;
  return out;
}

void fill(feta_ge_report* out, const feta::GeBoundReport& r) {
  out->score = r.score;
  out->gamma = r.gamma;
  out->penalty = r.penalty;
  out->a_const = r.a_const;
  out->b_const = r.b_const;
  out->bound = r.bound;
  out->vacuous = r.vacuous ? 1 : 0;
}

}  // namespace

feta_status feta_network_min_score(const feta_network* n, const feta_dataset* data, double* out) {
  if (!n) return null_arg("network");
  if (!data) return null_arg("data");
  if (!out) return null_arg("out");
  return guarded([&] { *out = feta::min_score(n->n, data->d); });
}

feta_status feta_network_mean_score(const feta_network* n, const feta_dataset* data,
                                    double* out) {
  if (!n) return null_arg("network");
  if (!data) return null_arg("data");
  if (!out) return null_arg("out");
  return guarded([&] { *out = feta::mean_score(n->n, data->d); });
}

feta_status feta_layer_distortion(const feta_matrix* original, const feta_matrix* replacement,
                                  double* out) {
  if (!original || !replacement) return null_arg("matrix");
  if (!out) return null_arg("out");
  return guarded([&] { *out = feta::layer_distortion(original->m, replacement->m); });
}

feta_status feta_covering_epsilon(const feta_matrix* anchors, const feta_matrix* probes,
                                  double* out) {
  if (!anchors || !probes) return null_arg("matrix");
  if (!out) return null_arg("out");
  return guarded([&] { *out = feta::covering_epsilon(anchors->m, probes->m); });
}

feta_status feta_offsample_distortion(double c1, double norm_original, double norm_replacement,
                                      double epsilon, double* out) {
  if (!out) return null_arg("out");
  return guarded(
      [&] { *out = feta::offsample_distortion(c1, norm_original, norm_replacement, epsilon); });
}

feta_status feta_ge_bound_base(double gamma, const feta_manifold_params* mp,
                               feta_ge_report* out) {
  if (!mp) return null_arg("manifold params");
  if (!out) return null_arg("out");
  return guarded([&] { fill(out, feta::ge_bound_base(gamma, convert(mp))); });
}

feta_status feta_ge_bound_single_layer(double gamma, double c2, const double* spectral_norms,
                                       size_t layer_count, size_t perturbed_layer,
                                       const feta_manifold_params* mp, feta_ge_report* out) {
  if (!spectral_norms) return null_arg("spectral_norms");
  if (!mp) return null_arg("manifold params");
  if (!out) return null_arg("out");
  return guarded([&] {
    fill(out, feta::ge_bound_single_layer(
                  gamma, c2, std::span<const double>(spectral_norms, layer_count),
                  perturbed_layer, convert(mp)));
  });
}

feta_status feta_ge_bound_multi_layer(double gamma, const double* c2s,
                                      const double* spectral_norms, size_t layer_count,
                                      const feta_manifold_params* mp, feta_ge_report* out) {
  if (!c2s) return null_arg("c2s");
  if (!spectral_norms) return null_arg("spectral_norms");
  if (!mp) return null_arg("manifold params");
  if (!out) return null_arg("out");
  return guarded([&] {
    fill(out, feta::ge_bound_multi_layer(gamma, std::span<const double>(c2s, layer_count),
                                         std::span<const double>(spectral_norms, layer_count),
                                         convert(mp)));
  });
}

feta_status feta_ge_ratio_prediction(double base_ge, double score_stat, const double* c2s,
                                     const double* spectral_norms, size_t layer_count, double k,
                                     double* out) {
  if (!c2s) return null_arg("c2s");
  if (!spectral_norms) return null_arg("spectral_norms");
  if (!out) return null_arg("out");
  feta_status st = FETA_OK;
  const feta_status guard = guarded([&] {
    const std::optional<double> pred = feta::ge_ratio_prediction(
        base_ge, score_stat, std::span<const double>(c2s, layer_count),
        std::span<const double>(spectral_norms, layer_count), k);
    if (!pred) {
      set_error("ge ratio: perturbation destroys the margin (vacuous)");
      st = FETA_ERR_VACUOUS;
      return;
    }
    *out = *pred;
  });
  return guard != FETA_OK ? guard : st;
}

feta_status feta_ge_report_csv(const feta_ge_report* r, char* buf, size_t capacity) {
  if (!r) return null_arg("report");
  if (!buf) return null_arg("buf");
  return guarded([&] {
    feta::GeBoundReport rep;
    rep.score = r->score;
    rep.gamma = r->gamma;
    rep.penalty = r->penalty;
    rep.a_const = r->a_const;
    rep.b_const = r->b_const;
    rep.bound = r->bound;
    rep.vacuous = r->vacuous != 0;
    const std::string cells = feta::ge_report_csv(rep);
    if (cells.size() + 1 > capacity) {
      throw feta::DimensionError("report csv: buffer capacity " + std::to_string(capacity) +
                                 " < " + std::to_string(cells.size() + 1));
    }
    std::memcpy(buf, cells.c_str(), cells.size() + 1);
  });
}

} /* extern "C" */
