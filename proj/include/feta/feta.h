/* feta: post-training pruning of dense network layers.
 *
 * The library refits a trained layer on captured input/output activations
 * while driving it sparse (entrywise) or low-rank, using difference-of-convex
 * iterations around a variance-reduced proximal solver. It also ships the
 * classic one-shot baselines (magnitude thresholding, truncated SVD), a small
 * MLP runtime to produce and evaluate reference models, and a margin-based
 * generalization-bound calculator for before/after comparisons.
 *
 * Conventions:
 *   - Every function returns feta_status; FETA_OK is 0.
 *   - Out-parameters are written only on FETA_OK.
 *   - Objects returned through feta_*_create/load/run are owned by the
 *     caller and released with the matching feta_*_free (NULL is a no-op).
 *   - feta_last_error() describes the most recent failure on the calling
 *     thread.
 */

#ifndef FETA_H
#define FETA_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum feta_status {
  FETA_OK = 0,
  FETA_ERR_NULL_ARG = 1,    /* required pointer was NULL */
  FETA_ERR_DIMENSION = 2,   /* shape mismatch or index out of range */
  FETA_ERR_INVALID_ARG = 3, /* value outside its documented domain */
  FETA_ERR_IO = 4,          /* file could not be opened/read/written */
  FETA_ERR_FORMAT = 5,      /* file opened but its contents are malformed */
  FETA_ERR_DIVERGED = 6,    /* iterates or losses became non-finite */
  FETA_ERR_VACUOUS = 7,     /* requested bound exists only as +infinity */
} feta_status;

const char* feta_status_name(feta_status status);
const char* feta_last_error(void); /* thread-local; empty string if none */
const char* feta_version(void);

/* ------------------------------------------------------------------ */
/* Dense matrices (row-major doubles)                                  */

typedef struct feta_matrix_s feta_matrix;

/* data may be NULL for a zero matrix; otherwise rows*cols doubles. */
feta_status feta_matrix_create(size_t rows, size_t cols, const double* data, feta_matrix** out);
void feta_matrix_free(feta_matrix* m);
size_t feta_matrix_rows(const feta_matrix* m);
size_t feta_matrix_cols(const feta_matrix* m);
/* Copies all entries row-major into out (capacity rows*cols). */
feta_status feta_matrix_copy_data(const feta_matrix* m, double* out, size_t capacity);
feta_status feta_matrix_spectral_norm(const feta_matrix* m, double* out);
feta_status feta_matrix_frobenius_norm(const feta_matrix* m, double* out);
/* Fraction of exactly-zero entries. */
feta_status feta_matrix_zero_fraction(const feta_matrix* m, double* out);

/* ------------------------------------------------------------------ */
/* Labeled datasets                                                    */

typedef struct feta_dataset_s feta_dataset;

feta_status feta_dataset_create(const feta_matrix* inputs, const int32_t* labels, size_t count,
                                int32_t classes, feta_dataset** out);
void feta_dataset_free(feta_dataset* d);
size_t feta_dataset_size(const feta_dataset* d);
size_t feta_dataset_dim(const feta_dataset* d);
int32_t feta_dataset_classes(const feta_dataset* d);

/* Gaussian class blobs; samples grouped by class. */
feta_status feta_dataset_synth_blobs(int32_t classes, size_t dim, size_t per_class, double spread,
                                     uint64_t seed, feta_dataset** out);
/* IDX image/label pair; pixels scaled to [0,1]. */
feta_status feta_dataset_load_idx(const char* images_path, const char* labels_path,
                                  feta_dataset** out);
/* First take_per_class samples of each class vs the remainder. */
feta_status feta_dataset_split_per_class(const feta_dataset* d, size_t take_per_class,
                                         feta_dataset** out_first, feta_dataset** out_second);
feta_status feta_dataset_take(const feta_dataset* d, size_t count, feta_dataset** out);

/* ------------------------------------------------------------------ */
/* Captured layer activations                                          */

typedef struct feta_layerdata_s feta_layerdata;

feta_status feta_layerdata_create(const feta_matrix* inputs, const feta_matrix* outputs,
                                  feta_layerdata** out);
void feta_layerdata_free(feta_layerdata* d);
size_t feta_layerdata_samples(const feta_layerdata* d);
size_t feta_layerdata_input_dim(const feta_layerdata* d);
size_t feta_layerdata_output_dim(const feta_layerdata* d);

/* Synthetic instance: Gaussian inputs through a random layer, ReLU outputs. */
feta_status feta_layerdata_toy_gaussian(size_t d1, size_t d2, size_t samples, uint64_t seed,
                                        feta_layerdata** out);

/* ------------------------------------------------------------------ */
/* Networks                                                            */

typedef struct feta_network_s feta_network;

/* Fully-connected ReLU net with a linear output layer, random init. */
feta_status feta_network_create_mlp(size_t input_dim, const size_t* hidden_widths,
                                    size_t hidden_count, int32_t classes, uint64_t seed,
                                    feta_network** out);
void feta_network_free(feta_network* n);
feta_status feta_network_clone(const feta_network* n, feta_network** out);
feta_status feta_network_save(const feta_network* n, const char* path);
feta_status feta_network_load(const char* path, feta_network** out);

size_t feta_network_layer_count(const feta_network* n);
feta_status feta_network_layer_dims(const feta_network* n, size_t layer, size_t* d_in,
                                    size_t* d_out);
feta_status feta_network_layer_weights(const feta_network* n, size_t layer, feta_matrix** out);
/* Weights with the bias appended as a final row: (d_in+1) x d_out. The
 * natural starting point for pruning against bias-augmented captures. */
feta_status feta_network_augmented_weights(const feta_network* n, size_t layer,
                                           feta_matrix** out);

/* Minibatch SGD on softmax cross-entropy; deterministic for a fixed seed. */
feta_status feta_network_train_sgd(feta_network* n, const feta_dataset* data, size_t epochs,
                                   double learning_rate, size_t minibatch, uint64_t seed);
feta_status feta_network_accuracy(const feta_network* n, const feta_dataset* data, double* out);
feta_status feta_network_predict(const feta_network* n, const double* x, size_t dim,
                                 int32_t* out);

/* Input/output activations of one layer over a dataset. With augment_bias,
 * inputs gain a trailing all-ones column (bias folded into the weights). */
feta_status feta_network_capture(const feta_network* n, const feta_dataset* data, size_t layer,
                                 int augment_bias, feta_layerdata** out);
/* Post-activation outputs of the first `depth` layers over a dataset;
 * depth 0 returns the inputs themselves. */
feta_status feta_network_activations(const feta_network* n, const feta_dataset* data,
                                     size_t depth, feta_matrix** out);
/* One layer applied to arbitrary inputs (rows are samples). */
feta_status feta_network_layer_apply(const feta_network* n, size_t layer,
                                     const feta_matrix* inputs, feta_matrix** out);

/* Swap a layer's weights (bias untouched). */
feta_status feta_network_replace_weights(feta_network* n, size_t layer,
                                         const feta_matrix* weights);
/* Install a (d_in+1) x d_out augmented matrix: last row becomes the bias. */
feta_status feta_network_apply_augmented(feta_network* n, size_t layer,
                                         const feta_matrix* augmented);

/* Per-layer spectral norms into out (capacity layer_count). */
feta_status feta_network_spectral_norms(const feta_network* n, double* out, size_t capacity);
/* Fraction of samples whose prediction changed between two nets. */
feta_status feta_network_disagreement(const feta_network* a, const feta_network* b,
                                      const feta_dataset* data, double* out);

/* ------------------------------------------------------------------ */
/* Pruning                                                             */

typedef enum feta_reg_kind {
  FETA_REG_NONE = 0,
  FETA_REG_L1 = 1,      /* entrywise sparsity */
  FETA_REG_NUCLEAR = 2, /* low rank */
} feta_reg_kind;

typedef struct feta_prune_config {
  int reg_kind;           /* feta_reg_kind */
  double lambda;          /* penalty strength, >= 0 */
  double softplus_beta;   /* smooth-ReLU sharpness */
  size_t outer_iters;     /* difference-of-convex rounds */
  double convergence_tol; /* relative iterate change for early stop */
  size_t epochs;          /* inner solver snapshot rounds */
  size_t inner_steps;     /* per epoch; 0 = ceil(samples/minibatch) */
  double step_eta;        /* 0 = auto (1e-3 with 1e-4 fallback) */
  double momentum;        /* inner extrapolation weight, [0,1) */
  size_t minibatch;       /* clamped to the sample count */
  uint64_t seed;
  int bias_row;           /* last row of U is a folded-in bias */
} feta_prune_config;

/* Fills every field with its default (L1, lambda 0, beta 20, 10 rounds,
 * tol 1e-4, 3 epochs, auto steps, momentum 0.95, minibatch 128, seed 0). */
void feta_prune_config_init(feta_prune_config* cfg);

typedef struct feta_prune_result_s feta_prune_result;

/* Runs the difference-of-convex pruner from the given initial matrix
 * (d1 x d2, or (d1+1) x d2 with bias_row folded in). */
feta_status feta_prune_run(const feta_layerdata* data, const feta_matrix* init,
                           const feta_prune_config* cfg, feta_prune_result** out);
void feta_prune_result_free(feta_prune_result* r);

feta_status feta_prune_result_matrix(const feta_prune_result* r, feta_matrix** out);
feta_status feta_prune_result_sparsity(const feta_prune_result* r, double* out);
feta_status feta_prune_result_layer_mse(const feta_prune_result* r, double* out);
feta_status feta_prune_result_iterations(const feta_prune_result* r, size_t* out);
feta_status feta_prune_result_converged(const feta_prune_result* r, int* out);
/* Composite objective after each round. Writes min(capacity, length) values;
 * *length receives the full trace length. out may be NULL to query length. */
feta_status feta_prune_result_trace(const feta_prune_result* r, double* out, size_t capacity,
                                    size_t* length);

/* ------------------------------------------------------------------ */
/* Baselines                                                           */

/* Entries with |w| strictly above the threshold survive. */
feta_status feta_hard_threshold(const feta_matrix* w, double threshold, feta_matrix** out);
/* Threshold achieving at least the target zero fraction (exact up to ties). */
feta_status feta_threshold_for_sparsity(const feta_matrix* w, double target_sparsity,
                                        double* out);
/* Best rank-k approximation, returned dense. */
feta_status feta_truncated_svd(const feta_matrix* w, size_t k, feta_matrix** out);
/* Factored storage relative to dense: (k*d1 + k + k*d2) / (d1*d2). */
feta_status feta_compression_ratio(size_t d1, size_t d2, size_t k, double* out);

/* ------------------------------------------------------------------ */
/* Generalization bounds                                               */

typedef struct feta_ge_report {
  double score;   /* margin statistic */
  double gamma;   /* normalized margin */
  double penalty; /* margin loss charged to the perturbation */
  double a_const; /* complexity constant */
  double b_const; /* confidence constant */
  double bound;   /* +infinity when vacuous */
  int vacuous;
} feta_ge_report;

typedef struct feta_manifold_params {
  double c_m;   /* per-dimension data extent */
  double k;     /* intrinsic dimension */
  int32_t n_y;  /* number of classes */
  size_t m;     /* sample count */
  double delta; /* confidence level in (0,1) */
} feta_manifold_params;

/* sqrt(2) * (top logit - runner-up) over a dataset. */
feta_status feta_network_min_score(const feta_network* n, const feta_dataset* data, double* out);
feta_status feta_network_mean_score(const feta_network* n, const feta_dataset* data, double* out);

/* Worst squared row distance between two equal-shape output matrices. */
feta_status feta_layer_distortion(const feta_matrix* original, const feta_matrix* replacement,
                                  double* out);
/* Worst squared distance from each probe row to its nearest anchor row. */
feta_status feta_covering_epsilon(const feta_matrix* anchors, const feta_matrix* probes,
                                  double* out);
/* On-sample distortion inflated to off-sample points:
 * c1 + (norm_original + norm_replacement) * epsilon. */
feta_status feta_offsample_distortion(double c1, double norm_original, double norm_replacement,
                                      double epsilon, double* out);

feta_status feta_ge_bound_base(double gamma, const feta_manifold_params* mp,
                               feta_ge_report* out);
feta_status feta_ge_bound_single_layer(double gamma, double c2, const double* spectral_norms,
                                       size_t layer_count, size_t perturbed_layer,
                                       const feta_manifold_params* mp, feta_ge_report* out);
feta_status feta_ge_bound_multi_layer(double gamma, const double* c2s,
                                      const double* spectral_norms, size_t layer_count,
                                      const feta_manifold_params* mp, feta_ge_report* out);
/* Predicted GE of the perturbed net from a measured base GE. Returns
 * FETA_ERR_VACUOUS when the perturbation destroys the margin. */
feta_status feta_ge_ratio_prediction(double base_ge, double score_stat, const double* c2s,
                                     const double* spectral_norms, size_t layer_count, double k,
                                     double* out);

/* Flat CSV cells for a report, in the order
 * score,gamma,penalty,a_const,b_const,bound,vacuous
 * with bound rendered as the literal VACUOUS when the margin is destroyed. */
feta_status feta_ge_report_csv(const feta_ge_report* r, char* buf, size_t capacity);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* FETA_H */
