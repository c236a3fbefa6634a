#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "core/matrix.hpp"
#include "core/network.hpp"

namespace feta {

// Data-manifold and confidence parameters entering the margin-based
// generalization bound. c_m is the per-dimension manifold extent, k its
// intrinsic dimension, n_y the number of classes, m the sample count and
// delta the confidence level.
struct ManifoldParams {
  double c_m = 1.0;
  double k = 2.0;
  std::int32_t n_y = 2;
  std::size_t m = 1;
  double delta = 0.05;
};

struct GeBoundReport {
  double score = 0.0;    // margin statistic of the scored samples
  double gamma = 0.0;    // normalized margin
  double penalty = 0.0;  // margin loss charged to the perturbation
  double a_const = 0.0;  // complexity constant A
  double b_const = 0.0;  // confidence constant B
  double bound = 0.0;    // A * (gamma - penalty)^(-k/2) + B, or +inf if vacuous
  bool vacuous = false;  // gamma - penalty <= 0
};

// Multiclass margin of one logit vector: sqrt(2) * (top - runner-up) where
// top is the logit of the classifier's own prediction. Negative never
// happens by construction; zero means a tie at the top.
double score(std::span<const double> logits, std::int32_t predicted);

double min_score(const Network& net, const Dataset& data);
double mean_score(const Network& net, const Dataset& data);

// Normalized margin: score / prod(spectral norms).
double margin_gamma(double score_value, std::span<const double> spectral_norms);

// Worst-case squared output distortion of one layer measured on data:
// max over rows of ||original - replacement||^2.
double layer_distortion(const Matrix& original_outputs, const Matrix& replacement_outputs);

// Covering slack between two input sets: max over rows of b of the squared
// distance to the nearest row of a.
double covering_epsilon(const Matrix& anchors, const Matrix& probes);

// Off-sample distortion bound: on-sample distortion c1 inflated by the
// layer operator norms acting on the covering slack.
double offsample_distortion(double c1, double norm_original, double norm_replacement,
                            double epsilon);

// Base margin bound for an unperturbed classifier:
//   A = sqrt(ln(2) * n_y * 2^(k+1) * c_m^k / m),  B = sqrt(2 ln(1/delta) / m),
//   bound = A * gamma^(-k/2) + B.
GeBoundReport ge_bound_base(double gamma, const ManifoldParams& mp);

// Same bound for a classifier with one perturbed layer: the margin loses
// sqrt(c2) * prod_{j > i} ||W_j|| / prod_j ||W_j||.
GeBoundReport ge_bound_single_layer(double gamma, double c2,
                                    std::span<const double> spectral_norms,
                                    std::size_t perturbed_layer, const ManifoldParams& mp);

// All layers perturbed at once: the losses add, layer i charged
// sqrt(c2_i) * prod_{j > i} ||W_j|| / prod_j ||W_j||.
GeBoundReport ge_bound_multi_layer(double gamma, std::span<const double> c2s,
                                   std::span<const double> spectral_norms,
                                   const ManifoldParams& mp);

// Relative prediction: scales a measured base generalization error by how
// much the perturbation eats into the margin,
//   predicted = base_ge * (score / (score - sum_i sqrt(c2_i) * prod_{j>i} ||W_j||))^(k/2).
// nullopt when the reduced margin is not positive (vacuous).
std::optional<double> ge_ratio_prediction(double base_ge, double score_stat,
                                          std::span<const double> c2s,
                                          std::span<const double> spectral_norms, double k);

// Flat CSV encoding of a report; columns, in order:
// score,gamma,penalty,a_const,b_const,bound,vacuous
// with bound rendered as the literal VACUOUS when the margin is destroyed.
std::string ge_report_csv(const GeBoundReport& r);

}  // namespace feta
