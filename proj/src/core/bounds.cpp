#include "core/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

#include "core/errors.hpp"

namespace feta {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_manifold(const ManifoldParams& mp) {
  if (mp.c_m <= 0.0 || !std::isfinite(mp.c_m)) {
    throw ValidationError("bounds: manifold extent must be finite and positive");
  }
  if (mp.k <= 0.0 || !std::isfinite(mp.k)) {
    throw ValidationError("bounds: intrinsic dimension must be finite and positive");
  }
  if (mp.n_y < 2) throw ValidationError("bounds: need at least two classes");
  if (mp.m == 0) throw ValidationError("bounds: sample count must be positive");
  if (!(mp.delta > 0.0 && mp.delta < 1.0)) {
    throw ValidationError("bounds: delta must lie in (0, 1)");
  }
}

double product(std::span<const double> values, std::size_t from = 0) {
  double p = 1.0;
  for (std::size_t i = from; i < values.size(); ++i) p *= values[i];
  return p;
}

void check_norms(std::span<const double> norms) {
  if (norms.empty()) throw ValidationError("bounds: need at least one layer norm");
  for (double n : norms) {
    if (n <= 0.0 || !std::isfinite(n)) {
      throw ValidationError("bounds: spectral norms must be finite and positive");
    }
  }
}

GeBoundReport finish_report(double gamma, double pnlty, const ManifoldParams& mp) {
  GeBoundReport r;
  r.gamma = gamma;
  r.penalty = pnlty;
  r.a_const = std::sqrt(std::log(2.0) * static_cast<double>(mp.n_y) *
                        std::pow(2.0, mp.k + 1.0) * std::pow(mp.c_m, mp.k) /
                        static_cast<double>(mp.m));
  r.b_const = std::sqrt(2.0 * std::log(1.0 / mp.delta) / static_cast<double>(mp.m));
  const double margin = gamma - pnlty;
  if (margin <= 0.0) {
    r.vacuous = true;
    r.bound = kInf;
  } else {
    r.bound = r.a_const * std::pow(margin, -mp.k / 2.0) + r.b_const;
  }
  return r;
}

}  // namespace

double score(std::span<const double> logits, std::int32_t predicted) {
  if (logits.size() < 2) throw ValidationError("score: need at least two logits");
  const std::size_t p = static_cast<std::size_t>(predicted);
  if (predicted < 0 || p >= logits.size()) {
    throw ValidationError("score: predicted class " + std::to_string(predicted) + " out of " +
                          std::to_string(logits.size()));
  }
  double runner_up = -kInf;
  for (std::size_t j = 0; j < logits.size(); ++j) {
    if (j == p) continue;
    runner_up = std::max(runner_up, logits[j]);
  }
  return std::numbers::sqrt2 * (logits[p] - runner_up);
}

namespace {

template <typename Fold>
double fold_scores(const Network& net, const Dataset& data, double initial, Fold fold) {
  if (data.size() == 0) throw ValidationError("score: empty dataset");
  const Matrix logits = net.forward_batch(data.inputs);
  double acc = initial;
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    const double* row = logits.row(i);
    std::size_t best = 0;
    for (std::size_t j = 1; j < logits.cols(); ++j) {
      if (row[j] > row[best]) best = j;
    }
    const double s = score(std::span<const double>(row, logits.cols()),
                           static_cast<std::int32_t>(best));
    acc = fold(acc, s);
  }
  return acc;
}

}  // namespace

double min_score(const Network& net, const Dataset& data) {
  return fold_scores(net, data, kInf, [](double a, double s) { return std::min(a, s); });
}

double mean_score(const Network& net, const Dataset& data) {
  const double total =
      fold_scores(net, data, 0.0, [](double a, double s) { return a + s; });
  return total / static_cast<double>(data.size());
}

double margin_gamma(double score_value, std::span<const double> spectral_norms) {
  check_norms(spectral_norms);
  if (!std::isfinite(score_value)) throw ValidationError("margin: non-finite score");
  return score_value / product(spectral_norms);
}

double layer_distortion(const Matrix& original_outputs, const Matrix& replacement_outputs) {
  if (original_outputs.rows() != replacement_outputs.rows() ||
      original_outputs.cols() != replacement_outputs.cols()) {
    throw DimensionError("distortion: output shapes differ");
  }
  if (original_outputs.rows() == 0) throw ValidationError("distortion: no samples");
  double worst = 0.0;
  for (std::size_t i = 0; i < original_outputs.rows(); ++i) {
    const double* a = original_outputs.row(i);
    const double* b = replacement_outputs.row(i);
    double d = 0.0;
    for (std::size_t j = 0; j < original_outputs.cols(); ++j) {
      const double diff = a[j] - b[j];
      d += diff * diff;
    }
    worst = std::max(worst, d);
  }
  return worst;
}

double covering_epsilon(const Matrix& anchors, const Matrix& probes) {
  if (anchors.cols() != probes.cols()) throw DimensionError("covering: widths differ");
  if (anchors.rows() == 0 || probes.rows() == 0) throw ValidationError("covering: empty set");
  double worst = 0.0;
  for (std::size_t i = 0; i < probes.rows(); ++i) {
    const double* p = probes.row(i);
    double nearest = kInf;
    for (std::size_t r = 0; r < anchors.rows(); ++r) {
      const double* a = anchors.row(r);
      double d = 0.0;
      for (std::size_t j = 0; j < anchors.cols(); ++j) {
        const double diff = p[j] - a[j];
        d += diff * diff;
        if (d >= nearest) break;  // already worse than the best anchor
      }
      nearest = std::min(nearest, d);
    }
    worst = std::max(worst, nearest);
  }
  return worst;
}

double offsample_distortion(double c1, double norm_original, double norm_replacement,
                            double epsilon) {
  if (c1 < 0.0 || epsilon < 0.0) {
    throw ValidationError("offsample: distortion terms must be >= 0");
  }
  if (norm_original < 0.0 || norm_replacement < 0.0) {
    throw ValidationError("offsample: norms must be >= 0");
  }
  return c1 + (norm_original + norm_replacement) * epsilon;
}

GeBoundReport ge_bound_base(double gamma, const ManifoldParams& mp) {
  check_manifold(mp);
  if (gamma <= 0.0 || !std::isfinite(gamma)) {
    throw ValidationError("bounds: base margin must be finite and positive");
  }
  return finish_report(gamma, 0.0, mp);
}

GeBoundReport ge_bound_single_layer(double gamma, double c2,
                                    std::span<const double> spectral_norms,
                                    std::size_t perturbed_layer, const ManifoldParams& mp) {
  check_manifold(mp);
  check_norms(spectral_norms);
  if (c2 < 0.0 || !std::isfinite(c2)) {
    throw ValidationError("bounds: distortion must be finite and >= 0");
  }
  if (perturbed_layer >= spectral_norms.size()) {
    throw ValidationError("bounds: perturbed layer index out of range");
  }
  const double pnlty =
      std::sqrt(c2) * product(spectral_norms, perturbed_layer + 1) / product(spectral_norms);
  return finish_report(gamma, pnlty, mp);
}

GeBoundReport ge_bound_multi_layer(double gamma, std::span<const double> c2s,
                                   std::span<const double> spectral_norms,
                                   const ManifoldParams& mp) {
  check_manifold(mp);
  check_norms(spectral_norms);
  if (c2s.size() != spectral_norms.size()) {
    throw DimensionError("bounds: need one distortion per layer");
  }
  const double denom = product(spectral_norms);
  double pnlty = 0.0;
  for (std::size_t i = 0; i < c2s.size(); ++i) {
    if (c2s[i] < 0.0 || !std::isfinite(c2s[i])) {
      throw ValidationError("bounds: distortion must be finite and >= 0");
    }
    pnlty += std::sqrt(c2s[i]) * product(spectral_norms, i + 1) / denom;
  }
  return finish_report(gamma, pnlty, mp);
}

std::optional<double> ge_ratio_prediction(double base_ge, double score_stat,
                                          std::span<const double> c2s,
                                          std::span<const double> spectral_norms, double k) {
  check_norms(spectral_norms);
  if (c2s.size() != spectral_norms.size()) {
    throw DimensionError("bounds: need one distortion per layer");
  }
  if (base_ge < 0.0 || !std::isfinite(base_ge)) {
    throw ValidationError("bounds: base generalization error must be finite and >= 0");
  }
  if (score_stat <= 0.0 || !std::isfinite(score_stat)) {
    throw ValidationError("bounds: score statistic must be finite and positive");
  }
  if (k <= 0.0 || !std::isfinite(k)) {
    throw ValidationError("bounds: intrinsic dimension must be finite and positive");
  }
  double loss = 0.0;
  for (std::size_t i = 0; i < c2s.size(); ++i) {
    if (c2s[i] < 0.0 || !std::isfinite(c2s[i])) {
      throw ValidationError("bounds: distortion must be finite and >= 0");
    }
    loss += std::sqrt(c2s[i]) * product(spectral_norms, i + 1);
  }
  const double reduced = score_stat - loss;
  if (reduced <= 0.0) return std::nullopt;
  return base_ge * std::pow(score_stat / reduced, k / 2.0);
}

std::string ge_report_csv(const GeBoundReport& r) {
  char buf[256];
  if (r.vacuous) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g,VACUOUS,1", r.score, r.gamma,
                  r.penalty, r.a_const, r.b_const);
  } else {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,0", r.score, r.gamma,
                  r.penalty, r.a_const, r.b_const, r.bound);
  }
  return buf;
}

}  // namespace feta
