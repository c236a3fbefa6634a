#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "core/matrix.hpp"
#include "core/objective.hpp"

namespace feta {

// Labeled samples: one row of inputs per sample, labels in [0, classes).
struct Dataset {
  Matrix inputs;
  std::vector<std::int32_t> labels;
  std::int32_t classes = 0;

  Dataset() = default;
  Dataset(Matrix in, std::vector<std::int32_t> lab, std::int32_t num_classes);

  std::size_t size() const { return labels.size(); }
  std::size_t dim() const { return inputs.cols(); }
};

enum class Activation : std::uint8_t { Linear = 0, Relu = 1 };

// One dense layer: pre = x W + bias, out = act(pre). Weights are stored
// input-major (d_in x d_out) so batched forward passes are plain matmuls.
struct Layer {
  Matrix weights;
  std::vector<double> bias;
  Activation act = Activation::Relu;
};

// Plain feedforward net. The final layer is always Linear (logits); hidden
// layers are ReLU. Just enough of a runtime to train reference models,
// capture per-layer activations for pruning, and measure the damage after
// swapping a layer out.
class Network {
 public:
  explicit Network(std::vector<Layer> layers);

  // He-style random init: hidden weights N(0, 2/fan_in), output layer
  // N(0, 1/fan_in), zero biases.
  static Network mlp(std::size_t input_dim, std::span<const std::size_t> hidden,
                     std::int32_t classes, std::uint64_t seed);

  std::size_t layer_count() const { return layers_.size(); }
  std::size_t input_dim() const { return layers_.front().weights.rows(); }
  std::size_t output_dim() const { return layers_.back().weights.cols(); }
  const Layer& layer(std::size_t i) const;

  std::vector<double> forward(std::span<const double> x) const;
  Matrix forward_batch(const Matrix& x) const;  // logits, one row per sample

  // Post-activation output of layers [0, upto); upto = 0 returns the input.
  Matrix activations(const Matrix& x, std::size_t upto) const;

  // One layer applied to given inputs (rows are samples), with activation.
  Matrix layer_apply(std::size_t index, const Matrix& inputs) const;

  std::int32_t predict(std::span<const double> x) const;  // argmax, lowest index wins ties
  double accuracy(const Dataset& data) const;

  // Input/output pairs of one layer over a dataset, for reconstruction-based
  // pruning. With augment_bias the input matrix gains a trailing all-ones
  // column so a pruner can treat the bias as one more weight row.
  LayerData capture(const Dataset& data, std::size_t index, bool augment_bias) const;

  void replace_weights(std::size_t index, Matrix weights);  // bias kept
  // Install an augmented (d_in + 1) x d_out matrix: top block becomes the
  // weights, last row becomes the bias.
  void apply_augmented(std::size_t index, const Matrix& augmented);

  // Minibatch SGD on softmax cross-entropy. Deterministic for a fixed seed:
  // one reshuffle per epoch, per-sample gradients summed in batch order.
  void train_sgd(const Dataset& data, std::size_t epochs, double learning_rate,
                 std::size_t minibatch, std::uint64_t seed);

  std::vector<double> spectral_norms() const;  // per-layer operator norms

  // Fraction of samples whose predicted class differs between two nets.
  static double disagreement(const Network& a, const Network& b, const Dataset& data);

  void save(const std::string& path) const;
  static Network load(const std::string& path);

 private:
  std::vector<Layer> layers_;
};

}  // namespace feta
