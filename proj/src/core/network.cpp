#include "core/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>

#include "core/errors.hpp"
#include "core/rng.hpp"
#include "core/svd.hpp"

namespace feta {

Dataset::Dataset(Matrix in, std::vector<std::int32_t> lab, std::int32_t num_classes)
    : inputs(std::move(in)), labels(std::move(lab)), classes(num_classes) {
  if (inputs.rows() != labels.size()) {
    throw DimensionError("dataset: " + std::to_string(inputs.rows()) + " rows vs " +
                         std::to_string(labels.size()) + " labels");
  }
  if (classes < 2) throw ValidationError("dataset: needs at least two classes");
  for (std::int32_t l : labels) {
    if (l < 0 || l >= classes) {
      throw ValidationError("dataset: label " + std::to_string(l) + " outside [0, " +
                            std::to_string(classes) + ")");
    }
  }
  if (!inputs.all_finite()) throw ValidationError("dataset: non-finite inputs");
}

namespace {

void apply_activation(Matrix& m, Activation act) {
  if (act == Activation::Linear) return;
  double* p = m.data();
  for (std::size_t i = 0; i < m.size(); ++i) p[i] = std::max(p[i], 0.0);
}

void add_bias_rows(Matrix& m, const std::vector<double>& bias) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double* row = m.row(i);
    for (std::size_t j = 0; j < m.cols(); ++j) row[j] += bias[j];
  }
}

void validate_layers(const std::vector<Layer>& layers) {
  if (layers.empty()) throw ValidationError("network: needs at least one layer");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const Layer& l = layers[i];
    if (l.weights.rows() == 0 || l.weights.cols() == 0) {
      throw DimensionError("network: layer " + std::to_string(i) + " has empty weights");
    }
    if (l.bias.size() != l.weights.cols()) {
      throw DimensionError("network: layer " + std::to_string(i) + " bias length " +
                           std::to_string(l.bias.size()) + " vs " +
                           std::to_string(l.weights.cols()) + " outputs");
    }
    if (i + 1 < layers.size() && l.weights.cols() != layers[i + 1].weights.rows()) {
      throw DimensionError("network: layer " + std::to_string(i) + " outputs " +
                           std::to_string(l.weights.cols()) + " but layer " +
                           std::to_string(i + 1) + " expects " +
                           std::to_string(layers[i + 1].weights.rows()));
    }
  }
  if (layers.back().act != Activation::Linear) {
    throw ValidationError("network: final layer must be linear (logits)");
  }
}

}  // namespace

Network::Network(std::vector<Layer> layers) : layers_(std::move(layers)) {
  validate_layers(layers_);
}

Network Network::mlp(std::size_t input_dim, std::span<const std::size_t> hidden,
                     std::int32_t classes, std::uint64_t seed) {
  if (input_dim == 0) throw ValidationError("mlp: input dimension must be positive");
  if (classes < 2) throw ValidationError("mlp: needs at least two classes");
  Rng rng(seed);
  std::vector<Layer> layers;
  std::size_t fan_in = input_dim;
  for (std::size_t width : hidden) {
    if (width == 0) throw ValidationError("mlp: zero-width hidden layer");
    Layer l;
    l.weights = Matrix(fan_in, width);
    rng.fill_normal(l.weights, std::sqrt(2.0 / static_cast<double>(fan_in)));
    l.bias.assign(width, 0.0);
    l.act = Activation::Relu;
    layers.push_back(std::move(l));
    fan_in = width;
  }
  Layer out;
  out.weights = Matrix(fan_in, static_cast<std::size_t>(classes));
  rng.fill_normal(out.weights, std::sqrt(1.0 / static_cast<double>(fan_in)));
  out.bias.assign(static_cast<std::size_t>(classes), 0.0);
  out.act = Activation::Linear;
  layers.push_back(std::move(out));
  return Network(std::move(layers));
}

const Layer& Network::layer(std::size_t i) const {
  if (i >= layers_.size()) {
    throw DimensionError("network: layer index " + std::to_string(i) + " out of " +
                         std::to_string(layers_.size()));
  }
  return layers_[i];
}

Matrix Network::activations(const Matrix& x, std::size_t upto) const {
  if (upto > layers_.size()) {
    throw DimensionError("network: activation depth " + std::to_string(upto) + " out of " +
                         std::to_string(layers_.size()));
  }
  if (x.cols() != input_dim()) {
    throw DimensionError("network: input width " + std::to_string(x.cols()) + ", expected " +
                         std::to_string(input_dim()));
  }
  Matrix z = x;
  for (std::size_t l = 0; l < upto; ++l) {
    Matrix pre = matmul(z, layers_[l].weights);
    add_bias_rows(pre, layers_[l].bias);
    apply_activation(pre, layers_[l].act);
    z = std::move(pre);
  }
  return z;
}

Matrix Network::forward_batch(const Matrix& x) const { return activations(x, layers_.size()); }

std::vector<double> Network::forward(std::span<const double> x) const {
  Matrix row(1, x.size(), std::vector<double>(x.begin(), x.end()));
  const Matrix logits = forward_batch(row);
  return std::vector<double>(logits.data(), logits.data() + logits.cols());
}

Matrix Network::layer_apply(std::size_t index, const Matrix& inputs) const {
  const Layer& l = layer(index);
  if (inputs.cols() != l.weights.rows()) {
    throw DimensionError("network: layer " + std::to_string(index) + " expects width " +
                         std::to_string(l.weights.rows()) + ", got " +
                         std::to_string(inputs.cols()));
  }
  Matrix pre = matmul(inputs, l.weights);
  add_bias_rows(pre, l.bias);
  apply_activation(pre, l.act);
  return pre;
}

std::int32_t Network::predict(std::span<const double> x) const {
  const std::vector<double> logits = forward(x);
  std::size_t best = 0;
  for (std::size_t j = 1; j < logits.size(); ++j) {
    if (logits[j] > logits[best]) best = j;  // strict: ties keep the lowest index
  }
  return static_cast<std::int32_t>(best);
}

double Network::accuracy(const Dataset& data) const {
  if (data.size() == 0) throw ValidationError("accuracy: empty dataset");
  const Matrix logits = forward_batch(data.inputs);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    const double* row = logits.row(i);
    std::size_t best = 0;
    for (std::size_t j = 1; j < logits.cols(); ++j) {
      if (row[j] > row[best]) best = j;
    }
    if (static_cast<std::int32_t>(best) == data.labels[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

LayerData Network::capture(const Dataset& data, std::size_t index, bool augment_bias) const {
  if (index >= layers_.size()) {
    throw DimensionError("capture: layer index " + std::to_string(index) + " out of " +
                         std::to_string(layers_.size()));
  }
  Matrix in = activations(data.inputs, index);
  const Matrix out = layer_apply(index, in);
  if (augment_bias) {
    Matrix augmented(in.rows(), in.cols() + 1);
    for (std::size_t i = 0; i < in.rows(); ++i) {
      std::memcpy(augmented.row(i), in.row(i), in.cols() * sizeof(double));
      augmented(i, in.cols()) = 1.0;
    }
    in = std::move(augmented);
  }
  return LayerData(std::move(in), out);
}

void Network::replace_weights(std::size_t index, Matrix weights) {
  const Layer& current = layer(index);
  if (weights.rows() != current.weights.rows() || weights.cols() != current.weights.cols()) {
    throw DimensionError("replace_weights: shape " + std::to_string(weights.rows()) + "x" +
                         std::to_string(weights.cols()) + " vs layer " +
                         std::to_string(current.weights.rows()) + "x" +
                         std::to_string(current.weights.cols()));
  }
  layers_[index].weights = std::move(weights);
}

void Network::apply_augmented(std::size_t index, const Matrix& augmented) {
  const Layer& current = layer(index);
  if (augmented.rows() != current.weights.rows() + 1 ||
      augmented.cols() != current.weights.cols()) {
    throw DimensionError("apply_augmented: shape " + std::to_string(augmented.rows()) + "x" +
                         std::to_string(augmented.cols()) + " vs layer needing " +
                         std::to_string(current.weights.rows() + 1) + "x" +
                         std::to_string(current.weights.cols()));
  }
  Layer& l = layers_[index];
  l.weights = row_range(augmented, 0, augmented.rows() - 1);
  const double* bias_row = augmented.row(augmented.rows() - 1);
  l.bias.assign(bias_row, bias_row + augmented.cols());
}

void Network::train_sgd(const Dataset& data, std::size_t epochs, double learning_rate,
                        std::size_t minibatch, std::uint64_t seed) {
  if (data.size() == 0) throw ValidationError("train: empty dataset");
  if (data.dim() != input_dim()) {
    throw DimensionError("train: input width " + std::to_string(data.dim()) + " vs network " +
                         std::to_string(input_dim()));
  }
  if (static_cast<std::size_t>(data.classes) != output_dim()) {
    throw DimensionError("train: " + std::to_string(data.classes) + " classes vs network " +
                         std::to_string(output_dim()) + " outputs");
  }
  if (learning_rate <= 0.0 || !std::isfinite(learning_rate)) {
    throw ValidationError("train: learning rate must be finite and positive");
  }
  const std::size_t m = data.size();
  const std::size_t mb = std::min(std::max<std::size_t>(minibatch, 1), m);
  const std::size_t n_layers = layers_.size();

  Rng rng(seed);
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    // Fisher-Yates reshuffle from the seeded stream.
    for (std::size_t i = m - 1; i > 0; --i) {
      std::swap(order[i], order[rng.index(i + 1)]);
    }
    for (std::size_t start = 0; start < m; start += mb) {
      const std::size_t count = std::min(mb, m - start);
      const std::span<const std::size_t> batch(order.data() + start, count);
      const Matrix xb = row_slice(data.inputs, batch);

      // Forward pass keeping post-activations of every layer.
      std::vector<Matrix> z;
      z.reserve(n_layers + 1);
      z.push_back(xb);
      for (std::size_t l = 0; l < n_layers; ++l) {
        Matrix pre = matmul(z.back(), layers_[l].weights);
        add_bias_rows(pre, layers_[l].bias);
        apply_activation(pre, layers_[l].act);
        z.push_back(std::move(pre));
      }

      // Softmax cross-entropy delta at the logits, averaged over the batch.
      Matrix delta = z.back();
      double loss = 0.0;
      const double inv_count = 1.0 / static_cast<double>(count);
      for (std::size_t r = 0; r < count; ++r) {
        double* row = delta.row(r);
        const std::size_t label = static_cast<std::size_t>(data.labels[batch[r]]);
        double mx = row[0];
        for (std::size_t j = 1; j < delta.cols(); ++j) mx = std::max(mx, row[j]);
        double sum = 0.0;
        for (std::size_t j = 0; j < delta.cols(); ++j) {
          row[j] = std::exp(row[j] - mx);
          sum += row[j];
        }
        loss -= std::log(row[label] / sum);
        for (std::size_t j = 0; j < delta.cols(); ++j) row[j] = row[j] / sum * inv_count;
        row[label] -= inv_count;
      }
      if (!std::isfinite(loss)) {
        throw DivergedError("train: non-finite loss", Matrix(1, 1));
      }

      // Backward pass; delta holds dLoss/dpre of the layer being processed.
      for (std::size_t l = n_layers; l-- > 0;) {
        const Matrix grad_w = matmul_at_b(z[l], delta);
        std::vector<double> grad_b(delta.cols(), 0.0);
        for (std::size_t r = 0; r < delta.rows(); ++r) {
          const double* row = delta.row(r);
          for (std::size_t j = 0; j < delta.cols(); ++j) grad_b[j] += row[j];
        }
        if (l > 0) {
          Matrix prev_delta = matmul_a_bt(delta, layers_[l].weights);
          if (layers_[l - 1].act == Activation::Relu) {
            // ReLU derivative from the stored post-activation: > 0 iff active.
            for (std::size_t r = 0; r < prev_delta.rows(); ++r) {
              double* row = prev_delta.row(r);
              const double* act_row = z[l].row(r);
              for (std::size_t j = 0; j < prev_delta.cols(); ++j) {
                if (act_row[j] <= 0.0) row[j] = 0.0;
              }
            }
          }
          delta = std::move(prev_delta);
          axpy(-learning_rate, grad_w, layers_[l].weights);
          for (std::size_t j = 0; j < grad_b.size(); ++j) {
            layers_[l].bias[j] -= learning_rate * grad_b[j];
          }
        } else {
          axpy(-learning_rate, grad_w, layers_[0].weights);
          for (std::size_t j = 0; j < grad_b.size(); ++j) {
            layers_[0].bias[j] -= learning_rate * grad_b[j];
          }
        }
      }
    }
  }
  for (const Layer& l : layers_) {
    if (!l.weights.all_finite()) {
      throw DivergedError("train: non-finite weights after training", Matrix(1, 1));
    }
  }
}

std::vector<double> Network::spectral_norms() const {
  std::vector<double> norms;
  norms.reserve(layers_.size());
  for (const Layer& l : layers_) norms.push_back(spectral_norm(l.weights));
  return norms;
}

double Network::disagreement(const Network& a, const Network& b, const Dataset& data) {
  if (data.size() == 0) throw ValidationError("disagreement: empty dataset");
  const Matrix la = a.forward_batch(data.inputs);
  const Matrix lb = b.forward_batch(data.inputs);
  if (la.cols() != lb.cols()) throw DimensionError("disagreement: output widths differ");
  std::size_t changed = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double* ra = la.row(i);
    const double* rb = lb.row(i);
    std::size_t pa = 0, pb = 0;
    for (std::size_t j = 1; j < la.cols(); ++j) {
      if (ra[j] > ra[pa]) pa = j;
      if (rb[j] > rb[pb]) pb = j;
    }
    if (pa != pb) ++changed;
  }
  return static_cast<double>(changed) / static_cast<double>(data.size());
}

// ---------------------------------------------------------------------------
// Model file format: little-endian throughout.
//   magic "FETA", version byte 1, u32 layer count,
//   then per-layer headers (u32 d_in, u32 d_out, u8 activation),
//   then per-layer payloads: f64 weights row-major, f64 biases.

namespace {

constexpr char kMagic[4] = {'F', 'E', 'T', 'A'};
constexpr std::uint8_t kVersion = 1;

void put_u32(std::string& buf, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& buf, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

struct Reader {
  std::ifstream in;
  explicit Reader(const std::string& path) : in(path, std::ios::binary) {}

  std::uint8_t u8() {
    char c;
    if (!in.get(c)) throw FormatError("model: truncated file");
    return static_cast<std::uint8_t>(c);
  }
  std::uint32_t u32() {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(u8()) << (8 * i);
    return v;
  }
  double f64() {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(u8()) << (8 * i);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }
};

}  // namespace

void Network::save(const std::string& path) const {
  std::string buf;
  buf.append(kMagic, 4);
  buf.push_back(static_cast<char>(kVersion));
  put_u32(buf, static_cast<std::uint32_t>(layers_.size()));
  for (const Layer& l : layers_) {
    put_u32(buf, static_cast<std::uint32_t>(l.weights.rows()));
    put_u32(buf, static_cast<std::uint32_t>(l.weights.cols()));
    buf.push_back(static_cast<char>(l.act));
  }
  for (const Layer& l : layers_) {
    const double* p = l.weights.data();
    for (std::size_t i = 0; i < l.weights.size(); ++i) put_f64(buf, p[i]);
    for (double b : l.bias) put_f64(buf, b);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("model: cannot open for writing: " + path);
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError("model: write failed: " + path);
}

Network Network::load(const std::string& path) {
  Reader r(path);
  if (!r.in) throw IoError("model: cannot open: " + path);
  char magic[4];
  for (char& c : magic) c = static_cast<char>(r.u8());
  if (std::memcmp(magic, kMagic, 4) != 0) throw FormatError("model: bad magic: " + path);
  const std::uint8_t version = r.u8();
  if (version != kVersion) {
    throw FormatError("model: unsupported version " + std::to_string(version));
  }
  const std::uint32_t count = r.u32();
  if (count == 0) throw FormatError("model: zero layers");

  struct Header {
    std::uint32_t d_in, d_out;
    std::uint8_t act;
  };
  std::vector<Header> headers(count);
  for (Header& h : headers) {
    h.d_in = r.u32();
    h.d_out = r.u32();
    h.act = r.u8();
    if (h.d_in == 0 || h.d_out == 0) throw FormatError("model: zero layer dimension");
    if (h.act > 1) throw FormatError("model: unknown activation code " + std::to_string(h.act));
  }

  std::vector<Layer> layers;
  layers.reserve(count);
  for (const Header& h : headers) {
    Layer l;
    std::vector<double> w(static_cast<std::size_t>(h.d_in) * h.d_out);
    for (double& v : w) v = r.f64();
    l.weights = Matrix(h.d_in, h.d_out, std::move(w));
    l.bias.resize(h.d_out);
    for (double& v : l.bias) v = r.f64();
    l.act = static_cast<Activation>(h.act);
    layers.push_back(std::move(l));
  }
  // A trailing byte means the file does not match its own headers.
  char extra;
  if (r.in.get(extra)) throw FormatError("model: trailing bytes");
  return Network(std::move(layers));
}

}  // namespace feta
