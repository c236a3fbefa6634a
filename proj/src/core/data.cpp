#include "core/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <vector>

#include "core/errors.hpp"
#include "core/rng.hpp"

namespace feta {

LayerData toy_gaussian(const ToySpec& spec) {
  if (spec.d1 == 0 || spec.d2 == 0 || spec.n == 0) {
    throw ValidationError("toy_gaussian: dimensions and sample count must be positive");
  }
  Rng rng(spec.seed);
  Matrix a(spec.n, spec.d1);
  rng.fill_normal(a);
  Matrix w(spec.d1, spec.d2);
  rng.fill_normal(w, 1.0 / std::sqrt(static_cast<double>(spec.d1)));
  Matrix b = matmul(a, w);
  double* p = b.data();
  for (std::size_t i = 0; i < b.size(); ++i) p[i] = std::max(p[i], 0.0);
  return LayerData(std::move(a), std::move(b));
}

Dataset synth_blobs(std::int32_t classes, std::size_t dim, std::size_t per_class, double spread,
                    std::uint64_t seed) {
  if (classes < 2) throw ValidationError("blobs: need at least two classes");
  if (dim == 0 || per_class == 0) throw ValidationError("blobs: dim and per_class must be positive");
  if (spread < 0.0 || !std::isfinite(spread)) {
    throw ValidationError("blobs: spread must be finite and >= 0");
  }
  Rng rng(seed);
  const std::size_t n_classes = static_cast<std::size_t>(classes);
  Matrix centers(n_classes, dim);
  rng.fill_normal(centers);

  Matrix inputs(n_classes * per_class, dim);
  std::vector<std::int32_t> labels(n_classes * per_class);
  std::size_t row = 0;
  for (std::size_t c = 0; c < n_classes; ++c) {
    for (std::size_t s = 0; s < per_class; ++s, ++row) {
      double* out = inputs.row(row);
      const double* center = centers.row(c);
      for (std::size_t j = 0; j < dim; ++j) out[j] = center[j] + spread * rng.normal();
      labels[row] = static_cast<std::int32_t>(c);
    }
  }
  return Dataset(std::move(inputs), std::move(labels), classes);
}

std::pair<Dataset, Dataset> split_per_class(const Dataset& data, std::size_t take_per_class) {
  std::vector<std::size_t> first, second;
  std::vector<std::size_t> seen(static_cast<std::size_t>(data.classes), 0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::size_t& count = seen[static_cast<std::size_t>(data.labels[i])];
    (count < take_per_class ? first : second).push_back(i);
    ++count;
  }
  if (first.empty() || second.empty()) {
    throw ValidationError("split: both sides must be nonempty (asked for " +
                          std::to_string(take_per_class) + " per class)");
  }
  auto build = [&](const std::vector<std::size_t>& idx) {
    std::vector<std::int32_t> labels(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) labels[i] = data.labels[idx[i]];
    return Dataset(row_slice(data.inputs, idx), std::move(labels), data.classes);
  };
  return {build(first), build(second)};
}

Dataset take(const Dataset& data, std::size_t n) {
  if (n == 0 || n > data.size()) {
    throw ValidationError("take: count " + std::to_string(n) + " outside [1, " +
                          std::to_string(data.size()) + "]");
  }
  return Dataset(row_range(data.inputs, 0, n),
                 std::vector<std::int32_t>(data.labels.begin(), data.labels.begin() + n),
                 data.classes);
}

namespace {

constexpr std::uint32_t kImagesMagic = 2051;
constexpr std::uint32_t kLabelsMagic = 2049;

struct IdxReader {
  std::ifstream in;
  std::string path;

  IdxReader(const std::string& p) : in(p, std::ios::binary), path(p) {
    if (!in) throw IoError("idx: cannot open: " + p);
  }

  std::uint32_t u32be() {
    unsigned char bytes[4];
    if (!in.read(reinterpret_cast<char*>(bytes), 4)) {
      throw IdxTruncatedError("idx: truncated header: " + path);
    }
    return (std::uint32_t(bytes[0]) << 24) | (std::uint32_t(bytes[1]) << 16) |
           (std::uint32_t(bytes[2]) << 8) | std::uint32_t(bytes[3]);
  }

  void payload(std::vector<unsigned char>& out) {
    if (!in.read(reinterpret_cast<char*>(out.data()), static_cast<std::streamsize>(out.size()))) {
      throw IdxTruncatedError("idx: truncated payload: " + path);
    }
  }
};

}  // namespace

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
  IdxReader images(images_path);
  const std::uint32_t image_magic = images.u32be();
  if (image_magic != kImagesMagic) {
    throw IdxMagicError("idx: bad image magic " + std::to_string(image_magic) + " in " +
                        images_path);
  }
  const std::uint32_t n_images = images.u32be();
  const std::uint32_t rows = images.u32be();
  const std::uint32_t cols = images.u32be();
  if (n_images == 0 || rows == 0 || cols == 0) {
    throw FormatError("idx: empty image set in " + images_path);
  }

  IdxReader labels(labels_path);
  const std::uint32_t label_magic = labels.u32be();
  if (label_magic != kLabelsMagic) {
    throw IdxMagicError("idx: bad label magic " + std::to_string(label_magic) + " in " +
                        labels_path);
  }
  const std::uint32_t n_labels = labels.u32be();
  if (n_labels != n_images) {
    throw IdxCountMismatchError("idx: " + std::to_string(n_images) + " images vs " +
                                std::to_string(n_labels) + " labels");
  }

  const std::size_t dim = static_cast<std::size_t>(rows) * cols;
  std::vector<unsigned char> pixels(static_cast<std::size_t>(n_images) * dim);
  images.payload(pixels);
  std::vector<unsigned char> raw_labels(n_labels);
  labels.payload(raw_labels);

  Matrix inputs(n_images, dim);
  double* out = inputs.data();
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    out[i] = static_cast<double>(pixels[i]) / 255.0;
  }
  std::int32_t max_label = 0;
  std::vector<std::int32_t> label_values(n_labels);
  for (std::size_t i = 0; i < raw_labels.size(); ++i) {
    label_values[i] = static_cast<std::int32_t>(raw_labels[i]);
    max_label = std::max(max_label, label_values[i]);
  }
  return Dataset(std::move(inputs), std::move(label_values), std::max(max_label + 1, 2));
}

}  // namespace feta
