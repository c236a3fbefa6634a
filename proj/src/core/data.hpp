#pragma once

#include <cstdint>
#include <string>
#include <utility>

#include "core/network.hpp"
#include "core/objective.hpp"

namespace feta {

// Synthetic layer-pruning instance: Gaussian inputs pushed through a random
// dense layer. Mirrors the shapes used for solver benchmarking.
struct ToySpec {
  std::size_t d1 = 100;
  std::size_t d2 = 10;
  std::size_t n = 1000;
  std::uint64_t seed = 0;
};

// inputs ~ N(0,1), reference weights ~ N(0, 1/sqrt(d1)), outputs = relu(A W)
// so the captured targets are nonnegative, as post-ReLU activations are.
LayerData toy_gaussian(const ToySpec& spec);

// Gaussian class blobs: class centers drawn N(0, I), samples center +
// spread * N(0, I). Samples are grouped by class (all of class 0 first).
Dataset synth_blobs(std::int32_t classes, std::size_t dim, std::size_t per_class, double spread,
                    std::uint64_t seed);

// Per-class split: the first take_per_class samples of every class go to the
// first dataset, the rest to the second. Keeps both sides on the same class
// geometry when splitting generated data into train/test.
std::pair<Dataset, Dataset> split_per_class(const Dataset& data, std::size_t take_per_class);

// First n samples.
Dataset take(const Dataset& data, std::size_t n);

// IDX image/label pair (big-endian headers, u8 payload). Pixels are scaled
// to [0, 1]. Bad magic, truncation, and image/label count mismatch raise
// IdxMagicError / IdxTruncatedError / IdxCountMismatchError respectively.
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

}  // namespace feta
