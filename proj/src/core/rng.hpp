#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "core/errors.hpp"
#include "core/matrix.hpp"

namespace feta {

// Deterministic random stream. The engine is std::mt19937_64, but every
// mapping from raw 64-bit draws to doubles/indices is implemented here so a
// given seed yields bit-identical sequences on any platform, independent of
// the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller with a cached spare.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1] keeps the log finite
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  // Uniform index in [0, n) via 128-bit multiply-high (no modulo bias worth
  // caring about at these ranges, and no platform-dependent rejection loop).
  std::size_t index(std::size_t n) {
    if (n == 0) throw ValidationError("rng: index range must be positive");
    const unsigned __int128 wide = static_cast<unsigned __int128>(next_u64()) * n;
    return static_cast<std::size_t>(wide >> 64);
  }

  // k distinct indices from [0, m), returned sorted ascending so that
  // downstream per-sample sums run in a fixed order.
  std::vector<std::size_t> sample_without_replacement(std::size_t m, std::size_t k) {
    if (k > m) throw ValidationError("rng: cannot sample " + std::to_string(k) + " from " +
                                     std::to_string(m) + " without replacement");
    std::vector<std::size_t> out;
    if (k == m) {
      out.resize(m);
      std::iota(out.begin(), out.end(), std::size_t{0});
      return out;
    }
    // Floyd's algorithm.
    std::vector<bool> chosen(m, false);
    out.reserve(k);
    for (std::size_t j = m - k; j < m; ++j) {
      const std::size_t t = index(j + 1);
      if (chosen[t]) {
        chosen[j] = true;
        out.push_back(j);
      } else {
        chosen[t] = true;
        out.push_back(t);
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  void fill_normal(Matrix& m, double stddev = 1.0) {
    double* p = m.data();
    for (std::size_t i = 0; i < m.size(); ++i) p[i] = stddev * normal();
  }

  void fill_uniform(Matrix& m, double lo, double hi) {
    double* p = m.data();
    for (std::size_t i = 0; i < m.size(); ++i) p[i] = lo + (hi - lo) * uniform();
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace feta
