#pragma once

#include <cstddef>

#include "core/matrix.hpp"

namespace feta {

// Magnitude pruning: entries with |w| strictly above the threshold survive,
// everything else becomes exactly zero.
Matrix hard_threshold(const Matrix& w, double threshold);

// Smallest threshold t such that hard_threshold(w, t) zeroes at least
// target_sparsity of the entries: the ceil(target * n)-th smallest magnitude
// (0 when the target is <= 0, so already-zero entries stay the only zeros).
double threshold_for_sparsity(const Matrix& w, double target_sparsity);

// Fraction of exactly-zero entries.
double zero_fraction(const Matrix& w);

// Rank-k factors of the best rank-k approximation: w ~ left * rightT with
// left d1 x k carrying the singular values and right d2 x k orthonormal.
struct LowRankFactors {
  Matrix left;
  Matrix right;
};

LowRankFactors truncated_svd(const Matrix& w, std::size_t k);

Matrix low_rank_reconstruct(const LowRankFactors& f);

// Storage of the factored form relative to the dense layer:
// (k*d1 + k + k*d2) / (d1*d2). Values above 1 mean the factorization does
// not compress; callers are expected to warn, not fail.
double compression_ratio(std::size_t d1, std::size_t d2, std::size_t k);

}  // namespace feta
