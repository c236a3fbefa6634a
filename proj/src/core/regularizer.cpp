#include "core/regularizer.hpp"

#include <algorithm>
#include <cmath>

#include "core/errors.hpp"
#include "core/svd.hpp"

namespace feta {

namespace {

double soft(double v, double t) {
  const double mag = std::fabs(v) - t;
  return mag > 0.0 ? std::copysign(mag, v) : 0.0;  // exact zero on ties
}

// Rows of u subject to the penalty: all of them, or all but the bias row.
std::size_t active_rows(const Regularizer& reg, const Matrix& u) {
  if (!reg.exclude_last_row) return u.rows();
  if (u.rows() == 0) throw DimensionError("regularizer: cannot exclude last row of empty matrix");
  return u.rows() - 1;
}

}  // namespace

double penalty(const Regularizer& reg, const Matrix& u) {
  switch (reg.kind) {
    case RegKind::None:
      return 0.0;
    case RegKind::L1: {
      const std::size_t r = active_rows(reg, u);
      double acc = 0.0;
      for (std::size_t i = 0; i < r; ++i) {
        const double* p = u.row(i);
        for (std::size_t j = 0; j < u.cols(); ++j) acc += std::fabs(p[j]);
      }
      return acc;
    }
    case RegKind::Nuclear: {
      const std::size_t r = active_rows(reg, u);
      if (r == 0 || u.cols() == 0) return 0.0;
      const SvdResult s = svd(row_range(u, 0, r));
      double acc = 0.0;
      for (double sv : s.singular_values) acc += sv;
      return acc;
    }
  }
  throw ValidationError("regularizer: unknown kind");
}

Matrix prox(const Regularizer& reg, const Matrix& v, double step) {
  if (step < 0.0 || !std::isfinite(step)) throw ValidationError("prox: step must be finite and >= 0");
  const double t = step * reg.lambda;
  if (reg.kind == RegKind::None || t == 0.0) return v;

  Matrix out = v;
  const std::size_t r = active_rows(reg, v);
  switch (reg.kind) {
    case RegKind::L1: {
      for (std::size_t i = 0; i < r; ++i) {
        double* p = out.row(i);
        for (std::size_t j = 0; j < v.cols(); ++j) p[j] = soft(p[j], t);
      }
      return out;
    }
    case RegKind::Nuclear: {
      if (r == 0 || v.cols() == 0) return out;
      SvdResult s = svd(row_range(v, 0, r));
      for (double& sv : s.singular_values) sv = std::max(sv - t, 0.0);
      const Matrix block = svd_reconstruct(s);
      for (std::size_t i = 0; i < r; ++i) {
        for (std::size_t j = 0; j < v.cols(); ++j) out(i, j) = block(i, j);
      }
      return out;
    }
    default:
      throw ValidationError("regularizer: unknown kind");
  }
}

}  // namespace feta
