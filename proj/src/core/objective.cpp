#include "core/objective.hpp"

#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "core/errors.hpp"

namespace feta {

LayerData::LayerData(Matrix in, Matrix out) : inputs(std::move(in)), outputs(std::move(out)) {
  if (inputs.rows() != outputs.rows()) {
    throw DimensionError("layer data: " + std::to_string(inputs.rows()) + " input rows vs " +
                         std::to_string(outputs.rows()) + " output rows");
  }
  if (inputs.rows() == 0 || inputs.cols() == 0 || outputs.cols() == 0) {
    throw DimensionError("layer data: empty sample set or zero-width matrices");
  }
  if (!inputs.all_finite() || !outputs.all_finite()) {
    throw ValidationError("layer data: non-finite entries");
  }
}

double softplus(double x, const SmoothReluParams& p) {
  // max(x,0) + log1p(exp(-beta |x|)) / beta: never exponentiates a positive
  // argument, so it is exact for |beta x| in the thousands.
  return std::max(x, 0.0) + std::log1p(std::exp(-p.beta * std::fabs(x))) / p.beta;
}

double softplus_grad(double x, const SmoothReluParams& p) {
  const double bx = p.beta * x;
  if (bx >= 0.0) {
    return 1.0 / (1.0 + std::exp(-bx));
  }
  const double e = std::exp(bx);
  return e / (1.0 + e);
}

namespace {

void check_u(const Matrix& u, const LayerData& data, const char* op) {
  if (u.rows() != data.d1() || u.cols() != data.d2()) {
    throw DimensionError(std::string(op) + ": U is " + std::to_string(u.rows()) + "x" +
                         std::to_string(u.cols()) + ", expected " + std::to_string(data.d1()) +
                         "x" + std::to_string(data.d2()));
  }
}

std::vector<std::size_t> all_rows(std::size_t m) {
  std::vector<std::size_t> idx(m);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return idx;
}

enum class Part { G, H };

// Shared accumulation core. Computes the requested convex part (value and/or
// coefficient matrix for the gradient) over the given sample rows. Gradients
// are assembled as AT * M where M holds the per-entry scalar derivative, so
// the whole thing is two dense passes: scores = A * U, then the reduction.
struct Accum {
  double value = 0.0;
  Matrix coeff;  // m x d2 entry derivatives, empty unless requested
};

Accum accumulate(Part part, bool want_value, bool want_grad, const Matrix& u,
                 const LayerData& data, const SmoothReluParams& p,
                 std::span<const std::size_t> rows) {
  const Matrix a = row_slice(data.inputs, rows);
  const Matrix scores = matmul(a, u);  // |rows| x d2

  Accum acc;
  if (want_grad) acc.coeff = Matrix(rows.size(), data.d2());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const double* srow = scores.row(r);
    const double* brow = data.outputs.row(rows[r]);
    double* crow = want_grad ? acc.coeff.row(r) : nullptr;
    for (std::size_t i = 0; i < data.d2(); ++i) {
      const double s = srow[i];
      const double b = brow[i];
      const double rho = softplus(s, p);
      if (part == Part::G) {
        if (want_value) {
          acc.value += rho * rho + b * b;
          if (b < 0.0) acc.value += -2.0 * b * rho;
        }
        if (want_grad) {
          double d = 2.0 * rho;
          if (b < 0.0) d += -2.0 * b;
          crow[i] = d * softplus_grad(s, p);
        }
      } else {
        if (b >= 0.0) {
          if (want_value) acc.value += 2.0 * b * rho;
          if (want_grad) crow[i] = 2.0 * b * softplus_grad(s, p);
        } else if (want_grad) {
          crow[i] = 0.0;
        }
      }
    }
  }
  if (want_grad) {
    acc.coeff = matmul_at_b(a, acc.coeff);  // d1 x d2 gradient
  }
  return acc;
}

}  // namespace

double g_value(const Matrix& u, const LayerData& data, const SmoothReluParams& p) {
  check_u(u, data, "g_value");
  const auto idx = all_rows(data.samples());
  return accumulate(Part::G, true, false, u, data, p, idx).value;
}

double h_value(const Matrix& u, const LayerData& data, const SmoothReluParams& p) {
  check_u(u, data, "h_value");
  const auto idx = all_rows(data.samples());
  return accumulate(Part::H, true, false, u, data, p, idx).value;
}

Matrix grad_g(const Matrix& u, const LayerData& data, const SmoothReluParams& p) {
  check_u(u, data, "grad_g");
  const auto idx = all_rows(data.samples());
  return accumulate(Part::G, false, true, u, data, p, idx).coeff;
}

Matrix grad_h(const Matrix& u, const LayerData& data, const SmoothReluParams& p) {
  check_u(u, data, "grad_h");
  const auto idx = all_rows(data.samples());
  return accumulate(Part::H, false, true, u, data, p, idx).coeff;
}

double g_value_rows(const Matrix& u, const LayerData& data, const SmoothReluParams& p,
                    std::span<const std::size_t> rows) {
  check_u(u, data, "g_value_rows");
  return accumulate(Part::G, true, false, u, data, p, rows).value;
}

Matrix grad_g_rows(const Matrix& u, const LayerData& data, const SmoothReluParams& p,
                   std::span<const std::size_t> rows) {
  check_u(u, data, "grad_g_rows");
  return accumulate(Part::G, false, true, u, data, p, rows).coeff;
}

Matrix grad_h_rows(const Matrix& u, const LayerData& data, const SmoothReluParams& p,
                   std::span<const std::size_t> rows) {
  check_u(u, data, "grad_h_rows");
  return accumulate(Part::H, false, true, u, data, p, rows).coeff;
}

double f_value(const Matrix& u, const LayerData& data, const SmoothReluParams& p,
               const Regularizer& reg) {
  return g_value(u, data, p) - h_value(u, data, p) + reg.lambda * penalty(reg, u);
}

namespace {

double relu_part(Part part, const Matrix& u, const LayerData& data) {
  const Matrix scores = matmul(data.inputs, u);
  double acc = 0.0;
  for (std::size_t j = 0; j < data.samples(); ++j) {
    const double* srow = scores.row(j);
    const double* brow = data.outputs.row(j);
    for (std::size_t i = 0; i < data.d2(); ++i) {
      const double rho = std::max(srow[i], 0.0);
      const double b = brow[i];
      if (part == Part::G) {
        acc += rho * rho + b * b;
        if (b < 0.0) acc += -2.0 * b * rho;
      } else if (b >= 0.0) {
        acc += 2.0 * b * rho;
      }
    }
  }
  return acc;
}

}  // namespace

double g_value_relu(const Matrix& u, const LayerData& data) {
  check_u(u, data, "g_value_relu");
  return relu_part(Part::G, u, data);
}

double h_value_relu(const Matrix& u, const LayerData& data) {
  check_u(u, data, "h_value_relu");
  return relu_part(Part::H, u, data);
}

double reconstruction_loss_relu(const Matrix& u, const LayerData& data) {
  check_u(u, data, "reconstruction_loss_relu");
  const Matrix scores = matmul(data.inputs, u);
  double acc = 0.0;
  for (std::size_t j = 0; j < data.samples(); ++j) {
    const double* srow = scores.row(j);
    const double* brow = data.outputs.row(j);
    for (std::size_t i = 0; i < data.d2(); ++i) {
      const double diff = std::max(srow[i], 0.0) - brow[i];
      acc += diff * diff;
    }
  }
  return acc;
}

double layer_mse_relu(const Matrix& u, const LayerData& data) {
  return reconstruction_loss_relu(u, data) / static_cast<double>(data.samples());
}

}  // namespace feta
