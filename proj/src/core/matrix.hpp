#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace feta {

// Dense row-major matrix of doubles. All heavy numeric kernels in this
// project (objective gradients, network forward/backward, SVD) run through
// the free functions below, so they are written cache-friendly: unit-stride
// inner loops, 64-bit accumulation, no blocking cleverness.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols);  // zero-filled
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  static Matrix identity(std::size_t n);
  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return values_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * cols_ + j]; }

  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }
  double* row(std::size_t i) { return values_.data() + i * cols_; }
  const double* row(std::size_t i) const { return values_.data() + i * cols_; }

  bool all_finite() const;

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

Matrix matmul(const Matrix& a, const Matrix& b);       // a * b
Matrix matmul_at_b(const Matrix& a, const Matrix& b);  // aT * b, without forming aT
Matrix matmul_a_bt(const Matrix& a, const Matrix& b);  // a * bT, without forming bT
Matrix transpose(const Matrix& m);

Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& m, double alpha);
void axpy(double alpha, const Matrix& x, Matrix& y);  // y += alpha * x

double dot(const Matrix& a, const Matrix& b);  // sum_ij a_ij b_ij == trace(aT b)
double frobenius_norm(const Matrix& m);
double max_abs(const Matrix& m);

// Copies of selected rows, in the order given. Used for minibatch slicing.
Matrix row_slice(const Matrix& m, std::span<const std::size_t> indices);
Matrix row_range(const Matrix& m, std::size_t begin, std::size_t end);

}  // namespace feta
