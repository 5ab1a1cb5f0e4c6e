#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "lpgkit/encoder.hpp"
#include "lpgkit/error.hpp"

namespace lpgkit {

/// Row-major dense double matrix; the workhorse for layer math.
struct DenseMatrix {
  size_t rows = 0;
  size_t cols = 0;
  std::vector<double> values;

  DenseMatrix() = default;
  DenseMatrix(size_t r, size_t c) : rows(r), cols(c), values(r * c, 0.0) {}

  double& at(size_t r, size_t c) { return values[r * cols + c]; }
  double at(size_t r, size_t c) const { return values[r * cols + c]; }
  double* row(size_t r) { return values.data() + r * cols; }
  const double* row(size_t r) const { return values.data() + r * cols; }

  void fill(double x) { std::fill(values.begin(), values.end(), x); }

  bool same_shape(const DenseMatrix& other) const { return rows == other.rows && cols == other.cols; }
};

inline DenseMatrix to_dense(const FeatureMatrix& fm) {
  DenseMatrix m(fm.rows, fm.cols);
  m.values = fm.values;
  return m;
}

namespace detail {

inline void require_shape(bool ok, const std::string& what) {
  if (!ok) fail(ErrorCode::DimMismatch, what);
}

}  // namespace detail

/// C = A · B  (i-k-j loop order keeps the inner loop contiguous)
inline DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  detail::require_shape(a.cols == b.rows, "matmul: " + std::to_string(a.cols) + " vs " + std::to_string(b.rows));
  DenseMatrix c(a.rows, b.cols);
  for (size_t i = 0; i < a.rows; ++i) {
    const double* arow = a.row(i);
    double* crow = c.row(i);
    for (size_t k = 0; k < a.cols; ++k) {
      const double aik = arow[k];
      if (aik == 0.0) continue;
      const double* brow = b.row(k);
      for (size_t j = 0; j < b.cols; ++j) crow[j] += aik * brow[j];
    }
  }
  return c;
}

/// C = Aᵀ · B
inline DenseMatrix matmul_at_b(const DenseMatrix& a, const DenseMatrix& b) {
  detail::require_shape(a.rows == b.rows, "matmul_at_b: " + std::to_string(a.rows) + " vs " + std::to_string(b.rows));
  DenseMatrix c(a.cols, b.cols);
  for (size_t k = 0; k < a.rows; ++k) {
    const double* arow = a.row(k);
    const double* brow = b.row(k);
    for (size_t i = 0; i < a.cols; ++i) {
      const double aki = arow[i];
      if (aki == 0.0) continue;
      double* crow = c.row(i);
      for (size_t j = 0; j < b.cols; ++j) crow[j] += aki * brow[j];
    }
  }
  return c;
}

/// C = A · Bᵀ
inline DenseMatrix matmul_a_bt(const DenseMatrix& a, const DenseMatrix& b) {
  detail::require_shape(a.cols == b.cols, "matmul_a_bt: " + std::to_string(a.cols) + " vs " + std::to_string(b.cols));
  DenseMatrix c(a.rows, b.rows);
  for (size_t i = 0; i < a.rows; ++i) {
    const double* arow = a.row(i);
    double* crow = c.row(i);
    for (size_t j = 0; j < b.rows; ++j) {
      const double* brow = b.row(j);
      double acc = 0.0;
      for (size_t k = 0; k < a.cols; ++k) acc += arow[k] * brow[k];
      crow[j] += acc;
    }
  }
  return c;
}

}  // namespace lpgkit
