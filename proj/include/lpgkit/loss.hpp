#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "lpgkit/dense.hpp"
#include "lpgkit/error.hpp"

namespace lpgkit {

enum class TaskKind { Classification, Regression };

/// Row-aligned supervision: exactly one of the two arrays is meaningful per
/// task kind; `has` marks which rows carry a target at all.
struct Targets {
  TaskKind task = TaskKind::Classification;
  std::vector<int64_t> class_of;  // classification target per row
  std::vector<double> value_of;   // regression target per row
  std::vector<uint8_t> has;       // 1 if the row is supervised
};

struct LossResult {
  double loss = 0.0;
  DenseMatrix grad;  // same shape as the outputs
};

/// Mean softmax cross-entropy over the masked rows; gradient is
/// (softmax − one-hot)/|mask|, zero outside the mask.
inline LossResult softmax_cross_entropy(const DenseMatrix& outputs, const std::vector<int64_t>& classes,
                                        const std::vector<size_t>& mask) {
  if (mask.empty()) fail(ErrorCode::EmptyMask, "loss over an empty mask");
  LossResult res;
  res.grad = DenseMatrix(outputs.rows, outputs.cols);
  const double inv = 1.0 / static_cast<double>(mask.size());
  std::vector<double> prob(outputs.cols);
  for (size_t r : mask) {
    const double* z = outputs.row(r);
    double zmax = z[0];
    for (size_t c = 1; c < outputs.cols; ++c) zmax = std::max(zmax, z[c]);
    double denom = 0.0;
    for (size_t c = 0; c < outputs.cols; ++c) {
      prob[c] = std::exp(z[c] - zmax);
      denom += prob[c];
    }
    const auto y = static_cast<size_t>(classes[r]);
    if (y >= outputs.cols) fail(ErrorCode::UnknownTarget, "class id out of range at row " + std::to_string(r));
    res.loss += (std::log(denom) - (z[y] - zmax)) * inv;
    double* grow = res.grad.row(r);
    for (size_t c = 0; c < outputs.cols; ++c) grow[c] = (prob[c] / denom - (c == y ? 1.0 : 0.0)) * inv;
  }
  return res;
}

/// Mean squared error over the masked rows of a single-column output.
inline LossResult mse_loss(const DenseMatrix& outputs, const std::vector<double>& values,
                           const std::vector<size_t>& mask) {
  if (mask.empty()) fail(ErrorCode::EmptyMask, "loss over an empty mask");
  detail::require_shape(outputs.cols == 1, "regression outputs must have one column");
  LossResult res;
  res.grad = DenseMatrix(outputs.rows, outputs.cols);
  const double inv = 1.0 / static_cast<double>(mask.size());
  for (size_t r : mask) {
    const double diff = outputs.at(r, 0) - values[r];
    res.loss += diff * diff * inv;
    res.grad.at(r, 0) = 2.0 * diff * inv;
  }
  return res;
}

inline LossResult loss_and_grad(const Targets& targets, const DenseMatrix& outputs,
                                const std::vector<size_t>& mask) {
  return targets.task == TaskKind::Classification ? softmax_cross_entropy(outputs, targets.class_of, mask)
                                                  : mse_loss(outputs, targets.value_of, mask);
}

/// argmax-match fraction; ties resolve to the lowest class index.
inline double accuracy(const DenseMatrix& outputs, const std::vector<int64_t>& classes,
                       const std::vector<size_t>& mask) {
  if (mask.empty()) fail(ErrorCode::EmptyMask, "metric over an empty mask");
  size_t hits = 0;
  for (size_t r : mask) {
    const double* z = outputs.row(r);
    size_t best = 0;
    for (size_t c = 1; c < outputs.cols; ++c) {
      if (z[c] > z[best]) best = c;
    }
    if (static_cast<int64_t>(best) == classes[r]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(mask.size());
}

inline double mean_absolute_error(const DenseMatrix& outputs, const std::vector<double>& values,
                                  const std::vector<size_t>& mask) {
  if (mask.empty()) fail(ErrorCode::EmptyMask, "metric over an empty mask");
  double total = 0.0;
  for (size_t r : mask) total += std::abs(outputs.at(r, 0) - values[r]);
  return total / static_cast<double>(mask.size());
}

inline double evaluate_metric(const Targets& targets, const DenseMatrix& outputs,
                              const std::vector<size_t>& mask) {
  return targets.task == TaskKind::Classification ? accuracy(outputs, targets.class_of, mask)
                                                  : mean_absolute_error(outputs, targets.value_of, mask);
}

}  // namespace lpgkit
