#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "lpgkit/error.hpp"
#include "lpgkit/layers.hpp"

namespace lpgkit {

struct AdamConfig {
  double lr0 = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Bias-corrected first/second moment optimizer state, aligned with one
/// fixed parameter enumeration.
class AdamState {
 public:
  AdamState() = default;

  explicit AdamState(const std::vector<ParamRef>& params, const AdamConfig& cfg = {}) : cfg_(cfg) {
    m_.reserve(params.size());
    v_.reserve(params.size());
    for (const auto& p : params) {
      m_.emplace_back(p.size, 0.0);
      v_.emplace_back(p.size, 0.0);
    }
  }

  uint64_t steps() const { return t_; }

  void step(const std::vector<ParamRef>& params, double lr) {
    if (params.size() != m_.size()) fail(ErrorCode::ShapeMismatch, "optimizer state does not match parameter list");
    t_ += 1;
    const double bias1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bias2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (size_t i = 0; i < params.size(); ++i) {
      const ParamRef& p = params[i];
      if (p.size != m_[i].size()) fail(ErrorCode::ShapeMismatch, "optimizer slot size mismatch for " + p.name);
      double* m = m_[i].data();
      double* v = v_[i].data();
      for (size_t j = 0; j < p.size; ++j) {
        const double g = p.grad[j];
        m[j] = cfg_.beta1 * m[j] + (1.0 - cfg_.beta1) * g;
        v[j] = cfg_.beta2 * v[j] + (1.0 - cfg_.beta2) * g * g;
        const double m_hat = m[j] / bias1;
        const double v_hat = v[j] / bias2;
        p.value[j] -= lr * m_hat / (std::sqrt(v_hat) + cfg_.eps);
      }
    }
  }

 private:
  AdamConfig cfg_;
  std::vector<std::vector<double>> m_, v_;
  uint64_t t_ = 0;
};

/// lr_t = lr0 · ½(1 + cos(π·t/T)), decaying from lr0 toward 0 across epochs.
inline double cosine_lr(size_t t, size_t total, double lr0) {
  const double phase = std::numbers::pi * static_cast<double>(t) / static_cast<double>(total);
  return std::max(0.0, lr0 * 0.5 * (1.0 + std::cos(phase)));
}

}  // namespace lpgkit
