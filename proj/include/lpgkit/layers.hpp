#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "lpgkit/adjacency.hpp"
#include "lpgkit/dense.hpp"
#include "lpgkit/error.hpp"
#include "lpgkit/rng.hpp"

namespace lpgkit {

/// A view over one trainable buffer and its gradient; the optimizer walks a
/// list of these.
struct ParamRef {
  std::string name;
  double* value = nullptr;
  double* grad = nullptr;
  size_t size = 0;
};

namespace detail {

inline void glorot_fill(double* data, size_t count, size_t fan_in, size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (size_t i = 0; i < count; ++i) data[i] = rng.next_double(-limit, limit);
}

}  // namespace detail

/// Y = XW + b
class LinearLayer {
 public:
  LinearLayer() = default;
  LinearLayer(size_t in, size_t out, Rng& rng) : w_(in, out), dw_(in, out), b_(out, 0.0), db_(out, 0.0) {
    detail::glorot_fill(w_.values.data(), w_.values.size(), in, out, rng);
  }

  size_t in_dim() const { return w_.rows; }
  size_t out_dim() const { return w_.cols; }

  DenseMatrix forward(const DenseMatrix& x) {
    detail::require_shape(x.cols == w_.rows, "linear: input width " + std::to_string(x.cols) + " vs " +
                                                 std::to_string(w_.rows));
    x_cache_ = x;
    has_cache_ = true;
    DenseMatrix y = matmul(x, w_);
    for (size_t r = 0; r < y.rows; ++r) {
      double* yrow = y.row(r);
      for (size_t c = 0; c < y.cols; ++c) yrow[c] += b_[c];
    }
    return y;
  }

  DenseMatrix backward(const DenseMatrix& g) {
    if (!has_cache_) fail(ErrorCode::NoForwardCache, "linear backward before forward");
    detail::require_shape(g.rows == x_cache_.rows && g.cols == w_.cols, "linear backward: gradient shape");
    const DenseMatrix dw = matmul_at_b(x_cache_, g);
    for (size_t i = 0; i < dw.values.size(); ++i) dw_.values[i] += dw.values[i];
    for (size_t r = 0; r < g.rows; ++r) {
      const double* grow = g.row(r);
      for (size_t c = 0; c < g.cols; ++c) db_[c] += grow[c];
    }
    return matmul_a_bt(g, w_);
  }

  void collect_params(const std::string& prefix, std::vector<ParamRef>& out) {
    out.push_back({prefix + ".w", w_.values.data(), dw_.values.data(), w_.values.size()});
    out.push_back({prefix + ".b", b_.data(), db_.data(), b_.size()});
  }

  void zero_grads() {
    dw_.fill(0.0);
    std::fill(db_.begin(), db_.end(), 0.0);
  }

 private:
  DenseMatrix w_, dw_;
  std::vector<double> b_, db_;
  DenseMatrix x_cache_;
  bool has_cache_ = false;
};

/// y = x for x ≥ 0, slope·x otherwise; one learned slope per layer.
class PReluLayer {
 public:
  DenseMatrix forward(const DenseMatrix& x) {
    x_cache_ = x;
    has_cache_ = true;
    DenseMatrix y = x;
    for (auto& v : y.values) {
      if (v < 0.0) v *= slope_;
    }
    return y;
  }

  DenseMatrix backward(const DenseMatrix& g) {
    if (!has_cache_) fail(ErrorCode::NoForwardCache, "prelu backward before forward");
    detail::require_shape(g.same_shape(x_cache_), "prelu backward: gradient shape");
    DenseMatrix dx(g.rows, g.cols);
    for (size_t i = 0; i < g.values.size(); ++i) {
      const double x = x_cache_.values[i];
      if (x < 0.0) {
        dx.values[i] = g.values[i] * slope_;
        dslope_ += g.values[i] * x;
      } else {
        dx.values[i] = g.values[i];
      }
    }
    return dx;
  }

  void collect_params(const std::string& prefix, std::vector<ParamRef>& out) {
    out.push_back({prefix + ".slope", &slope_, &dslope_, 1});
  }

  void zero_grads() { dslope_ = 0.0; }

 private:
  double slope_ = 0.25;
  double dslope_ = 0.0;
  DenseMatrix x_cache_;
  bool has_cache_ = false;
};

/// H' = Â H W + b with Â the self-looped, symmetric-normalized structure.
class GcnLayer {
 public:
  GcnLayer() = default;
  GcnLayer(size_t in, size_t out, Rng& rng) : lin_(in, out, rng) {}

  DenseMatrix forward(const NormalizedAdjacency& adj, const DenseMatrix& x) {
    adj_ = &adj;
    return lin_.forward(spmm(adj.loops, adj.weights, x));
  }

  DenseMatrix backward(const DenseMatrix& g) {
    if (adj_ == nullptr) fail(ErrorCode::NoForwardCache, "gcn backward before forward");
    const DenseMatrix dm = lin_.backward(g);
    return spmm(adj_->loops_transposed(), adj_->weights_transposed(), dm);
  }

  void collect_params(const std::string& prefix, std::vector<ParamRef>& out) { lin_.collect_params(prefix, out); }
  void zero_grads() { lin_.zero_grads(); }

 private:
  LinearLayer lin_;
  const NormalizedAdjacency* adj_ = nullptr;
};

/// H' = MLP((1+ε)·H_i + Σ_{j∈N(i)} H_j); the MLP is linear → PReLU → linear.
class GinLayer {
 public:
  GinLayer() = default;
  GinLayer(size_t in, size_t out, Rng& rng) : lin1_(in, out, rng), lin2_(out, out, rng) {}

  DenseMatrix forward(const NormalizedAdjacency& adj, const DenseMatrix& x) {
    adj_ = &adj;
    x_cache_ = x;
    DenseMatrix s = neighbor_sum(adj.raw, x);
    const double self_scale = 1.0 + eps_;
    for (size_t i = 0; i < s.values.size(); ++i) s.values[i] += self_scale * x.values[i];
    return lin2_.forward(act_.forward(lin1_.forward(s)));
  }

  DenseMatrix backward(const DenseMatrix& g) {
    if (adj_ == nullptr) fail(ErrorCode::NoForwardCache, "gin backward before forward");
    const DenseMatrix ds = lin1_.backward(act_.backward(lin2_.backward(g)));
    for (size_t i = 0; i < ds.values.size(); ++i) deps_ += ds.values[i] * x_cache_.values[i];
    DenseMatrix dx = neighbor_sum(adj_->raw_transposed(), ds);
    const double self_scale = 1.0 + eps_;
    for (size_t i = 0; i < dx.values.size(); ++i) dx.values[i] += self_scale * ds.values[i];
    return dx;
  }

  void collect_params(const std::string& prefix, std::vector<ParamRef>& out) {
    lin1_.collect_params(prefix + ".mlp1", out);
    act_.collect_params(prefix + ".mlp", out);
    lin2_.collect_params(prefix + ".mlp2", out);
    out.push_back({prefix + ".eps", &eps_, &deps_, 1});
  }

  void zero_grads() {
    lin1_.zero_grads();
    act_.zero_grads();
    lin2_.zero_grads();
    deps_ = 0.0;
  }

 private:
  LinearLayer lin1_, lin2_;
  PReluLayer act_;
  double eps_ = 0.0;
  double deps_ = 0.0;
  DenseMatrix x_cache_;
  const NormalizedAdjacency* adj_ = nullptr;
};

/// Multi-head attention over N(i) ∪ {self}: per head, scores
/// e_ij = LeakyReLU_{0.2}(aᵀ[Wh_i ‖ Wh_j]) softmax-normalize over the
/// neighborhood and weight the summed messages; heads concatenate, then one
/// PReLU. No bias, matching the cited formulation.
class GatLayer {
 public:
  GatLayer() = default;
  GatLayer(size_t in, size_t out, size_t heads, Rng& rng) : heads_(heads) {
    if (heads == 0 || out % heads != 0) {
      fail(ErrorCode::DimMismatch, "attention width " + std::to_string(out) + " must split evenly over " +
                                       std::to_string(heads) + " heads");
    }
    head_dim_ = out / heads;
    w_.resize(heads);
    dw_.resize(heads);
    a_.resize(heads);
    da_.resize(heads);
    for (size_t h = 0; h < heads; ++h) {
      w_[h] = DenseMatrix(in, head_dim_);
      dw_[h] = DenseMatrix(in, head_dim_);
      detail::glorot_fill(w_[h].values.data(), w_[h].values.size(), in, head_dim_, rng);
      a_[h].assign(2 * head_dim_, 0.0);
      da_[h].assign(2 * head_dim_, 0.0);
      detail::glorot_fill(a_[h].data(), a_[h].size(), 2 * head_dim_, 1, rng);
    }
  }

  size_t heads() const { return heads_; }
  size_t head_dim() const { return head_dim_; }

  // Attention weights of the last forward pass, aligned with
  // adjacency.loops targets; exposed for inspection and tests.
  const std::vector<double>& attention(size_t head) const { return alpha_[head]; }

  DenseMatrix forward(const NormalizedAdjacency& adj, const DenseMatrix& x) {
    adj_ = &adj;
    x_cache_ = x;
    const Csr& nb = adj.loops;
    const size_t n = x.rows;
    const size_t edge_count = nb.targets.size();

    p_.assign(heads_, DenseMatrix());
    alpha_.assign(heads_, std::vector<double>(edge_count, 0.0));
    leaky_factor_.assign(heads_, std::vector<double>(edge_count, 0.0));

    DenseMatrix concat(n, heads_ * head_dim_);
    for (size_t h = 0; h < heads_; ++h) {
      p_[h] = matmul(x, w_[h]);
      const DenseMatrix& p = p_[h];
      const double* a_left = a_[h].data();
      const double* a_right = a_[h].data() + head_dim_;

      std::vector<double> s_left(n, 0.0), s_right(n, 0.0);
      for (size_t i = 0; i < n; ++i) {
        const double* prow = p.row(i);
        double sl = 0.0, sr = 0.0;
        for (size_t c = 0; c < head_dim_; ++c) {
          sl += a_left[c] * prow[c];
          sr += a_right[c] * prow[c];
        }
        s_left[i] = sl;
        s_right[i] = sr;
      }

      std::vector<double>& alpha = alpha_[h];
      std::vector<double>& lfac = leaky_factor_[h];
      for (size_t i = 0; i < n; ++i) {
        const size_t begin = nb.offsets[i], end = nb.offsets[i + 1];
        double row_max = -std::numeric_limits<double>::infinity();
        for (size_t k = begin; k < end; ++k) {
          const double u = s_left[i] + s_right[nb.targets[k]];
          lfac[k] = u > 0.0 ? 1.0 : 0.2;
          alpha[k] = u > 0.0 ? u : 0.2 * u;  // score before softmax, reuse storage
          row_max = std::max(row_max, alpha[k]);
        }
        double denom = 0.0;
        for (size_t k = begin; k < end; ++k) {
          alpha[k] = std::exp(alpha[k] - row_max);
          denom += alpha[k];
        }
        double* crow = concat.row(i) + h * head_dim_;
        for (size_t k = begin; k < end; ++k) {
          alpha[k] /= denom;
          const double* pj = p.row(nb.targets[k]);
          for (size_t c = 0; c < head_dim_; ++c) crow[c] += alpha[k] * pj[c];
        }
      }
    }
    return act_.forward(concat);
  }

  DenseMatrix backward(const DenseMatrix& g) {
    if (adj_ == nullptr) fail(ErrorCode::NoForwardCache, "attention backward before forward");
    const DenseMatrix gc = act_.backward(g);
    const Csr& nb = adj_->loops;
    const size_t n = x_cache_.rows;

    DenseMatrix dx(n, x_cache_.cols);
    for (size_t h = 0; h < heads_; ++h) {
      const DenseMatrix& p = p_[h];
      const std::vector<double>& alpha = alpha_[h];
      const std::vector<double>& lfac = leaky_factor_[h];
      const double* a_left = a_[h].data();
      const double* a_right = a_[h].data() + head_dim_;
      double* da_left = da_[h].data();
      double* da_right = da_[h].data() + head_dim_;

      DenseMatrix dp(n, head_dim_);
      std::vector<double> ds_left(n, 0.0), ds_right(n, 0.0);

      for (size_t i = 0; i < n; ++i) {
        const size_t begin = nb.offsets[i], end = nb.offsets[i + 1];
        const double* grow = gc.row(i) + h * head_dim_;

        // dα_ij = g_i · P_j, and the message term dP_j += α_ij g_i
        double alpha_dot = 0.0;  // Σ_j α_ij dα_ij, the softmax coupling term
        std::vector<double> dalpha(end - begin, 0.0);
        for (size_t k = begin; k < end; ++k) {
          const size_t j = nb.targets[k];
          const double* pj = p.row(j);
          double d = 0.0;
          for (size_t c = 0; c < head_dim_; ++c) d += grow[c] * pj[c];
          dalpha[k - begin] = d;
          alpha_dot += alpha[k] * d;
          double* dpj = dp.row(j);
          for (size_t c = 0; c < head_dim_; ++c) dpj[c] += alpha[k] * grow[c];
        }
        // softmax then LeakyReLU backward, folded into the score gradient
        for (size_t k = begin; k < end; ++k) {
          const double du = alpha[k] * (dalpha[k - begin] - alpha_dot) * lfac[k];
          ds_left[i] += du;
          ds_right[nb.targets[k]] += du;
        }
      }

      // s_left = P·a_left and s_right = P·a_right, both per vertex
      for (size_t i = 0; i < n; ++i) {
        const double* prow = p.row(i);
        double* dprow = dp.row(i);
        for (size_t c = 0; c < head_dim_; ++c) {
          da_left[c] += ds_left[i] * prow[c];
          da_right[c] += ds_right[i] * prow[c];
          dprow[c] += ds_left[i] * a_left[c] + ds_right[i] * a_right[c];
        }
      }

      const DenseMatrix dwh = matmul_at_b(x_cache_, dp);
      for (size_t i = 0; i < dwh.values.size(); ++i) dw_[h].values[i] += dwh.values[i];
      const DenseMatrix dxh = matmul_a_bt(dp, w_[h]);
      for (size_t i = 0; i < dxh.values.size(); ++i) dx.values[i] += dxh.values[i];
    }
    return dx;
  }

  void collect_params(const std::string& prefix, std::vector<ParamRef>& out) {
    for (size_t h = 0; h < heads_; ++h) {
      const std::string hp = prefix + ".head" + std::to_string(h);
      out.push_back({hp + ".w", w_[h].values.data(), dw_[h].values.data(), w_[h].values.size()});
      out.push_back({hp + ".a", a_[h].data(), da_[h].data(), a_[h].size()});
    }
    act_.collect_params(prefix, out);
  }

  void zero_grads() {
    for (size_t h = 0; h < heads_; ++h) {
      dw_[h].fill(0.0);
      std::fill(da_[h].begin(), da_[h].end(), 0.0);
    }
    act_.zero_grads();
  }

 private:
  size_t heads_ = 0;
  size_t head_dim_ = 0;
  std::vector<DenseMatrix> w_, dw_;
  std::vector<std::vector<double>> a_, da_;
  PReluLayer act_;

  // forward caches
  const NormalizedAdjacency* adj_ = nullptr;
  DenseMatrix x_cache_;
  std::vector<DenseMatrix> p_;
  std::vector<std::vector<double>> alpha_;
  std::vector<std::vector<double>> leaky_factor_;
};

}  // namespace lpgkit
