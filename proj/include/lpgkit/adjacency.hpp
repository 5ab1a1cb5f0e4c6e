#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "lpgkit/dense.hpp"
#include "lpgkit/error.hpp"
#include "lpgkit/graph.hpp"

namespace lpgkit {

namespace detail {

inline Csr transpose_csr(const Csr& s) {
  Csr t;
  const size_t n = s.rows();
  t.offsets.assign(n + 1, 0);
  for (size_t j : s.targets) t.offsets[j + 1] += 1;
  for (size_t i = 0; i < n; ++i) t.offsets[i + 1] += t.offsets[i];
  t.targets.resize(s.targets.size());
  std::vector<size_t> cursor(t.offsets.begin(), t.offsets.end() - 1);
  // scanning rows in ascending order leaves each transposed row sorted
  for (size_t i = 0; i < n; ++i) {
    for (size_t k = s.offsets[i]; k < s.offsets[i + 1]; ++k) t.targets[cursor[s.targets[k]]++] = i;
  }
  return t;
}

// Same reordering for a value array riding along the structure.
inline std::vector<double> transpose_values(const Csr& s, const Csr& t, const std::vector<double>& w) {
  std::vector<double> out(w.size());
  std::vector<size_t> cursor(t.offsets.begin(), t.offsets.end() - 1);
  for (size_t i = 0; i < s.rows(); ++i) {
    for (size_t k = s.offsets[i]; k < s.offsets[i + 1]; ++k) out[cursor[s.targets[k]]++] = w[k];
  }
  return out;
}

}  // namespace detail

/// Message-passing view of a graph: the raw neighbor structure (for sum and
/// attention aggregators) and the self-looped, symmetric-normalized weights
/// (for convolution). Transposed copies back the reverse pass; when the
/// structure is symmetric they alias the forward ones.
struct NormalizedAdjacency {
  size_t n = 0;
  Csr raw;                      // neighbor lists exactly as frozen
  Csr loops;                    // raw plus a self-loop per row, each exactly once
  std::vector<double> weights;  // aligned with loops: 1/sqrt(deg~(i)·deg~(j))
  bool symmetric = true;

  Csr raw_t_storage;  // populated only when !symmetric
  Csr loops_t_storage;
  std::vector<double> weights_t_storage;

  const Csr& raw_transposed() const { return symmetric ? raw : raw_t_storage; }
  const Csr& loops_transposed() const { return symmetric ? loops : loops_t_storage; }
  const std::vector<double>& weights_transposed() const { return symmetric ? weights : weights_t_storage; }
};

/// Builds the normalized view from a neighbor structure. deg~ counts the
/// self-loop, so a vertex with d distinct neighbors (self excluded) gets
/// deg~ = d+1 and edge weight 1/sqrt((d_i+1)(d_j+1)).
inline NormalizedAdjacency build_normalized_adjacency(const Csr& raw, bool symmetric) {
  NormalizedAdjacency adj;
  adj.n = raw.rows();
  adj.raw = raw;
  adj.symmetric = symmetric;

  adj.loops.offsets.assign(adj.n + 1, 0);
  adj.loops.targets.reserve(raw.targets.size() + adj.n);
  for (size_t i = 0; i < adj.n; ++i) {
    bool self_seen = false;
    for (size_t k = raw.offsets[i]; k < raw.offsets[i + 1]; ++k) {
      const size_t j = raw.targets[k];
      if (!self_seen && j >= i) {
        if (j != i) adj.loops.targets.push_back(i);
        self_seen = true;
      }
      adj.loops.targets.push_back(j);
    }
    if (!self_seen) adj.loops.targets.push_back(i);
    adj.loops.offsets[i + 1] = adj.loops.targets.size();
  }

  std::vector<double> inv_sqrt_deg(adj.n);
  for (size_t i = 0; i < adj.n; ++i) {
    inv_sqrt_deg[i] = 1.0 / std::sqrt(static_cast<double>(adj.loops.degree(i)));
  }
  adj.weights.resize(adj.loops.targets.size());
  for (size_t i = 0; i < adj.n; ++i) {
    for (size_t k = adj.loops.offsets[i]; k < adj.loops.offsets[i + 1]; ++k) {
      adj.weights[k] = inv_sqrt_deg[i] * inv_sqrt_deg[adj.loops.targets[k]];
    }
  }

  if (!symmetric) {
    adj.raw_t_storage = detail::transpose_csr(raw);
    adj.loops_t_storage = detail::transpose_csr(adj.loops);
    adj.weights_t_storage = detail::transpose_values(adj.loops, adj.loops_t_storage, adj.weights);
  }
  return adj;
}

inline NormalizedAdjacency build_normalized_adjacency(const PropertyGraph& graph) {
  if (!graph.frozen()) fail(ErrorCode::NotFrozen, "adjacency needs a frozen graph");
  const bool symmetric = !graph.directed() || graph.symmetrize_messages();
  return build_normalized_adjacency(graph.adjacency(), symmetric);
}

/// Y = S · X where S is the weighted structure.
inline DenseMatrix spmm(const Csr& s, const std::vector<double>& w, const DenseMatrix& x) {
  detail::require_shape(s.rows() == x.rows, "spmm: structure rows vs matrix rows");
  DenseMatrix y(x.rows, x.cols);
  for (size_t i = 0; i < s.rows(); ++i) {
    double* yrow = y.row(i);
    for (size_t k = s.offsets[i]; k < s.offsets[i + 1]; ++k) {
      const double wk = w[k];
      const double* xrow = x.row(s.targets[k]);
      for (size_t c = 0; c < x.cols; ++c) yrow[c] += wk * xrow[c];
    }
  }
  return y;
}

/// Y_i = Σ_{j ∈ row(i)} X_j  (unweighted neighbor sum)
inline DenseMatrix neighbor_sum(const Csr& s, const DenseMatrix& x) {
  detail::require_shape(s.rows() == x.rows, "neighbor_sum: structure rows vs matrix rows");
  DenseMatrix y(x.rows, x.cols);
  for (size_t i = 0; i < s.rows(); ++i) {
    double* yrow = y.row(i);
    for (size_t k = s.offsets[i]; k < s.offsets[i + 1]; ++k) {
      const double* xrow = x.row(s.targets[k]);
      for (size_t c = 0; c < x.cols; ++c) yrow[c] += xrow[c];
    }
  }
  return y;
}

/// Structure induced on a sorted subset of vertex indices; targets are
/// remapped to subset positions and stay sorted.
inline Csr induced_csr(const Csr& full, const std::vector<size_t>& nodes) {
  std::vector<size_t> position(full.rows(), SIZE_MAX);
  for (size_t p = 0; p < nodes.size(); ++p) position[nodes[p]] = p;
  Csr out;
  out.offsets.assign(nodes.size() + 1, 0);
  for (size_t p = 0; p < nodes.size(); ++p) {
    const size_t i = nodes[p];
    for (size_t k = full.offsets[i]; k < full.offsets[i + 1]; ++k) {
      if (position[full.targets[k]] != SIZE_MAX) out.targets.push_back(position[full.targets[k]]);
    }
    out.offsets[p + 1] = out.targets.size();
  }
  return out;
}

}  // namespace lpgkit
