#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "lpgkit/adjacency.hpp"
#include "lpgkit/error.hpp"
#include "lpgkit/rng.hpp"

namespace lpgkit {

struct SampledSubgraph {
  std::vector<size_t> nodes;  // original row indices, ascending
  NormalizedAdjacency adjacency;
};

/// Uniform-without-replacement node sample with the induced edge set — the
/// node-sampler flavor of subgraph mini-batching. Normalization weights are
/// recomputed on the induced structure.
inline SampledSubgraph sample_node_subgraph(const Csr& full, bool symmetric, size_t nodes_per_batch, Rng& rng) {
  const size_t n = full.rows();
  if (nodes_per_batch > n) fail(ErrorCode::InvalidConfig, "cannot sample more nodes than the graph has");
  std::vector<size_t> pool(n);
  std::iota(pool.begin(), pool.end(), size_t{0});
  // partial Fisher-Yates: after k swaps the first k entries are the sample
  for (size_t i = 0; i < nodes_per_batch; ++i) {
    const size_t j = i + static_cast<size_t>(rng.next_below(n - i));
    std::swap(pool[i], pool[j]);
  }
  SampledSubgraph out;
  out.nodes.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(nodes_per_batch));
  std::sort(out.nodes.begin(), out.nodes.end());
  out.adjacency = build_normalized_adjacency(induced_csr(full, out.nodes), symmetric);
  return out;
}

}  // namespace lpgkit
