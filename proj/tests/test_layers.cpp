// Tests for message-passing layers and the normalized adjacency view:
// closed-form weight oracles, brute-force dense recomputation, attention
// simplex properties, and permutation equivariance.

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "lpgkit/adjacency.hpp"
#include "lpgkit/layers.hpp"
#include "lpgkit/rng.hpp"

using namespace lpgkit;

namespace {

// Symmetric neighbor structure from an undirected edge list.
Csr make_csr(size_t n, const std::vector<std::pair<size_t, size_t>>& edges) {
  std::vector<std::set<size_t>> nb(n);
  for (const auto& [a, b] : edges) {
    nb[a].insert(b);
    if (a != b) nb[b].insert(a);
  }
  Csr csr;
  csr.offsets.assign(n + 1, 0);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j : nb[i]) csr.targets.push_back(j);
    csr.offsets[i + 1] = csr.targets.size();
  }
  return csr;
}

// Directed structure: rows keep only outgoing targets.
Csr make_directed_csr(size_t n, const std::vector<std::pair<size_t, size_t>>& arcs) {
  std::vector<std::set<size_t>> nb(n);
  for (const auto& [a, b] : arcs) nb[a].insert(b);
  Csr csr;
  csr.offsets.assign(n + 1, 0);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j : nb[i]) csr.targets.push_back(j);
    csr.offsets[i + 1] = csr.targets.size();
  }
  return csr;
}

DenseMatrix random_matrix(size_t rows, size_t cols, Rng& rng) {
  DenseMatrix m(rows, cols);
  for (auto& v : m.values) v = rng.next_double(-1.0, 1.0);
  return m;
}

// Dense copy of the weighted self-looped structure for brute-force checks.
DenseMatrix dense_normalized(const NormalizedAdjacency& adj) {
  DenseMatrix a(adj.n, adj.n);
  for (size_t i = 0; i < adj.n; ++i) {
    for (size_t k = adj.loops.offsets[i]; k < adj.loops.offsets[i + 1]; ++k) {
      a.at(i, adj.loops.targets[k]) = adj.weights[k];
    }
  }
  return a;
}

double* find_param(std::vector<ParamRef>& params, const std::string& suffix, size_t expected_size) {
  for (auto& p : params) {
    if (p.name.size() >= suffix.size() && p.name.compare(p.name.size() - suffix.size(), suffix.size(), suffix) == 0) {
      EXPECT_EQ(p.size, expected_size) << p.name;
      return p.value;
    }
  }
  ADD_FAILURE() << "no parameter ends with " << suffix;
  return nullptr;
}

double weight_between(const NormalizedAdjacency& adj, size_t i, size_t j) {
  for (size_t k = adj.loops.offsets[i]; k < adj.loops.offsets[i + 1]; ++k) {
    if (adj.loops.targets[k] == j) return adj.weights[k];
  }
  ADD_FAILURE() << "no entry " << i << " -> " << j;
  return 0.0;
}

}  // namespace

// ---------------------------------------------------------------------------
// normalized adjacency

TEST(Adjacency, SingleVertexIsItsOwnUnitLoop) {
  const NormalizedAdjacency adj = build_normalized_adjacency(make_csr(1, {}), true);
  ASSERT_EQ(adj.loops.targets, std::vector<size_t>{0});
  EXPECT_DOUBLE_EQ(adj.weights[0], 1.0);
}

TEST(Adjacency, SingleEdgeWeightsAreHalf) {
  const NormalizedAdjacency adj = build_normalized_adjacency(make_csr(2, {{0, 1}}), true);
  // both vertices have one neighbor plus the loop: deg~ = 2 everywhere
  EXPECT_DOUBLE_EQ(weight_between(adj, 0, 0), 0.5);
  EXPECT_DOUBLE_EQ(weight_between(adj, 0, 1), 0.5);
  EXPECT_DOUBLE_EQ(weight_between(adj, 1, 0), 0.5);
}

TEST(Adjacency, PathWeightsMatchDegreeFormula) {
  const NormalizedAdjacency adj = build_normalized_adjacency(make_csr(3, {{0, 1}, {1, 2}}), true);
  // deg~ = (2, 3, 2): endpoints see one neighbor, the middle sees two
  EXPECT_DOUBLE_EQ(weight_between(adj, 0, 1), 1.0 / std::sqrt(6.0));
  EXPECT_DOUBLE_EQ(weight_between(adj, 1, 0), 1.0 / std::sqrt(6.0));
  EXPECT_DOUBLE_EQ(weight_between(adj, 1, 1), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(weight_between(adj, 0, 0), 0.5);
}

TEST(Adjacency, ExplicitSelfLoopIsNotDoubled) {
  const NormalizedAdjacency adj = build_normalized_adjacency(make_csr(2, {{0, 0}, {0, 1}}), true);
  size_t self_entries = 0;
  for (size_t k = adj.loops.offsets[0]; k < adj.loops.offsets[0 + 1]; ++k) {
    if (adj.loops.targets[k] == 0) ++self_entries;
  }
  EXPECT_EQ(self_entries, 1u);
  EXPECT_EQ(adj.loops.degree(0), 2u);  // {0, 1}
}

TEST(Adjacency, TransposedViewMatchesDenseTranspose) {
  const Csr raw = make_directed_csr(4, {{0, 1}, {0, 2}, {2, 1}, {3, 0}});
  const NormalizedAdjacency adj = build_normalized_adjacency(raw, false);
  Rng rng(7);
  const DenseMatrix x = random_matrix(4, 3, rng);
  const DenseMatrix a = dense_normalized(adj);
  DenseMatrix at(4, 4);
  for (size_t i = 0; i < 4; ++i) {
    for (size_t j = 0; j < 4; ++j) at.at(i, j) = a.at(j, i);
  }
  const DenseMatrix want = matmul(at, x);
  const DenseMatrix got = spmm(adj.loops_transposed(), adj.weights_transposed(), x);
  for (size_t i = 0; i < want.values.size(); ++i) EXPECT_NEAR(got.values[i], want.values[i], 1e-14);
}

TEST(Adjacency, NeighborSumBruteForceOnStar) {
  const Csr raw = make_csr(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}});
  Rng rng(9);
  const DenseMatrix x = random_matrix(5, 2, rng);
  const DenseMatrix s = neighbor_sum(raw, x);
  for (size_t c = 0; c < 2; ++c) {
    EXPECT_DOUBLE_EQ(s.at(0, c), x.at(1, c) + x.at(2, c) + x.at(3, c) + x.at(4, c));
    EXPECT_DOUBLE_EQ(s.at(1, c), x.at(0, c));
  }
}

TEST(Adjacency, InducedSubgraphKeepsInternalEdgesOnly) {
  const Csr raw = make_csr(5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}});
  const Csr sub = induced_csr(raw, {1, 2, 4});  // drops 0 and 3
  ASSERT_EQ(sub.rows(), 3u);
  EXPECT_EQ(sub.degree(0), 1u);  // 1 keeps only 2
  EXPECT_EQ(sub.targets[sub.offsets[0]], 1u);
  EXPECT_EQ(sub.degree(2), 0u);  // 4 lost its single neighbor 3
}

// ---------------------------------------------------------------------------
// convolution layer

TEST(GcnLayer, IdentityWeightsReproduceTheConvolution) {
  const NormalizedAdjacency adj = build_normalized_adjacency(make_csr(3, {{0, 1}, {1, 2}}), true);
  Rng rng(11);
  GcnLayer layer(3, 3, rng);
  std::vector<ParamRef> params;
  layer.collect_params("gcn", params);
  double* w = find_param(params, ".w", 9);
  std::fill(w, w + 9, 0.0);
  for (size_t i = 0; i < 3; ++i) w[i * 3 + i] = 1.0;

  const DenseMatrix x = random_matrix(3, 3, rng);
  const DenseMatrix y = layer.forward(adj, x);
  const DenseMatrix want = matmul(dense_normalized(adj), x);
  for (size_t i = 0; i < y.values.size(); ++i) EXPECT_NEAR(y.values[i], want.values[i], 1e-14);
}

TEST(GcnLayer, RegularGraphKeepsIdenticalRowsIdentical) {
  // triangle: every vertex has degree 2, so identical inputs stay identical
  const NormalizedAdjacency adj = build_normalized_adjacency(make_csr(3, {{0, 1}, {1, 2}, {0, 2}}), true);
  Rng rng(13);
  GcnLayer layer(4, 5, rng);
  DenseMatrix x(3, 4);
  for (size_t r = 0; r < 3; ++r) {
    for (size_t c = 0; c < 4; ++c) x.at(r, c) = 0.3 * static_cast<double>(c) - 0.5;
  }
  const DenseMatrix y = layer.forward(adj, x);
  for (size_t r = 1; r < 3; ++r) {
    for (size_t c = 0; c < 5; ++c) EXPECT_NEAR(y.at(r, c), y.at(0, c), 1e-12);
  }
}

TEST(GcnLayer, DenseRecomputationMatches) {
  const NormalizedAdjacency adj = build_normalized_adjacency(make_csr(4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}}), true);
  Rng rng(17);
  GcnLayer layer(3, 2, rng);
  std::vector<ParamRef> params;
  layer.collect_params("gcn", params);
  const double* w = find_param(params, ".w", 6);
  const double* b = find_param(params, ".b", 2);

  const DenseMatrix x = random_matrix(4, 3, rng);
  const DenseMatrix y = layer.forward(adj, x);
  DenseMatrix wm(3, 2);
  std::copy(w, w + 6, wm.values.begin());
  DenseMatrix want = matmul(matmul(dense_normalized(adj), x), wm);
  for (size_t r = 0; r < 4; ++r) {
    for (size_t c = 0; c < 2; ++c) want.at(r, c) += b[c];
  }
  for (size_t i = 0; i < y.values.size(); ++i) EXPECT_NEAR(y.values[i], want.values[i], 1e-13);
}

// ---------------------------------------------------------------------------
// isomorphism layer

TEST(GinLayer, IsolatedVertexMatchesManualMlp) {
  const NormalizedAdjacency adj = build_normalized_adjacency(make_csr(1, {}), true);
  Rng rng(19);
  GinLayer layer(2, 3, rng);
  std::vector<ParamRef> params;
  layer.collect_params("gin", params);
  const double* w1 = find_param(params, ".mlp1.w", 6);
  const double* b1 = find_param(params, ".mlp1.b", 3);
  const double* slope = find_param(params, ".slope", 1);
  const double* w2 = find_param(params, ".mlp2.w", 9);
  const double* b2 = find_param(params, ".mlp2.b", 3);
  const double* eps = find_param(params, ".eps", 1);
  EXPECT_DOUBLE_EQ(*eps, 0.0);  // starts neutral

  DenseMatrix x(1, 2);
  x.at(0, 0) = 0.7;
  x.at(0, 1) = -1.2;
  const DenseMatrix y = layer.forward(adj, x);

  // by hand: s = (1+eps)·x, h = prelu(s·W1 + b1), y = h·W2 + b2
  double s[2] = {(1.0 + *eps) * x.at(0, 0), (1.0 + *eps) * x.at(0, 1)};
  double h[3];
  for (size_t c = 0; c < 3; ++c) {
    h[c] = b1[c] + s[0] * w1[0 * 3 + c] + s[1] * w1[1 * 3 + c];
    if (h[c] < 0.0) h[c] *= *slope;
  }
  for (size_t c = 0; c < 3; ++c) {
    double want = b2[c];
    for (size_t k = 0; k < 3; ++k) want += h[k] * w2[k * 3 + c];
    EXPECT_NEAR(y.at(0, c), want, 1e-14);
  }
}

TEST(GinLayer, TwoIdenticalNeighborsActLikeOneDoubled) {
  Rng rng(23);
  GinLayer layer(2, 4, rng);
  const std::vector<double> u{0.4, -0.9}, v{1.1, 0.2};

  // star: center 0 with two identical leaves
  const NormalizedAdjacency star = build_normalized_adjacency(make_csr(3, {{0, 1}, {0, 2}}), true);
  DenseMatrix xs(3, 2);
  xs.at(0, 0) = v[0];
  xs.at(0, 1) = v[1];
  for (size_t r = 1; r < 3; ++r) {
    xs.at(r, 0) = u[0];
    xs.at(r, 1) = u[1];
  }
  const DenseMatrix ys = layer.forward(star, xs);

  // edge: center 0 with one leaf carrying doubled features
  const NormalizedAdjacency edge = build_normalized_adjacency(make_csr(2, {{0, 1}}), true);
  DenseMatrix xe(2, 2);
  xe.at(0, 0) = v[0];
  xe.at(0, 1) = v[1];
  xe.at(1, 0) = 2.0 * u[0];
  xe.at(1, 1) = 2.0 * u[1];
  const DenseMatrix ye = layer.forward(edge, xe);

  for (size_t c = 0; c < 4; ++c) EXPECT_NEAR(ys.at(0, c), ye.at(0, c), 1e-13);
}

// ---------------------------------------------------------------------------
// attention layer

TEST(GatLayer, IdenticalFeaturesGiveUniformAttention) {
  const NormalizedAdjacency adj = build_normalized_adjacency(make_csr(3, {{0, 1}, {1, 2}}), true);
  Rng rng(29);
  GatLayer layer(3, 4, 2, rng);
  DenseMatrix x(3, 3);
  for (size_t r = 0; r < 3; ++r) {
    x.at(r, 0) = 0.5;
    x.at(r, 1) = -1.0;
    x.at(r, 2) = 2.0;
  }
  layer.forward(adj, x);
  for (size_t h = 0; h < 2; ++h) {
    const std::vector<double>& alpha = layer.attention(h);
    // middle vertex: self plus two neighbors, every weight exactly 1/3
    for (size_t k = adj.loops.offsets[1]; k < adj.loops.offsets[2]; ++k) {
      EXPECT_NEAR(alpha[k], 1.0 / 3.0, 1e-12);
    }
    // endpoints: self plus one neighbor
    for (size_t k = adj.loops.offsets[0]; k < adj.loops.offsets[1]; ++k) {
      EXPECT_NEAR(alpha[k], 0.5, 1e-12);
    }
  }
}

TEST(GatLayer, AttentionRowsSumToOneOnRandomGraphs) {
  Rng rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const size_t n = 3 + rng.next_below(10);
    std::vector<std::pair<size_t, size_t>> edges;
    for (size_t i = 0; i < n; ++i) {
      for (size_t j = i + 1; j < n; ++j) {
        if (rng.next_bernoulli(0.3)) edges.emplace_back(i, j);
      }
    }
    const NormalizedAdjacency adj = build_normalized_adjacency(make_csr(n, edges), true);
    GatLayer layer(4, 4, 2, rng);
    const DenseMatrix x = random_matrix(n, 4, rng);
    layer.forward(adj, x);
    for (size_t h = 0; h < 2; ++h) {
      const std::vector<double>& alpha = layer.attention(h);
      for (size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (size_t k = adj.loops.offsets[i]; k < adj.loops.offsets[i + 1]; ++k) sum += alpha[k];
        EXPECT_NEAR(sum, 1.0, 1e-9);
        for (size_t k = adj.loops.offsets[i]; k < adj.loops.offsets[i + 1]; ++k) {
          EXPECT_GE(alpha[k], 0.0);
        }
      }
    }
  }
}

TEST(GatLayer, IsolatedVertexAttendsOnlyToItself) {
  const NormalizedAdjacency adj = build_normalized_adjacency(make_csr(1, {}), true);
  Rng rng(37);
  GatLayer layer(2, 4, 2, rng);
  std::vector<ParamRef> params;
  layer.collect_params("att", params);
  const double* w0 = find_param(params, "head0.w", 4);
  const double* w1 = find_param(params, "head1.w", 4);
  const double* slope = find_param(params, ".slope", 1);

  DenseMatrix x(1, 2);
  x.at(0, 0) = -0.8;
  x.at(0, 1) = 0.6;
  const DenseMatrix y = layer.forward(adj, x);
  EXPECT_DOUBLE_EQ(layer.attention(0)[0], 1.0);
  EXPECT_DOUBLE_EQ(layer.attention(1)[0], 1.0);

  // with alpha pinned at 1 the output is just prelu(x·W_h) per head
  const double* ws[2] = {w0, w1};
  for (size_t h = 0; h < 2; ++h) {
    for (size_t c = 0; c < 2; ++c) {
      double want = x.at(0, 0) * ws[h][0 * 2 + c] + x.at(0, 1) * ws[h][1 * 2 + c];
      if (want < 0.0) want *= *slope;
      EXPECT_NEAR(y.at(0, h * 2 + c), want, 1e-14);
    }
  }
}

TEST(GatLayer, TriangleBruteForceOracle) {
  const NormalizedAdjacency adj = build_normalized_adjacency(make_csr(3, {{0, 1}, {1, 2}, {0, 2}}), true);
  Rng rng(41);
  GatLayer layer(3, 2, 1, rng);
  std::vector<ParamRef> params;
  layer.collect_params("att", params);
  const double* w = find_param(params, "head0.w", 6);
  const double* a = find_param(params, "head0.a", 4);
  const double* slope = find_param(params, ".slope", 1);
  const DenseMatrix x = random_matrix(3, 3, rng);
  const DenseMatrix y = layer.forward(adj, x);

  // full recomputation with plain loops
  double p[3][2];
  double sl[3], sr[3];
  for (size_t i = 0; i < 3; ++i) {
    for (size_t c = 0; c < 2; ++c) {
      p[i][c] = 0.0;
      for (size_t k = 0; k < 3; ++k) p[i][c] += x.at(i, k) * w[k * 2 + c];
    }
    sl[i] = a[0] * p[i][0] + a[1] * p[i][1];
    sr[i] = a[2] * p[i][0] + a[3] * p[i][1];
  }
  for (size_t i = 0; i < 3; ++i) {
    double score[3], denom = 0.0, row_max = -1e300;
    for (size_t j = 0; j < 3; ++j) {
      const double u = sl[i] + sr[j];
      score[j] = u > 0.0 ? u : 0.2 * u;
      row_max = std::max(row_max, score[j]);
    }
    for (size_t j = 0; j < 3; ++j) {
      score[j] = std::exp(score[j] - row_max);
      denom += score[j];
    }
    for (size_t c = 0; c < 2; ++c) {
      double out = 0.0;
      for (size_t j = 0; j < 3; ++j) out += (score[j] / denom) * p[j][c];
      if (out < 0.0) out *= *slope;
      EXPECT_NEAR(y.at(i, c), out, 1e-12);
    }
  }
}

// ---------------------------------------------------------------------------
// permutation equivariance

namespace {

// Relabels an edge list through a permutation: vertex i becomes perm[i].
std::vector<std::pair<size_t, size_t>> permute_edges(const std::vector<std::pair<size_t, size_t>>& edges,
                                                     const std::vector<size_t>& perm) {
  std::vector<std::pair<size_t, size_t>> out;
  out.reserve(edges.size());
  for (const auto& [a, b] : edges) out.emplace_back(perm[a], perm[b]);
  return out;
}

template <typename Layer, typename... Args>
void check_equivariance(uint64_t seed, Args... layer_args) {
  Rng rng(seed);
  for (int trial = 0; trial < 20; ++trial) {
    const size_t n = 8;
    std::vector<std::pair<size_t, size_t>> edges;
    for (size_t i = 0; i < n; ++i) {
      for (size_t j = i + 1; j < n; ++j) {
        if (rng.next_bernoulli(0.35)) edges.emplace_back(i, j);
      }
    }
    std::vector<size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);

    const DenseMatrix x = random_matrix(n, 3, rng);
    DenseMatrix xp(n, 3);
    for (size_t i = 0; i < n; ++i) {
      for (size_t c = 0; c < 3; ++c) xp.at(perm[i], c) = x.at(i, c);
    }

    // identical construction sequence gives identical parameters
    const uint64_t layer_seed = rng.next_u64();
    Rng r1(layer_seed), r2(layer_seed);
    Layer l1(3, 4, layer_args..., r1);
    Layer l2(3, 4, layer_args..., r2);

    const NormalizedAdjacency adj = build_normalized_adjacency(make_csr(n, edges), true);
    const NormalizedAdjacency adj_p = build_normalized_adjacency(make_csr(n, permute_edges(edges, perm)), true);
    const DenseMatrix y = l1.forward(adj, x);
    const DenseMatrix yp = l2.forward(adj_p, xp);
    for (size_t i = 0; i < n; ++i) {
      for (size_t c = 0; c < 4; ++c) {
        EXPECT_NEAR(yp.at(perm[i], c), y.at(i, c), 1e-10);
      }
    }
  }
}

}  // namespace

TEST(Equivariance, ConvolutionCommutesWithRelabeling) { check_equivariance<GcnLayer>(101); }

TEST(Equivariance, IsomorphismLayerCommutesWithRelabeling) { check_equivariance<GinLayer>(103); }

TEST(Equivariance, AttentionCommutesWithRelabeling) { check_equivariance<GatLayer>(107, size_t{2}); }
