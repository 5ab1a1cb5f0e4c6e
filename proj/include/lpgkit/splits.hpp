#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "lpgkit/error.hpp"
#include "lpgkit/graph.hpp"
#include "lpgkit/rng.hpp"

namespace lpgkit {

struct SplitRatios {
  double train = 0.6;
  double val = 0.2;
  double test = 0.2;
};

struct SplitMasks {
  std::set<VertexId> train;
  std::set<VertexId> val;
  std::set<VertexId> test;
};

namespace detail {

inline void check_ratios(const SplitRatios& r) {
  if (r.train < 0.0 || r.val < 0.0 || r.test < 0.0 || std::abs(r.train + r.val + r.test - 1.0) > 1e-9) {
    fail(ErrorCode::InvalidRatios, "split ratios must be non-negative and sum to 1");
  }
}

// Largest-remainder apportionment of n items over the three splits; ties on
// the fractional part go to the earlier split so the result is total-order
// deterministic.
inline std::array<size_t, 3> apportion(size_t n, const SplitRatios& r) {
  const std::array<double, 3> ratios{r.train, r.val, r.test};
  std::array<size_t, 3> counts{};
  std::array<double, 3> frac{};
  size_t assigned = 0;
  for (int k = 0; k < 3; ++k) {
    const double exact = static_cast<double>(n) * ratios[k];
    counts[k] = static_cast<size_t>(std::floor(exact));
    frac[k] = exact - static_cast<double>(counts[k]);
    assigned += counts[k];
  }
  size_t leftover = n - assigned;
  std::array<int, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return frac[a] > frac[b]; });
  for (size_t i = 0; i < leftover; ++i) counts[order[i % 3]] += 1;
  return counts;
}

inline void deal_out(std::vector<VertexId>& ids, Rng& rng, const SplitRatios& r, SplitMasks& masks) {
  std::sort(ids.begin(), ids.end());
  rng.shuffle(ids);
  const auto counts = apportion(ids.size(), r);
  size_t pos = 0;
  for (size_t i = 0; i < counts[0]; ++i) masks.train.insert(ids[pos++]);
  for (size_t i = 0; i < counts[1]; ++i) masks.val.insert(ids[pos++]);
  for (size_t i = 0; i < counts[2]; ++i) masks.test.insert(ids[pos++]);
}

}  // namespace detail

/// Random split of the given vertex ids. Ids are sorted before shuffling so
/// the outcome depends only on the id set and the seed, not on input order.
inline SplitMasks make_splits(std::vector<VertexId> ids, const SplitRatios& ratios, uint64_t seed) {
  detail::check_ratios(ratios);
  SplitMasks masks;
  Rng rng(seed);
  detail::deal_out(ids, rng, ratios, masks);
  return masks;
}

inline SplitMasks make_splits(const PropertyGraph& graph, const SplitRatios& ratios, uint64_t seed) {
  std::vector<VertexId> ids;
  ids.reserve(graph.vertex_count());
  for (const auto& v : graph.vertices()) ids.push_back(v.id);
  return make_splits(std::move(ids), ratios, seed);
}

/// Stratified split: apportionment runs independently inside every class, so
/// each split's class histogram matches the global one to within one vertex
/// per class. Classes smaller than the number of splits are rejected.
inline SplitMasks make_stratified_splits(const std::map<VertexId, int64_t>& classes, const SplitRatios& ratios,
                                         uint64_t seed) {
  detail::check_ratios(ratios);
  std::map<int64_t, std::vector<VertexId>> by_class;
  for (const auto& [id, cls] : classes) by_class[cls].push_back(id);
  SplitMasks masks;
  Rng rng(seed);
  for (auto& [cls, ids] : by_class) {
    if (ids.size() < 3) {
      fail(ErrorCode::EmptyClass, "class " + std::to_string(cls) + " has " + std::to_string(ids.size()) +
                                      " members, fewer than the 3 splits");
    }
    Rng class_rng = rng.fork(static_cast<uint64_t>(cls));
    detail::deal_out(ids, class_rng, ratios, masks);
  }
  return masks;
}

}  // namespace lpgkit
