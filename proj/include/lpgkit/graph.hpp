#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "lpgkit/error.hpp"
#include "lpgkit/property_value.hpp"

namespace lpgkit {

using VertexId = uint64_t;
using EdgeId = uint64_t;

using LabelSet = std::set<std::string>;
using PropertyMap = std::map<std::string, std::vector<PropertyValue>>;

namespace detail {

/// Per key, the (key, value) pair must be unique.
inline void check_no_duplicate_values(const PropertyMap& props) {
  for (const auto& [key, values] : props) {
    for (size_t i = 0; i < values.size(); ++i) {
      for (size_t j = i + 1; j < values.size(); ++j) {
        if (values[i] == values[j]) {
          fail(ErrorCode::InvalidProperty, "duplicate (key,value) pair for key '" + key + "'");
        }
      }
    }
  }
}

}  // namespace detail

struct Vertex {
  VertexId id = 0;
  LabelSet labels;
  PropertyMap properties;

  void add_property(const std::string& key, PropertyValue value) {
    auto& values = properties[key];
    for (const auto& existing : values) {
      if (existing == value) {
        fail(ErrorCode::InvalidProperty, "duplicate (key,value) pair for key '" + key + "'");
      }
    }
    values.push_back(std::move(value));
  }
};

struct Edge {
  EdgeId id = 0;
  VertexId src = 0;
  VertexId dst = 0;
  LabelSet labels;
  PropertyMap properties;

  void add_property(const std::string& key, PropertyValue value) {
    auto& values = properties[key];
    for (const auto& existing : values) {
      if (existing == value) {
        fail(ErrorCode::InvalidProperty, "duplicate (key,value) pair for key '" + key + "'");
      }
    }
    values.push_back(std::move(value));
  }
};

/// Compressed sparse row neighbor index over dense vertex indices.
struct Csr {
  std::vector<size_t> offsets;  // size n+1
  std::vector<size_t> targets;  // sorted within each row, deduplicated

  size_t rows() const { return offsets.empty() ? 0 : offsets.size() - 1; }

  size_t degree(size_t row) const { return offsets[row + 1] - offsets[row]; }

  std::pair<const size_t*, const size_t*> row(size_t i) const {
    return {targets.data() + offsets[i], targets.data() + offsets[i + 1]};
  }

  friend bool operator==(const Csr&, const Csr&) = default;
};

/// In-memory labeled property graph. Mutation happens single-writer before
/// freeze(); a frozen graph is immutable and safe to share across threads.
/// Vertices and edges are kept sorted by id after freeze, which fixes the
/// canonical row order used by the encoder and the trainer.
class PropertyGraph {
 public:
  explicit PropertyGraph(bool directed = false) : directed_(directed) {}

  bool directed() const { return directed_; }

  /// When true (default), message passing over a directed graph uses the
  /// union of in- and out-neighbors. Storage keeps edge direction either way.
  void set_symmetrize_messages(bool on) {
    symmetrize_messages_ = on;
    frozen_ = false;
  }
  bool symmetrize_messages() const { return symmetrize_messages_; }

  size_t vertex_count() const { return vertices_.size(); }
  size_t edge_count() const { return edges_.size(); }

  VertexId add_vertex(Vertex v) {
    if (vertex_index_.count(v.id)) fail(ErrorCode::DuplicateId, "vertex id " + std::to_string(v.id));
    detail::check_no_duplicate_values(v.properties);
    vertex_index_.emplace(v.id, vertices_.size());
    vertices_.push_back(std::move(v));
    frozen_ = false;
    return vertices_.back().id;
  }

  EdgeId add_edge(Edge e) {
    if (edge_index_.count(e.id)) fail(ErrorCode::DuplicateId, "edge id " + std::to_string(e.id));
    if (!vertex_index_.count(e.src)) {
      fail(ErrorCode::DanglingEndpoint, "edge " + std::to_string(e.id) + " src " + std::to_string(e.src));
    }
    if (!vertex_index_.count(e.dst)) {
      fail(ErrorCode::DanglingEndpoint, "edge " + std::to_string(e.id) + " dst " + std::to_string(e.dst));
    }
    detail::check_no_duplicate_values(e.properties);
    edge_index_.emplace(e.id, edges_.size());
    edges_.push_back(std::move(e));
    frozen_ = false;
    return edges_.back().id;
  }

  bool has_vertex(VertexId id) const { return vertex_index_.count(id) != 0; }
  bool has_edge(EdgeId id) const { return edge_index_.count(id) != 0; }

  const Vertex& vertex(VertexId id) const {
    auto it = vertex_index_.find(id);
    if (it == vertex_index_.end()) fail(ErrorCode::UnknownVertex, "vertex id " + std::to_string(id));
    return vertices_[it->second];
  }

  const Edge& edge(EdgeId id) const {
    auto it = edge_index_.find(id);
    if (it == edge_index_.end()) fail(ErrorCode::UnknownVertex, "edge id " + std::to_string(id));
    return edges_[it->second];
  }

  const std::vector<Vertex>& vertices() const { return vertices_; }
  const std::vector<Edge>& edges() const { return edges_; }

  /// Sorts entities by id and rebuilds the adjacency index. Idempotent.
  void freeze() {
    std::sort(vertices_.begin(), vertices_.end(),
              [](const Vertex& a, const Vertex& b) { return a.id < b.id; });
    std::sort(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) { return a.id < b.id; });
    vertex_index_.clear();
    for (size_t i = 0; i < vertices_.size(); ++i) vertex_index_.emplace(vertices_[i].id, i);
    edge_index_.clear();
    for (size_t i = 0; i < edges_.size(); ++i) edge_index_.emplace(edges_[i].id, i);

    const bool symmetric = !directed_ || symmetrize_messages_;
    std::vector<std::vector<size_t>> rows(vertices_.size());
    for (const Edge& e : edges_) {
      const size_t s = vertex_index_.at(e.src);
      const size_t d = vertex_index_.at(e.dst);
      rows[s].push_back(d);
      if (symmetric && s != d) rows[d].push_back(s);
    }
    adjacency_.offsets.assign(vertices_.size() + 1, 0);
    adjacency_.targets.clear();
    for (size_t i = 0; i < rows.size(); ++i) {
      auto& r = rows[i];
      std::sort(r.begin(), r.end());
      r.erase(std::unique(r.begin(), r.end()), r.end());
      adjacency_.targets.insert(adjacency_.targets.end(), r.begin(), r.end());
      adjacency_.offsets[i + 1] = adjacency_.targets.size();
    }
    frozen_ = true;
  }

  bool frozen() const { return frozen_; }

  /// Dense row index of a vertex id (valid after freeze).
  size_t index_of(VertexId id) const {
    require_frozen();
    auto it = vertex_index_.find(id);
    if (it == vertex_index_.end()) fail(ErrorCode::UnknownVertex, "vertex id " + std::to_string(id));
    return it->second;
  }

  VertexId id_of(size_t index) const {
    require_frozen();
    return vertices_[index].id;
  }

  const Csr& adjacency() const {
    require_frozen();
    return adjacency_;
  }

  size_t degree(VertexId id) const { return adjacency().degree(index_of(id)); }

  /// Neighbor ids in ascending order (canonical aggregation order).
  std::vector<VertexId> neighbors(VertexId id) const {
    const size_t row = index_of(id);
    auto [begin, end] = adjacency_.row(row);
    std::vector<VertexId> out;
    out.reserve(static_cast<size_t>(end - begin));
    for (const size_t* p = begin; p != end; ++p) out.push_back(vertices_[*p].id);
    return out;
  }

  /// Union of names over vertices and edges, sorted by UTF-8 byte order.
  std::vector<std::string> label_universe() const {
    std::set<std::string> names;
    for (const auto& v : vertices_) names.insert(v.labels.begin(), v.labels.end());
    for (const auto& e : edges_) names.insert(e.labels.begin(), e.labels.end());
    return {names.begin(), names.end()};
  }

  std::vector<std::string> key_universe() const {
    std::set<std::string> names;
    for (const auto& v : vertices_) {
      for (const auto& [key, values] : v.properties) names.insert(key);
    }
    for (const auto& e : edges_) {
      for (const auto& [key, values] : e.properties) names.insert(key);
    }
    return {names.begin(), names.end()};
  }

 private:
  void require_frozen() const {
    if (!frozen_) fail(ErrorCode::NotFrozen, "graph must be frozen before neighborhood access");
  }

  bool directed_ = false;
  bool symmetrize_messages_ = true;
  bool frozen_ = false;
  std::vector<Vertex> vertices_;
  std::vector<Edge> edges_;
  std::unordered_map<VertexId, size_t> vertex_index_;
  std::unordered_map<EdgeId, size_t> edge_index_;
  Csr adjacency_;
};

}  // namespace lpgkit
