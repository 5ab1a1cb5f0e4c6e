#pragma once

#include <map>
#include <string>

#include <json.hpp>

#include "lpgkit/graph.hpp"

namespace lpgkit {

struct DatasetStats {
  size_t n_vertices = 0;
  size_t n_edges = 0;
  size_t n_labels = 0;         // distinct label names across vertices and edges
  size_t n_property_keys = 0;  // distinct keys across vertices and edges
  std::map<std::string, double> label_vertex_fraction;  // label -> share of vertices carrying it
};

inline DatasetStats dataset_stats(const PropertyGraph& graph) {
  DatasetStats s;
  s.n_vertices = graph.vertex_count();
  s.n_edges = graph.edge_count();
  s.n_labels = graph.label_universe().size();
  s.n_property_keys = graph.key_universe().size();
  for (const auto& label : graph.label_universe()) s.label_vertex_fraction[label] = 0.0;
  if (s.n_vertices > 0) {
    for (const auto& v : graph.vertices()) {
      for (const auto& label : v.labels) s.label_vertex_fraction[label] += 1.0;
    }
    for (auto& [label, count] : s.label_vertex_fraction) count /= static_cast<double>(s.n_vertices);
  }
  return s;
}

inline nlohmann::json stats_to_json(const DatasetStats& s) {
  nlohmann::json j;
  j["n_vertices"] = s.n_vertices;
  j["n_edges"] = s.n_edges;
  j["n_labels"] = s.n_labels;
  j["n_property_keys"] = s.n_property_keys;
  j["label_vertex_fraction"] = s.label_vertex_fraction;
  return j;
}

}  // namespace lpgkit
