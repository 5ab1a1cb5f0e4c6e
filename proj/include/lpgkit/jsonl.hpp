#pragma once

#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lpgkit/error.hpp"
#include "lpgkit/graph.hpp"

namespace lpgkit {

namespace detail {

using nlohmann::json;

inline json value_to_json(const PropertyValue& v) {
  switch (v.kind()) {
    case ValueKind::Integer: return v.as_integer();
    case ValueKind::Real: return v.as_real();
    case ValueKind::Boolean: return v.as_boolean();
    case ValueKind::Text: return v.as_text();
    case ValueKind::RealVector: return v.as_real_vector();
  }
  return nullptr;
}

inline PropertyValue value_from_json(const json& j, size_t line_no) {
  switch (j.type()) {
    case json::value_t::number_integer: return PropertyValue::integer(j.get<int64_t>());
    case json::value_t::number_unsigned: {
      const uint64_t u = j.get<uint64_t>();
      if (u > static_cast<uint64_t>(INT64_MAX)) {
        fail(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": integer out of range");
      }
      return PropertyValue::integer(static_cast<int64_t>(u));
    }
    case json::value_t::number_float: return PropertyValue::real(j.get<double>());
    case json::value_t::boolean: return PropertyValue::boolean(j.get<bool>());
    case json::value_t::string: return PropertyValue::text(j.get<std::string>());
    case json::value_t::array: {
      std::vector<double> comps;
      comps.reserve(j.size());
      for (const auto& c : j) {
        if (!c.is_number()) {
          fail(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": real vector component must be a number");
        }
        comps.push_back(c.get<double>());
      }
      return PropertyValue::real_vector(std::move(comps));
    }
    default:
      fail(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": unsupported value type");
  }
}

// Routes every value through add_property so the per-key uniqueness and
// validity checks apply to loaded data too. An empty array means the key is
// absent.
template <typename Entity>
void props_from_json(const json& j, size_t line_no, Entity& ent) {
  for (const auto& [key, values] : j.items()) {
    if (!values.is_array()) {
      fail(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": props values must be arrays");
    }
    for (const auto& v : values) {
      try {
        ent.add_property(key, value_from_json(v, line_no));
      } catch (const Error& e) {
        if (e.code() == ErrorCode::ParseError) throw;
        fail(e.code(), "line " + std::to_string(line_no) + ": " + e.what());
      }
    }
  }
}

inline json props_to_json(const PropertyMap& props) {
  json j = json::object();
  for (const auto& [key, values] : props) {
    json arr = json::array();
    for (const auto& v : values) arr.push_back(value_to_json(v));
    j[key] = std::move(arr);
  }
  return j;
}

}  // namespace detail

/// Loads the line-delimited interchange format. The load is two-pass
/// (vertices before edges) so record order within the file never matters.
inline PropertyGraph load_lpg_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path);

  using nlohmann::json;
  std::string line;
  size_t line_no = 0;
  bool saw_header = false;
  bool directed = false;
  std::vector<Vertex> vertices;
  std::vector<Edge> edges;

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) fail(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": invalid JSON");
    const std::string kind = j.value("kind", "");
    if (!saw_header) {
      if (kind != "header") fail(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected header record");
      if (j.value("version", 0) != 1) {
        fail(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": unsupported version");
      }
      directed = j.value("directed", false);
      saw_header = true;
      continue;
    }
    if (kind == "vertex") {
      Vertex v;
      if (!j.contains("id") || !j["id"].is_number_unsigned()) {
        fail(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": vertex needs unsigned id");
      }
      v.id = j["id"].get<uint64_t>();
      for (const auto& l : j.value("labels", json::array())) v.labels.insert(l.get<std::string>());
      if (j.contains("props")) detail::props_from_json(j["props"], line_no, v);
      vertices.push_back(std::move(v));
    } else if (kind == "edge") {
      Edge e;
      for (const char* field : {"id", "src", "dst"}) {
        if (!j.contains(field) || !j[field].is_number_unsigned()) {
          fail(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": edge needs unsigned " + std::string(field));
        }
      }
      e.id = j["id"].get<uint64_t>();
      e.src = j["src"].get<uint64_t>();
      e.dst = j["dst"].get<uint64_t>();
      for (const auto& l : j.value("labels", json::array())) e.labels.insert(l.get<std::string>());
      if (j.contains("props")) detail::props_from_json(j["props"], line_no, e);
      edges.push_back(std::move(e));
    } else {
      fail(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": unknown record kind '" + kind + "'");
    }
  }
  if (!saw_header) fail(ErrorCode::ParseError, "line 1: missing header record");

  PropertyGraph g(directed);
  for (auto& v : vertices) g.add_vertex(std::move(v));
  for (auto& e : edges) g.add_edge(std::move(e));
  g.freeze();
  return g;
}

/// Writes the canonical form: header, then vertices and edges in ascending
/// id order, object keys sorted, reals rendered with shortest round-trip
/// decimals.
inline void save_lpg_jsonl(const PropertyGraph& graph, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path);
  using nlohmann::json;

  json header{{"kind", "header"}, {"version", 1}, {"directed", graph.directed()}};
  out << header.dump() << '\n';

  std::vector<const Vertex*> vs;
  vs.reserve(graph.vertex_count());
  for (const auto& v : graph.vertices()) vs.push_back(&v);
  std::sort(vs.begin(), vs.end(), [](const Vertex* a, const Vertex* b) { return a->id < b->id; });
  for (const Vertex* v : vs) {
    json j{{"kind", "vertex"}, {"id", v->id}, {"labels", json(v->labels)}, {"props", detail::props_to_json(v->properties)}};
    out << j.dump() << '\n';
  }

  std::vector<const Edge*> es;
  es.reserve(graph.edge_count());
  for (const auto& e : graph.edges()) es.push_back(&e);
  std::sort(es.begin(), es.end(), [](const Edge* a, const Edge* b) { return a->id < b->id; });
  for (const Edge* e : es) {
    json j{{"kind", "edge"}, {"id", e->id},      {"src", e->src},
           {"dst", e->dst},  {"labels", json(e->labels)}, {"props", detail::props_to_json(e->properties)}};
    out << j.dump() << '\n';
  }
  if (!out) fail(ErrorCode::IoError, "write failed for " + path);
}

}  // namespace lpgkit
