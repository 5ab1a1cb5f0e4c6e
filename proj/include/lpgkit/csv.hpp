#pragma once

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "lpgkit/error.hpp"
#include "lpgkit/graph.hpp"

namespace lpgkit {

namespace detail {

// Minimal RFC-4180-style reader: quoted fields may contain commas, newlines
// and doubled quotes. Returns one record per call; false at end of stream.
inline bool read_csv_record(std::istream& in, std::vector<std::string>& out) {
  out.clear();
  std::string field;
  bool in_quotes = false;
  bool any = false;
  int c;
  while ((c = in.get()) != EOF) {
    any = true;
    const char ch = static_cast<char>(c);
    if (in_quotes) {
      if (ch == '"') {
        if (in.peek() == '"') {
          in.get();
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(ch);
      }
    } else if (ch == '"') {
      in_quotes = true;
    } else if (ch == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else if (ch == '\n') {
      break;
    } else if (ch == '\r') {
      // swallow; \r\n handled when the \n arrives
    } else {
      field.push_back(ch);
    }
  }
  if (!any) return false;
  out.push_back(std::move(field));
  return true;
}

inline std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> parts;
  size_t start = 0;
  for (size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      parts.push_back(s.substr(start, i - start));
      start = i + 1;
    }
  }
  return parts;
}

inline int64_t parse_int_cell(const std::string& s, const std::string& where) {
  int64_t value = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), value);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    fail(ErrorCode::ParseError, where + ": bad integer '" + s + "'");
  }
  return value;
}

inline uint64_t parse_id_cell(const std::string& s, const std::string& where) {
  uint64_t value = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), value);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    fail(ErrorCode::ParseError, where + ": bad id '" + s + "'");
  }
  return value;
}

inline double parse_real_cell(const std::string& s, const std::string& where) {
  char* end = nullptr;
  const double value = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || s.empty()) {
    fail(ErrorCode::ParseError, where + ": bad real '" + s + "'");
  }
  return value;
}

inline bool parse_bool_cell(const std::string& s, const std::string& where) {
  if (s == "true" || s == "True" || s == "TRUE" || s == "1") return true;
  if (s == "false" || s == "False" || s == "FALSE" || s == "0") return false;
  fail(ErrorCode::ParseError, where + ": bad boolean '" + s + "'");
}

struct CsvColumnRole {
  enum Kind { Id, Src, Dst, Labels, PropInt, PropReal, PropBool, PropText, PropRealVec } kind;
};

inline CsvColumnRole parse_role(const std::string& role, const std::string& column) {
  if (role == "id") return {CsvColumnRole::Id};
  if (role == "src") return {CsvColumnRole::Src};
  if (role == "dst") return {CsvColumnRole::Dst};
  if (role == "labels") return {CsvColumnRole::Labels};
  if (role == "prop:int") return {CsvColumnRole::PropInt};
  if (role == "prop:real") return {CsvColumnRole::PropReal};
  if (role == "prop:bool") return {CsvColumnRole::PropBool};
  if (role == "prop:text") return {CsvColumnRole::PropText};
  if (role == "prop:realvec") return {CsvColumnRole::PropRealVec};
  fail(ErrorCode::ManifestMismatch, "column '" + column + "' has unknown role '" + role + "'");
}

// Applies one cell to an entity. Empty cells mean "value absent".
template <typename Entity>
void apply_cell(Entity& ent, const std::string& column, CsvColumnRole role, const std::string& cell,
                const std::string& where) {
  if (cell.empty()) return;
  switch (role.kind) {
    case CsvColumnRole::Labels:
      for (auto& l : split_on(cell, ';')) {
        if (!l.empty()) ent.labels.insert(l);
      }
      break;
    case CsvColumnRole::PropInt:
      ent.add_property(column, PropertyValue::integer(parse_int_cell(cell, where)));
      break;
    case CsvColumnRole::PropReal:
      ent.add_property(column, PropertyValue::real(parse_real_cell(cell, where)));
      break;
    case CsvColumnRole::PropBool:
      ent.add_property(column, PropertyValue::boolean(parse_bool_cell(cell, where)));
      break;
    case CsvColumnRole::PropText:
      ent.add_property(column, PropertyValue::text(cell));
      break;
    case CsvColumnRole::PropRealVec: {
      std::vector<double> comps;
      for (auto& part : split_on(cell, ';')) comps.push_back(parse_real_cell(part, where));
      ent.add_property(column, PropertyValue::real_vector(std::move(comps)));
      break;
    }
    default:
      break;  // id/src/dst handled by the caller
  }
}

}  // namespace detail

/// Loads a node CSV + edge CSV pair described by a JSON manifest that maps
/// column names to roles (id, src, dst, labels, prop:int, prop:real,
/// prop:bool, prop:text, prop:realvec). Every column appearing in either
/// file must be covered by the manifest. Edge ids are optional; when the
/// edge file has no id column, edges are numbered by row order.
inline PropertyGraph load_lpg_csv(const std::string& nodes_path, const std::string& edges_path,
                                  const std::string& manifest_path, bool directed = false) {
  using nlohmann::json;
  std::ifstream mf(manifest_path);
  if (!mf) fail(ErrorCode::IoError, "cannot open " + manifest_path);
  json manifest = json::parse(mf, nullptr, false);
  if (manifest.is_discarded() || !manifest.is_object()) {
    fail(ErrorCode::ParseError, manifest_path + ": manifest must be a JSON object");
  }
  std::map<std::string, detail::CsvColumnRole> roles;
  for (const auto& [column, role] : manifest.items()) {
    if (!role.is_string()) fail(ErrorCode::ParseError, manifest_path + ": role for '" + column + "' must be a string");
    roles.emplace(column, detail::parse_role(role.get<std::string>(), column));
  }

  PropertyGraph g(directed);

  auto resolve_header = [&](const std::vector<std::string>& header, const std::string& path) {
    std::vector<detail::CsvColumnRole> out;
    for (const auto& column : header) {
      auto it = roles.find(column);
      if (it == roles.end()) {
        fail(ErrorCode::ManifestMismatch, path + ": column '" + column + "' not covered by manifest");
      }
      out.push_back(it->second);
    }
    return out;
  };

  {
    std::ifstream in(nodes_path);
    if (!in) fail(ErrorCode::IoError, "cannot open " + nodes_path);
    std::vector<std::string> record;
    if (!detail::read_csv_record(in, record)) fail(ErrorCode::ParseError, nodes_path + ": empty file");
    const std::vector<std::string> header = record;
    const auto header_roles = resolve_header(header, nodes_path);
    size_t id_col = header.size();
    for (size_t i = 0; i < header.size(); ++i) {
      if (header_roles[i].kind == detail::CsvColumnRole::Id) id_col = i;
    }
    if (id_col == header.size()) fail(ErrorCode::ManifestMismatch, nodes_path + ": no id column");
    size_t row = 1;
    while (detail::read_csv_record(in, record)) {
      ++row;
      const std::string where = nodes_path + ":" + std::to_string(row);
      if (record.size() != header.size()) fail(ErrorCode::ParseError, where + ": wrong field count");
      Vertex v;
      v.id = detail::parse_id_cell(record[id_col], where);
      for (size_t i = 0; i < header.size(); ++i) {
        if (i == id_col) continue;
        detail::apply_cell(v, header[i], header_roles[i], record[i], where);
      }
      g.add_vertex(std::move(v));
    }
  }

  {
    std::ifstream in(edges_path);
    if (!in) fail(ErrorCode::IoError, "cannot open " + edges_path);
    std::vector<std::string> record;
    if (!detail::read_csv_record(in, record)) fail(ErrorCode::ParseError, edges_path + ": empty file");
    const std::vector<std::string> header = record;
    const auto header_roles = resolve_header(header, edges_path);
    size_t id_col = header.size(), src_col = header.size(), dst_col = header.size();
    for (size_t i = 0; i < header.size(); ++i) {
      if (header_roles[i].kind == detail::CsvColumnRole::Id) id_col = i;
      if (header_roles[i].kind == detail::CsvColumnRole::Src) src_col = i;
      if (header_roles[i].kind == detail::CsvColumnRole::Dst) dst_col = i;
    }
    if (src_col == header.size() || dst_col == header.size()) {
      fail(ErrorCode::ManifestMismatch, edges_path + ": need src and dst columns");
    }
    size_t row = 1;
    uint64_t next_id = 0;
    while (detail::read_csv_record(in, record)) {
      ++row;
      const std::string where = edges_path + ":" + std::to_string(row);
      if (record.size() != header.size()) fail(ErrorCode::ParseError, where + ": wrong field count");
      Edge e;
      e.id = (id_col != header.size()) ? detail::parse_id_cell(record[id_col], where) : next_id++;
      e.src = detail::parse_id_cell(record[src_col], where);
      e.dst = detail::parse_id_cell(record[dst_col], where);
      for (size_t i = 0; i < header.size(); ++i) {
        if (i == id_col || i == src_col || i == dst_col) continue;
        detail::apply_cell(e, header[i], header_roles[i], record[i], where);
      }
      g.add_edge(std::move(e));
    }
  }

  g.freeze();
  return g;
}

}  // namespace lpgkit
