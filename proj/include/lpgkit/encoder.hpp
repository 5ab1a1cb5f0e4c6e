#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "lpgkit/error.hpp"
#include "lpgkit/graph.hpp"
#include "lpgkit/rng.hpp"
#include "lpgkit/schema.hpp"

namespace lpgkit {

/// Dense row-major feature matrix with a row-index -> entity-id map.
struct FeatureMatrix {
  size_t rows = 0;
  size_t cols = 0;
  std::vector<double> values;  // rows * cols, row-major
  std::vector<uint64_t> ids;   // row index -> entity id

  FeatureMatrix() = default;
  FeatureMatrix(size_t r, size_t c) : rows(r), cols(c), values(r * c, 0.0), ids(r, 0) {}

  double& at(size_t r, size_t c) { return values[r * cols + c]; }
  double at(size_t r, size_t c) const { return values[r * cols + c]; }
  double* row(size_t r) { return values.data() + r * cols; }
  const double* row(size_t r) const { return values.data() + r * cols; }
};

namespace detail {

// ASCII-lowercased tokens; token characters are ASCII alphanumerics plus any
// byte >= 0x80, so multi-byte UTF-8 sequences stay intact and ASCII
// whitespace/punctuation separates tokens.
inline std::vector<std::string> tokenize_text(const std::string& text) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char ch : text) {
    const bool token_char = (ch >= 0x80) || (ch >= '0' && ch <= '9') || (ch >= 'a' && ch <= 'z') ||
                            (ch >= 'A' && ch <= 'Z');
    if (token_char) {
      current.push_back((ch >= 'A' && ch <= 'Z') ? static_cast<char>(ch - 'A' + 'a') : static_cast<char>(ch));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

inline void l2_normalize(double* block, size_t width) {
  double norm_sq = 0.0;
  for (size_t i = 0; i < width; ++i) norm_sq += block[i] * block[i];
  if (norm_sq > 0.0) {
    const double inv = 1.0 / std::sqrt(norm_sq);
    for (size_t i = 0; i < width; ++i) block[i] *= inv;
  }
}

inline void encode_into(const EncodingSchema& schema, const LabelSet& labels, const PropertyMap& props,
                        double* out) {
  std::fill(out, out + schema.total_dim, 0.0);

  for (const auto& label : labels) {
    const auto it = std::lower_bound(schema.label_order.begin(), schema.label_order.end(), label);
    if (it != schema.label_order.end() && *it == label) {
      out[static_cast<size_t>(it - schema.label_order.begin())] = 1.0;
    }
    // labels unseen at schema time are dropped
  }

  for (const auto& spec : schema.property_order) {
    const auto pit = props.find(spec.key);
    if (pit == props.end()) continue;  // missing key stays a zero block
    const std::vector<PropertyValue>& values = pit->second;
    double* block = out + spec.offset;

    switch (spec.kind) {
      case EncoderKind::Categorical: {
        // element-wise max of the per-value one-hots; out-of-vocab values
        // contribute nothing
        for (const auto& v : values) {
          const auto it = std::lower_bound(spec.vocab.begin(), spec.vocab.end(), v);
          if (it != spec.vocab.end() && *it == v) {
            block[static_cast<size_t>(it - spec.vocab.begin())] = 1.0;
          }
        }
        break;
      }
      case EncoderKind::Scalar: {
        double sum = 0.0;
        size_t count = 0;
        for (const auto& v : values) {
          if (v.kind() == ValueKind::Integer || v.kind() == ValueKind::Real) {
            sum += v.as_number();
            ++count;
          }
        }
        if (count == 0) break;
        double t;
        if (spec.min == spec.max) {
          t = 0.5;  // degenerate range: midpoint, never divide by zero
        } else {
          t = std::clamp((sum / static_cast<double>(count) - spec.min) / (spec.max - spec.min), 0.0, 1.0);
        }
        if (spec.bins == 0) {
          block[0] = t;
        } else {
          const size_t bin = std::min(spec.bins - 1, static_cast<size_t>(t * static_cast<double>(spec.bins)));
          block[bin] = 1.0;
        }
        break;
      }
      case EncoderKind::NumericVector: {
        size_t count = 0;
        for (const auto& v : values) {
          if (v.kind() != ValueKind::RealVector) continue;
          const auto& comps = v.as_real_vector();
          if (comps.size() != spec.dim) continue;
          for (size_t c = 0; c < spec.dim; ++c) {
            block[c] += (comps[c] - spec.mean[c]) / std::max(spec.std_dev[c], 1e-12);
          }
          ++count;
        }
        if (count > 1) {
          for (size_t c = 0; c < spec.dim; ++c) block[c] /= static_cast<double>(count);
        }
        l2_normalize(block, spec.dim);
        break;
      }
      case EncoderKind::HashedText: {
        for (const auto& v : values) {
          if (v.kind() != ValueKind::Text) continue;
          for (const auto& token : tokenize_text(v.as_text())) {
            const uint64_t h = fnv1a64(token);
            const size_t bucket = static_cast<size_t>(h % spec.dim);
            block[bucket] += (h >> 63) ? -1.0 : 1.0;
          }
        }
        l2_normalize(block, spec.dim);
        break;
      }
    }
  }
}

}  // namespace detail

inline std::vector<double> encode_entity(const EncodingSchema& schema, const Vertex& v) {
  if (schema.entity_kind != EntityKind::Vertex) {
    fail(ErrorCode::SchemaMismatch, "vertex encoded against an edge schema");
  }
  std::vector<double> out(schema.total_dim, 0.0);
  detail::encode_into(schema, v.labels, v.properties, out.data());
  return out;
}

inline std::vector<double> encode_entity(const EncodingSchema& schema, const Edge& e) {
  if (schema.entity_kind != EntityKind::Edge) {
    fail(ErrorCode::SchemaMismatch, "edge encoded against a vertex schema");
  }
  std::vector<double> out(schema.total_dim, 0.0);
  detail::encode_into(schema, e.labels, e.properties, out.data());
  return out;
}

/// Feature matrix over all vertices, rows in ascending vertex-id order.
inline FeatureMatrix encode_vertices(const EncodingSchema& schema, const PropertyGraph& graph) {
  if (!graph.frozen()) fail(ErrorCode::NotFrozen, "encode_vertices needs a frozen graph");
  if (schema.entity_kind != EntityKind::Vertex) {
    fail(ErrorCode::SchemaMismatch, "encode_vertices needs a vertex schema");
  }
  FeatureMatrix fm(graph.vertex_count(), schema.total_dim);
  size_t r = 0;
  for (const auto& v : graph.vertices()) {
    fm.ids[r] = v.id;
    detail::encode_into(schema, v.labels, v.properties, fm.row(r));
    ++r;
  }
  return fm;
}

inline FeatureMatrix encode_edges(const EncodingSchema& schema, const PropertyGraph& graph) {
  if (!graph.frozen()) fail(ErrorCode::NotFrozen, "encode_edges needs a frozen graph");
  if (schema.entity_kind != EntityKind::Edge) {
    fail(ErrorCode::SchemaMismatch, "encode_edges needs an edge schema");
  }
  FeatureMatrix fm(graph.edge_count(), schema.total_dim);
  size_t r = 0;
  for (const auto& e : graph.edges()) {
    fm.ids[r] = e.id;
    detail::encode_into(schema, e.labels, e.properties, fm.row(r));
    ++r;
  }
  return fm;
}

inline std::pair<FeatureMatrix, FeatureMatrix> encode_graph(const EncodingSchema& schema_v,
                                                            const EncodingSchema& schema_e,
                                                            const PropertyGraph& graph) {
  return {encode_vertices(schema_v, graph), encode_edges(schema_e, graph)};
}

/// Column-wise concatenation with the encoded block first; lets callers bolt
/// on positional or externally computed features.
inline FeatureMatrix augment_features(const FeatureMatrix& fm, const std::vector<std::vector<double>>& extra) {
  if (extra.size() != fm.rows) {
    fail(ErrorCode::RowMismatch, "feature matrix has " + std::to_string(fm.rows) + " rows, extra has " +
                                     std::to_string(extra.size()));
  }
  const size_t extra_cols = fm.rows == 0 ? 0 : extra.front().size();
  for (const auto& row : extra) {
    if (row.size() != extra_cols) fail(ErrorCode::ShapeMismatch, "extra feature rows have uneven widths");
  }
  FeatureMatrix out(fm.rows, fm.cols + extra_cols);
  out.ids = fm.ids;
  for (size_t r = 0; r < fm.rows; ++r) {
    std::copy(fm.row(r), fm.row(r) + fm.cols, out.row(r));
    std::copy(extra[r].begin(), extra[r].end(), out.row(r) + fm.cols);
  }
  return out;
}

// Flat binary container: magic, version, shape, then row-major
// little-endian doubles. Entity ids ride in a text sidecar next to it.
namespace detail {

static_assert(std::endian::native == std::endian::little, "feature files assume a little-endian host");

template <typename T>
void write_raw(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_raw(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  return value;
}

}  // namespace detail

inline std::string feature_sidecar_path(const std::string& path) { return path + ".ids"; }

inline void save_features(const FeatureMatrix& fm, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path);
  out.write("LPGF", 4);
  detail::write_raw<uint32_t>(out, 1);
  detail::write_raw<uint64_t>(out, fm.rows);
  detail::write_raw<uint64_t>(out, fm.cols);
  out.write(reinterpret_cast<const char*>(fm.values.data()),
            static_cast<std::streamsize>(fm.values.size() * sizeof(double)));
  if (!out) fail(ErrorCode::IoError, "write failed for " + path);

  std::ofstream ids(feature_sidecar_path(path));
  if (!ids) fail(ErrorCode::IoError, "cannot write " + feature_sidecar_path(path));
  for (uint64_t id : fm.ids) ids << id << '\n';
  if (!ids) fail(ErrorCode::IoError, "write failed for " + feature_sidecar_path(path));
}

inline FeatureMatrix load_features(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path);
  char magic[4] = {};
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "LPGF", 4) != 0) fail(ErrorCode::ParseError, path + ": not a feature file");
  const uint32_t version = detail::read_raw<uint32_t>(in);
  if (version != 1) fail(ErrorCode::ParseError, path + ": unsupported feature file version");
  const uint64_t rows = detail::read_raw<uint64_t>(in);
  const uint64_t cols = detail::read_raw<uint64_t>(in);
  FeatureMatrix fm(rows, cols);
  in.read(reinterpret_cast<char*>(fm.values.data()), static_cast<std::streamsize>(rows * cols * sizeof(double)));
  if (!in) fail(ErrorCode::ParseError, path + ": truncated feature file");

  std::ifstream ids(feature_sidecar_path(path));
  if (!ids) fail(ErrorCode::IoError, "cannot open " + feature_sidecar_path(path));
  for (size_t r = 0; r < rows; ++r) {
    if (!(ids >> fm.ids[r])) fail(ErrorCode::ParseError, feature_sidecar_path(path) + ": truncated id map");
  }
  return fm;
}

}  // namespace lpgkit
