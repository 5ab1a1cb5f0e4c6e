#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "lpgkit/error.hpp"
#include "lpgkit/graph.hpp"
#include "lpgkit/rng.hpp"
#include "lpgkit/splits.hpp"

namespace lpgkit {

enum class EntityKind { Vertex, Edge };

inline const char* entity_kind_name(EntityKind k) { return k == EntityKind::Vertex ? "vertex" : "edge"; }

enum class EncoderKind { Categorical, Scalar, NumericVector, HashedText };

inline const char* encoder_kind_name(EncoderKind k) {
  switch (k) {
    case EncoderKind::Categorical: return "categorical";
    case EncoderKind::Scalar: return "scalar";
    case EncoderKind::NumericVector: return "numeric_vector";
    case EncoderKind::HashedText: return "hashed_text";
  }
  return "?";
}

/// How one property key maps to a block of feature columns.
struct PropertyEncoderSpec {
  std::string key;
  EncoderKind kind = EncoderKind::Scalar;
  std::vector<PropertyValue> vocab;  // Categorical: canonical value order
  double min = 0.0;                  // Scalar
  double max = 0.0;
  size_t bins = 0;   // Scalar: 0 keeps the [0,1] value, B>0 one-hots over B equal-width bins
  size_t dim = 0;    // NumericVector / HashedText block width
  std::vector<double> mean;  // NumericVector, per component
  std::vector<double> std_dev;
  size_t offset = 0;  // starting column in the assembled vector

  size_t block_width() const {
    switch (kind) {
      case EncoderKind::Categorical: return vocab.size();
      case EncoderKind::Scalar: return bins == 0 ? 1 : bins;
      case EncoderKind::NumericVector: return dim;
      case EncoderKind::HashedText: return dim;
    }
    return 0;
  }
};

struct SchemaOptions {
  size_t categorical_threshold = 32;  // max distinct values for one-hot treatment
  size_t hashed_text_dim = 64;
  bool integers_as_categorical = true;   // small distinct integer keys become one-hot
  bool coerce_integer_to_real = true;    // mixed int/real keys promote to real
  size_t discretize_scalars = 0;         // 0 = continuous [0,1]; B>0 = one-hot bins
  bool appendix_layout = false;          // move hashed-text blocks after everything else
};

/// Frozen feature layout: label columns first, then one block per property
/// key. Fixes the dimensionality and column meaning for a whole experiment.
struct EncodingSchema {
  EntityKind entity_kind = EntityKind::Vertex;
  std::vector<std::string> label_order;
  std::vector<PropertyEncoderSpec> property_order;
  size_t total_dim = 0;

  size_t label_block_width() const { return label_order.size(); }

  void recompute_offsets() {
    size_t off = label_order.size();
    for (auto& spec : property_order) {
      spec.offset = off;
      off += spec.block_width();
    }
    total_dim = off;
  }

  const PropertyEncoderSpec* find_key(const std::string& key) const {
    for (const auto& spec : property_order) {
      if (spec.key == key) return &spec;
    }
    return nullptr;
  }

  // Names addressable by restrict_schema: labels and property keys.
  std::set<std::string> block_names() const {
    std::set<std::string> names(label_order.begin(), label_order.end());
    for (const auto& spec : property_order) names.insert(spec.key);
    return names;
  }
};

namespace detail {

struct KeyObservations {
  bool saw_integer = false, saw_real = false, saw_boolean = false, saw_text = false, saw_vector = false;
  std::set<PropertyValue> distinct;
  size_t vector_dim = 0;
  bool vector_dim_set = false;
};

// Tagged value serialization for schema documents; tags keep the
// integer/real distinction that bare JSON numbers would blur.
inline nlohmann::json tagged_value(const PropertyValue& v) {
  nlohmann::json j;
  switch (v.kind()) {
    case ValueKind::Integer: j["t"] = "int"; j["v"] = v.as_integer(); break;
    case ValueKind::Real: j["t"] = "real"; j["v"] = v.as_real(); break;
    case ValueKind::Boolean: j["t"] = "bool"; j["v"] = v.as_boolean(); break;
    case ValueKind::Text: j["t"] = "text"; j["v"] = v.as_text(); break;
    case ValueKind::RealVector: j["t"] = "vec"; j["v"] = v.as_real_vector(); break;
  }
  return j;
}

inline PropertyValue untagged_value(const nlohmann::json& j) {
  const std::string t = j.value("t", "");
  if (t == "int") return PropertyValue::integer(j.at("v").get<int64_t>());
  if (t == "real") return PropertyValue::real(j.at("v").get<double>());
  if (t == "bool") return PropertyValue::boolean(j.at("v").get<bool>());
  if (t == "text") return PropertyValue::text(j.at("v").get<std::string>());
  if (t == "vec") return PropertyValue::real_vector(j.at("v").get<std::vector<double>>());
  fail(ErrorCode::ParseError, "unknown tagged value type '" + t + "'");
}

}  // namespace detail

/// Derives the feature layout from a frozen graph. Labels and property keys
/// sort in UTF-8 byte order; distinct-value counts and vocabularies come
/// from the full entity set, while scalar min/max and vector mean/std use
/// only training vertices when split masks are supplied.
inline EncodingSchema infer_schema(const PropertyGraph& graph, EntityKind entity_kind,
                                   const SchemaOptions& options = {}, const SplitMasks* train_stats = nullptr) {
  if (!graph.frozen()) fail(ErrorCode::NotFrozen, "infer_schema needs a frozen graph");

  // Collect the entity view once so vertex/edge code paths stay identical.
  struct EntityView {
    const LabelSet* labels;
    const PropertyMap* properties;
    bool in_train;
  };
  std::vector<EntityView> entities;
  auto in_train_vertex = [&](VertexId id) { return train_stats == nullptr || train_stats->train.count(id) > 0; };
  if (entity_kind == EntityKind::Vertex) {
    for (const auto& v : graph.vertices()) entities.push_back({&v.labels, &v.properties, in_train_vertex(v.id)});
  } else {
    for (const auto& e : graph.edges()) {
      entities.push_back({&e.labels, &e.properties, in_train_vertex(e.src) && in_train_vertex(e.dst)});
    }
  }
  if (entities.empty()) {
    fail(ErrorCode::EmptyGraph, std::string("no ") + entity_kind_name(entity_kind) + " entities to infer from");
  }

  EncodingSchema schema;
  schema.entity_kind = entity_kind;

  std::set<std::string> labels;
  for (const auto& ent : entities) labels.insert(ent.labels->begin(), ent.labels->end());
  schema.label_order.assign(labels.begin(), labels.end());

  // First pass: what kinds and values does each key carry?
  std::map<std::string, detail::KeyObservations> observations;
  for (const auto& ent : entities) {
    for (const auto& [key, values] : *ent.properties) {
      auto& obs = observations[key];
      for (const auto& v : values) {
        switch (v.kind()) {
          case ValueKind::Integer: obs.saw_integer = true; break;
          case ValueKind::Real: obs.saw_real = true; break;
          case ValueKind::Boolean: obs.saw_boolean = true; break;
          case ValueKind::Text: obs.saw_text = true; break;
          case ValueKind::RealVector: {
            obs.saw_vector = true;
            const size_t dim = v.as_real_vector().size();
            if (!obs.vector_dim_set) {
              obs.vector_dim = dim;
              obs.vector_dim_set = true;
            } else if (obs.vector_dim != dim) {
              fail(ErrorCode::RaggedVector, "key '" + key + "' mixes vector dims " + std::to_string(obs.vector_dim) +
                                                " and " + std::to_string(dim));
            }
            break;
          }
        }
        obs.distinct.insert(v);
      }
    }
  }

  // Second pass per key: resolve the encoder kind, then fill statistics.
  for (const auto& [key, obs] : observations) {
    const int kind_count = int(obs.saw_integer || obs.saw_real) + int(obs.saw_boolean) + int(obs.saw_text) +
                           int(obs.saw_vector);
    if (kind_count > 1) fail(ErrorCode::MixedKinds, "key '" + key + "' mixes incompatible value kinds");
    if (obs.saw_integer && obs.saw_real && !options.coerce_integer_to_real) {
      fail(ErrorCode::MixedKinds, "key '" + key + "' mixes integer and real values");
    }

    PropertyEncoderSpec spec;
    spec.key = key;

    if (obs.saw_boolean) {
      spec.kind = EncoderKind::Categorical;
      spec.vocab.assign(obs.distinct.begin(), obs.distinct.end());
    } else if (obs.saw_text) {
      if (obs.distinct.size() <= options.categorical_threshold) {
        spec.kind = EncoderKind::Categorical;
        spec.vocab.assign(obs.distinct.begin(), obs.distinct.end());
      } else {
        spec.kind = EncoderKind::HashedText;
        spec.dim = options.hashed_text_dim;
      }
    } else if (obs.saw_vector) {
      spec.kind = EncoderKind::NumericVector;
      spec.dim = obs.vector_dim;
      spec.mean.assign(spec.dim, 0.0);
      spec.std_dev.assign(spec.dim, 0.0);
      size_t count = 0;
      for (const auto& ent : entities) {
        if (!ent.in_train) continue;
        auto it = ent.properties->find(key);
        if (it == ent.properties->end()) continue;
        for (const auto& v : it->second) {
          const auto& comps = v.as_real_vector();
          for (size_t c = 0; c < spec.dim; ++c) spec.mean[c] += comps[c];
          ++count;
        }
      }
      if (count > 0) {
        for (auto& m : spec.mean) m /= static_cast<double>(count);
        for (const auto& ent : entities) {
          if (!ent.in_train) continue;
          auto it = ent.properties->find(key);
          if (it == ent.properties->end()) continue;
          for (const auto& v : it->second) {
            const auto& comps = v.as_real_vector();
            for (size_t c = 0; c < spec.dim; ++c) {
              const double delta = comps[c] - spec.mean[c];
              spec.std_dev[c] += delta * delta;
            }
          }
        }
        for (auto& s : spec.std_dev) s = std::sqrt(s / static_cast<double>(count));
      }
    } else if (obs.saw_integer && !obs.saw_real && options.integers_as_categorical &&
               obs.distinct.size() <= options.categorical_threshold) {
      spec.kind = EncoderKind::Categorical;
      spec.vocab.assign(obs.distinct.begin(), obs.distinct.end());
    } else {
      spec.kind = EncoderKind::Scalar;
      spec.bins = options.discretize_scalars;
      bool first = true;
      for (const auto& ent : entities) {
        if (!ent.in_train) continue;
        auto it = ent.properties->find(key);
        if (it == ent.properties->end()) continue;
        for (const auto& v : it->second) {
          const double x = v.as_number();
          if (first) {
            spec.min = spec.max = x;
            first = false;
          } else {
            spec.min = std::min(spec.min, x);
            spec.max = std::max(spec.max, x);
          }
        }
      }
    }
    schema.property_order.push_back(std::move(spec));
  }

  if (options.appendix_layout) {
    // Hashed-text blocks trail all other blocks; byte order survives inside
    // each group.
    std::stable_partition(schema.property_order.begin(), schema.property_order.end(),
                          [](const PropertyEncoderSpec& s) { return s.kind != EncoderKind::HashedText; });
  }
  schema.recompute_offsets();
  return schema;
}

/// Keeps only the named label columns and property blocks; survivor order is
/// unchanged and offsets close ranks. The empty include set yields the
/// structure-only zero-width schema.
inline EncodingSchema restrict_schema(const EncodingSchema& schema, const std::set<std::string>& include) {
  const auto known = schema.block_names();
  for (const auto& name : include) {
    if (known.count(name) == 0) fail(ErrorCode::UnknownName, "schema has no block named '" + name + "'");
  }
  EncodingSchema out;
  out.entity_kind = schema.entity_kind;
  for (const auto& label : schema.label_order) {
    if (include.count(label) > 0) out.label_order.push_back(label);
  }
  for (const auto& spec : schema.property_order) {
    if (include.count(spec.key) > 0) out.property_order.push_back(spec);
  }
  out.recompute_offsets();
  return out;
}

inline nlohmann::json schema_to_json(const EncodingSchema& schema) {
  nlohmann::json j;
  j["entity_kind"] = entity_kind_name(schema.entity_kind);
  j["label_order"] = schema.label_order;
  j["total_dim"] = schema.total_dim;
  nlohmann::json blocks = nlohmann::json::array();
  for (const auto& spec : schema.property_order) {
    nlohmann::json b;
    b["key"] = spec.key;
    b["kind"] = encoder_kind_name(spec.kind);
    b["offset"] = spec.offset;
    b["width"] = spec.block_width();
    switch (spec.kind) {
      case EncoderKind::Categorical: {
        nlohmann::json vocab = nlohmann::json::array();
        for (const auto& v : spec.vocab) vocab.push_back(detail::tagged_value(v));
        b["vocab"] = std::move(vocab);
        break;
      }
      case EncoderKind::Scalar:
        b["min"] = spec.min;
        b["max"] = spec.max;
        b["bins"] = spec.bins;
        break;
      case EncoderKind::NumericVector:
        b["dim"] = spec.dim;
        b["mean"] = spec.mean;
        b["std"] = spec.std_dev;
        break;
      case EncoderKind::HashedText:
        b["dim"] = spec.dim;
        b["hash"] = "fnv1a64";
        break;
    }
    blocks.push_back(std::move(b));
  }
  j["blocks"] = std::move(blocks);
  return j;
}

inline EncodingSchema schema_from_json(const nlohmann::json& j) {
  EncodingSchema schema;
  const std::string kind = j.value("entity_kind", "vertex");
  schema.entity_kind = (kind == "edge") ? EntityKind::Edge : EntityKind::Vertex;
  schema.label_order = j.at("label_order").get<std::vector<std::string>>();
  for (const auto& b : j.at("blocks")) {
    PropertyEncoderSpec spec;
    spec.key = b.at("key").get<std::string>();
    const std::string k = b.at("kind").get<std::string>();
    if (k == "categorical") {
      spec.kind = EncoderKind::Categorical;
      for (const auto& v : b.at("vocab")) spec.vocab.push_back(detail::untagged_value(v));
    } else if (k == "scalar") {
      spec.kind = EncoderKind::Scalar;
      spec.min = b.at("min").get<double>();
      spec.max = b.at("max").get<double>();
      spec.bins = b.value("bins", size_t{0});
    } else if (k == "numeric_vector") {
      spec.kind = EncoderKind::NumericVector;
      spec.dim = b.at("dim").get<size_t>();
      spec.mean = b.at("mean").get<std::vector<double>>();
      spec.std_dev = b.at("std").get<std::vector<double>>();
    } else if (k == "hashed_text") {
      spec.kind = EncoderKind::HashedText;
      spec.dim = b.at("dim").get<size_t>();
    } else {
      fail(ErrorCode::ParseError, "unknown encoder kind '" + k + "'");
    }
    schema.property_order.push_back(std::move(spec));
  }
  schema.recompute_offsets();
  const size_t recorded = j.value("total_dim", schema.total_dim);
  if (recorded != schema.total_dim) fail(ErrorCode::ParseError, "schema total_dim does not match its blocks");
  return schema;
}

/// Canonical serialized form (sorted keys, shortest round-trip reals) and a
/// digest over it; checkpoints store the digest to refuse mismatched inputs.
inline std::string schema_canonical_string(const EncodingSchema& schema) { return schema_to_json(schema).dump(); }

inline uint64_t schema_digest(const EncodingSchema& schema) { return fnv1a64(schema_canonical_string(schema)); }

}  // namespace lpgkit
