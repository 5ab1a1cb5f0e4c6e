#pragma once

#include <cstring>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

#include "lpgkit/adjacency.hpp"
#include "lpgkit/dense.hpp"
#include "lpgkit/error.hpp"
#include "lpgkit/layers.hpp"
#include "lpgkit/rng.hpp"

namespace lpgkit {

enum class GnnKind { Gcn, Gin, Gat };

inline const char* gnn_kind_name(GnnKind k) {
  switch (k) {
    case GnnKind::Gcn: return "gcn";
    case GnnKind::Gin: return "gin";
    case GnnKind::Gat: return "gat";
  }
  return "?";
}

inline GnnKind gnn_kind_from_name(const std::string& name) {
  if (name == "gcn") return GnnKind::Gcn;
  if (name == "gin") return GnnKind::Gin;
  if (name == "gat") return GnnKind::Gat;
  fail(ErrorCode::InvalidConfig, "unknown model kind '" + name + "' (expected gcn, gin or gat)");
}

struct ModelConfig {
  GnnKind kind = GnnKind::Gcn;
  size_t in_dim = 0;
  size_t hidden = 64;
  size_t out_dim = 0;
  size_t heads = 4;  // attention models only
};

/// Four-stage stack: preprocessing linear+PReLU, two message-passing layers,
/// postprocessing linear+PReLU. The attention layer activates internally, so
/// only the convolution and isomorphism stacks insert PReLUs between
/// message-passing layers.
class GnnModel {
 public:
  GnnModel() = default;

  GnnModel(const ModelConfig& cfg, Rng& rng) : cfg_(cfg), pre_(cfg.in_dim, cfg.hidden, rng) {
    if (cfg.in_dim == 0 || cfg.hidden == 0 || cfg.out_dim == 0) {
      fail(ErrorCode::InvalidConfig, "model dims must be positive");
    }
    g1_ = make_layer(rng);
    g2_ = make_layer(rng);
    post_ = LinearLayer(cfg.hidden, cfg.out_dim, rng);
  }

  const ModelConfig& config() const { return cfg_; }

  DenseMatrix forward(const NormalizedAdjacency& adj, const DenseMatrix& x) {
    detail::require_shape(x.cols == cfg_.in_dim, "model input width " + std::to_string(x.cols) + " vs " +
                                                     std::to_string(cfg_.in_dim));
    DenseMatrix h = act_pre_.forward(pre_.forward(x));
    h = std::visit([&](auto& layer) { return layer.forward(adj, h); }, g1_);
    if (cfg_.kind != GnnKind::Gat) h = act1_.forward(h);
    h = std::visit([&](auto& layer) { return layer.forward(adj, h); }, g2_);
    if (cfg_.kind != GnnKind::Gat) h = act2_.forward(h);
    has_cache_ = true;
    return act_post_.forward(post_.forward(h));
  }

  /// Fills every parameter's gradient buffer and returns the gradient with
  /// respect to the forward input.
  DenseMatrix backward(const DenseMatrix& g) {
    if (!has_cache_) fail(ErrorCode::NoForwardCache, "model backward before forward");
    DenseMatrix d = post_.backward(act_post_.backward(g));
    if (cfg_.kind != GnnKind::Gat) d = act2_.backward(d);
    d = std::visit([&](auto& layer) { return layer.backward(d); }, g2_);
    if (cfg_.kind != GnnKind::Gat) d = act1_.backward(d);
    d = std::visit([&](auto& layer) { return layer.backward(d); }, g1_);
    return pre_.backward(act_pre_.backward(d));
  }

  /// Fixed enumeration order; optimizer state and checkpoints key off it.
  std::vector<ParamRef> params() {
    std::vector<ParamRef> out;
    pre_.collect_params("pre", out);
    act_pre_.collect_params("act_pre", out);
    std::visit([&](auto& layer) { layer.collect_params("gnn1", out); }, g1_);
    if (cfg_.kind != GnnKind::Gat) act1_.collect_params("act1", out);
    std::visit([&](auto& layer) { layer.collect_params("gnn2", out); }, g2_);
    if (cfg_.kind != GnnKind::Gat) act2_.collect_params("act2", out);
    post_.collect_params("post", out);
    act_post_.collect_params("act_post", out);
    return out;
  }

  void zero_grads() {
    for (auto& p : params()) std::fill(p.grad, p.grad + p.size, 0.0);
  }

  // Access to the attention layers' coefficients for inspection.
  const GatLayer* attention_layer(size_t which) const {
    const auto* v = which == 0 ? &g1_ : &g2_;
    return std::get_if<GatLayer>(v);
  }

 private:
  using GnnLayer = std::variant<GcnLayer, GinLayer, GatLayer>;

  GnnLayer make_layer(Rng& rng) {
    switch (cfg_.kind) {
      case GnnKind::Gcn: return GcnLayer(cfg_.hidden, cfg_.hidden, rng);
      case GnnKind::Gin: return GinLayer(cfg_.hidden, cfg_.hidden, rng);
      case GnnKind::Gat: return GatLayer(cfg_.hidden, cfg_.hidden, cfg_.heads, rng);
    }
    fail(ErrorCode::InvalidConfig, "unreachable model kind");
  }

  ModelConfig cfg_;
  LinearLayer pre_;
  PReluLayer act_pre_;
  GnnLayer g1_, g2_;
  PReluLayer act1_, act2_;
  LinearLayer post_;
  PReluLayer act_post_;
  bool has_cache_ = false;
};

/// Snapshot/restore of the raw parameter values in enumeration order; used
/// for best-epoch bookkeeping during training.
inline std::vector<std::vector<double>> snapshot_params(GnnModel& model) {
  std::vector<std::vector<double>> out;
  for (const auto& p : model.params()) out.emplace_back(p.value, p.value + p.size);
  return out;
}

inline void restore_params(GnnModel& model, const std::vector<std::vector<double>>& snapshot) {
  auto params = model.params();
  if (params.size() != snapshot.size()) fail(ErrorCode::ShapeMismatch, "parameter snapshot layout mismatch");
  for (size_t i = 0; i < params.size(); ++i) {
    if (params[i].size != snapshot[i].size()) fail(ErrorCode::ShapeMismatch, "parameter snapshot size mismatch");
    std::copy(snapshot[i].begin(), snapshot[i].end(), params[i].value);
  }
}

// ---- checkpoint container ----
// {magic "LPGM", version, schema digest, model config, parameter blobs}; the
// digest ties a checkpoint to the exact feature layout it was trained on.

inline void save_model(GnnModel& model, uint64_t schema_digest, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path);
  out.write("LPGM", 4);
  detail::write_raw<uint32_t>(out, 1);
  detail::write_raw<uint64_t>(out, schema_digest);
  const ModelConfig& cfg = model.config();
  detail::write_raw<uint32_t>(out, static_cast<uint32_t>(cfg.kind));
  detail::write_raw<uint64_t>(out, cfg.in_dim);
  detail::write_raw<uint64_t>(out, cfg.hidden);
  detail::write_raw<uint64_t>(out, cfg.out_dim);
  detail::write_raw<uint64_t>(out, cfg.heads);
  const auto params = model.params();
  detail::write_raw<uint64_t>(out, params.size());
  for (const auto& p : params) {
    detail::write_raw<uint64_t>(out, p.size);
    out.write(reinterpret_cast<const char*>(p.value), static_cast<std::streamsize>(p.size * sizeof(double)));
  }
  if (!out) fail(ErrorCode::IoError, "write failed for " + path);
}

struct LoadedModel {
  GnnModel model;
  uint64_t schema_digest = 0;
};

inline LoadedModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path);
  char magic[4] = {};
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "LPGM", 4) != 0) fail(ErrorCode::ParseError, path + ": not a model checkpoint");
  if (detail::read_raw<uint32_t>(in) != 1) fail(ErrorCode::ParseError, path + ": unsupported checkpoint version");
  LoadedModel loaded;
  loaded.schema_digest = detail::read_raw<uint64_t>(in);
  ModelConfig cfg;
  const uint32_t kind = detail::read_raw<uint32_t>(in);
  if (kind > 2) fail(ErrorCode::ParseError, path + ": bad model kind");
  cfg.kind = static_cast<GnnKind>(kind);
  cfg.in_dim = detail::read_raw<uint64_t>(in);
  cfg.hidden = detail::read_raw<uint64_t>(in);
  cfg.out_dim = detail::read_raw<uint64_t>(in);
  cfg.heads = detail::read_raw<uint64_t>(in);
  Rng rng(0);  // parameters are overwritten below; the init values never leak
  loaded.model = GnnModel(cfg, rng);
  const uint64_t n_params = detail::read_raw<uint64_t>(in);
  auto params = loaded.model.params();
  if (n_params != params.size()) fail(ErrorCode::ParseError, path + ": parameter table mismatch");
  for (auto& p : params) {
    const uint64_t size = detail::read_raw<uint64_t>(in);
    if (size != p.size) fail(ErrorCode::ParseError, path + ": parameter blob size mismatch for " + p.name);
    in.read(reinterpret_cast<char*>(p.value), static_cast<std::streamsize>(size * sizeof(double)));
  }
  if (!in) fail(ErrorCode::ParseError, path + ": truncated checkpoint");
  return loaded;
}

}  // namespace lpgkit
