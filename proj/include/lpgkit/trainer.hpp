#pragma once

#include <algorithm>
#include <chrono>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "lpgkit/adjacency.hpp"
#include "lpgkit/dense.hpp"
#include "lpgkit/encoder.hpp"
#include "lpgkit/error.hpp"
#include "lpgkit/graph.hpp"
#include "lpgkit/loss.hpp"
#include "lpgkit/model.hpp"
#include "lpgkit/optim.hpp"
#include "lpgkit/rng.hpp"
#include "lpgkit/sampling.hpp"
#include "lpgkit/splits.hpp"
#include "lpgkit/textfmt.hpp"

namespace lpgkit {

enum class SamplerKind { FullBatch, NodeSubgraph };

struct TrainConfig {
  size_t epochs = 100;
  size_t batch_size = 32;  // parameter updates per epoch
  AdamConfig adam;         // lr0 = 0.01
  uint64_t seed = 0;
  SamplerKind sampler = SamplerKind::NodeSubgraph;
  size_t nodes_per_batch = 0;  // 0 = min(n, max(n/32, 256))
};

struct EpochRow {
  size_t epoch = 0;  // 1-based
  double lr = 0.0;
  double train_loss = 0.0;
  double val_metric = 0.0;
};

struct TrainReport {
  std::vector<EpochRow> epochs;
  size_t best_epoch = 0;
  double best_val_metric = 0.0;
  double test_metric = 0.0;
  double wall_seconds = 0.0;  // informational; kept out of serialized artifacts
};

struct TrainResult {
  GnnModel model;
  TrainReport report;
};

namespace detail {

// features rows are ascending-id; binary search resolves ids to rows.
inline size_t row_of_id(const FeatureMatrix& features, VertexId id) {
  const auto it = std::lower_bound(features.ids.begin(), features.ids.end(), id);
  if (it == features.ids.end() || *it != id) {
    fail(ErrorCode::UnknownVertex, "vertex " + std::to_string(id) + " has no feature row");
  }
  return static_cast<size_t>(it - features.ids.begin());
}

inline std::vector<size_t> rows_of_mask(const FeatureMatrix& features, const std::set<VertexId>& ids) {
  std::vector<size_t> rows;
  rows.reserve(ids.size());
  for (VertexId id : ids) rows.push_back(row_of_id(features, id));
  std::sort(rows.begin(), rows.end());
  return rows;
}

}  // namespace detail

inline double evaluate(GnnModel& model, const NormalizedAdjacency& adj, const DenseMatrix& x,
                       const Targets& targets, const std::vector<size_t>& mask) {
  return evaluate_metric(targets, model.forward(adj, x), mask);
}

/// The full optimization recipe: Adam with cosine-annealed learning rate,
/// a fixed number of node-subgraph updates per epoch, per-epoch validation,
/// and best-validation-epoch selection for the reported test metric.
/// Deterministic for a fixed seed; initialization and sampling draw from
/// separate streams so the full-batch and whole-graph-subgraph modes follow
/// identical trajectories.
inline TrainResult train(const PropertyGraph& graph, const FeatureMatrix& features, const Targets& targets,
                         const SplitMasks& splits, ModelConfig model_cfg, const TrainConfig& cfg) {
  const auto t_start = std::chrono::steady_clock::now();
  if (!graph.frozen()) fail(ErrorCode::NotFrozen, "training needs a frozen graph");
  if (features.rows != graph.vertex_count()) {
    fail(ErrorCode::RowMismatch, "feature rows do not cover the graph's vertices");
  }
  if (features.cols == 0) {
    fail(ErrorCode::InvalidConfig, "zero-width features; augment with a constant column first");
  }
  if (cfg.epochs < 1 || cfg.batch_size < 1) fail(ErrorCode::InvalidConfig, "epochs and batch_size must be >= 1");
  if (cfg.adam.lr0 < 0.0) fail(ErrorCode::InvalidConfig, "learning rate must be non-negative");
  if (targets.has.size() != features.rows) fail(ErrorCode::RowMismatch, "targets are not row-aligned");

  const size_t n = features.rows;
  const std::vector<size_t> train_rows = detail::rows_of_mask(features, splits.train);
  const std::vector<size_t> val_rows = detail::rows_of_mask(features, splits.val);
  const std::vector<size_t> test_rows = detail::rows_of_mask(features, splits.test);
  for (const auto* rows : {&train_rows, &val_rows, &test_rows}) {
    if (rows->empty()) fail(ErrorCode::EmptyMask, "every split must be non-empty");
    for (size_t r : *rows) {
      if (!targets.has[r]) fail(ErrorCode::UnknownTarget, "row " + std::to_string(r) + " in a split has no target");
    }
  }

  std::vector<uint8_t> in_train(n, 0);
  for (size_t r : train_rows) in_train[r] = 1;

  model_cfg.in_dim = features.cols;
  if (model_cfg.out_dim == 0) fail(ErrorCode::InvalidConfig, "model out_dim must be set by the task");

  Rng rng_init(cfg.seed);
  Rng rng_sample = Rng(cfg.seed).fork(0x5a8f12c3u);  // sampling noise never touches init
  GnnModel model(model_cfg, rng_init);
  auto params = model.params();
  AdamState adam(params, cfg.adam);

  const NormalizedAdjacency full_adj = build_normalized_adjacency(graph);
  const DenseMatrix x_full = to_dense(features);
  const size_t nodes_per_batch =
      cfg.nodes_per_batch > 0 ? std::min(cfg.nodes_per_batch, n) : std::min(n, std::max<size_t>(n / 32, 256));

  const bool symmetric = !graph.directed() || graph.symmetrize_messages();
  const bool maximize = targets.task == TaskKind::Classification;  // accuracy up, error down

  TrainResult result;
  TrainReport& report = result.report;
  std::vector<std::vector<double>> best_params = snapshot_params(model);
  double best_val = maximize ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
  size_t best_epoch = 0;

  for (size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = cosine_lr(epoch, cfg.epochs, cfg.adam.lr0);
    double loss_sum = 0.0;
    size_t update_count = 0;

    for (size_t b = 0; b < cfg.batch_size; ++b) {
      const bool whole = cfg.sampler == SamplerKind::FullBatch || nodes_per_batch == n;
      SampledSubgraph sub;
      if (cfg.sampler == SamplerKind::NodeSubgraph) {
        sub = sample_node_subgraph(graph.adjacency(), symmetric, nodes_per_batch, rng_sample);
      }

      const NormalizedAdjacency& adj = whole ? full_adj : sub.adjacency;
      DenseMatrix x_batch;
      Targets batch_targets;
      std::vector<size_t> batch_mask;
      const DenseMatrix* x = nullptr;
      const Targets* t = nullptr;
      const std::vector<size_t>* mask = nullptr;

      if (whole) {
        x = &x_full;
        t = &targets;
        mask = &train_rows;
      } else {
        const size_t k = sub.nodes.size();
        x_batch = DenseMatrix(k, features.cols);
        batch_targets.task = targets.task;
        batch_targets.class_of.assign(k, 0);
        batch_targets.value_of.assign(k, 0.0);
        batch_targets.has.assign(k, 0);
        for (size_t local = 0; local < k; ++local) {
          const size_t global = sub.nodes[local];
          std::copy(x_full.row(global), x_full.row(global) + features.cols, x_batch.row(local));
          if (!targets.class_of.empty()) batch_targets.class_of[local] = targets.class_of[global];
          if (!targets.value_of.empty()) batch_targets.value_of[local] = targets.value_of[global];
          batch_targets.has[local] = targets.has[global];
          if (in_train[global]) batch_mask.push_back(local);
        }
        x = &x_batch;
        t = &batch_targets;
        mask = &batch_mask;
      }

      if (mask->empty()) continue;  // a sample may miss the train set entirely; skip that update

      const DenseMatrix out = model.forward(adj, *x);
      const LossResult lr_res = loss_and_grad(*t, out, *mask);
      model.zero_grads();
      model.backward(lr_res.grad);
      adam.step(params, lr);
      loss_sum += lr_res.loss;
      ++update_count;
    }

    const double val_metric = evaluate(model, full_adj, x_full, targets, val_rows);
    const bool improved = maximize ? val_metric > best_val : val_metric < best_val;
    if (improved) {
      best_val = val_metric;
      best_epoch = epoch + 1;
      best_params = snapshot_params(model);
    }
    report.epochs.push_back(
        {epoch + 1, lr, update_count > 0 ? loss_sum / static_cast<double>(update_count) : 0.0, val_metric});
  }

  restore_params(model, best_params);
  report.best_epoch = best_epoch;
  report.best_val_metric = best_val;
  report.test_metric = evaluate(model, full_adj, x_full, targets, test_rows);
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();

  result.model = std::move(model);
  return result;
}

inline void write_report_csv(const TrainReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path);
  out << "epoch,lr,train_loss,val_metric\n";
  for (const auto& row : report.epochs) {
    out << row.epoch << ',' << format_double(row.lr) << ',' << format_double(row.train_loss) << ','
        << format_double(row.val_metric) << '\n';
  }
  if (!out) fail(ErrorCode::IoError, "write failed for " + path);
}

inline nlohmann::json report_to_json(const TrainReport& report) {
  nlohmann::json j;
  j["epochs"] = report.epochs.size();
  j["best_epoch"] = report.best_epoch;
  j["best_val_metric"] = report.best_val_metric;
  j["test_metric"] = report.test_metric;
  return j;
}

}  // namespace lpgkit
