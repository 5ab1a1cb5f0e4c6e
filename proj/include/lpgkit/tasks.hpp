#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "lpgkit/encoder.hpp"
#include "lpgkit/error.hpp"
#include "lpgkit/graph.hpp"
#include "lpgkit/loss.hpp"
#include "lpgkit/schema.hpp"
#include "lpgkit/textfmt.hpp"
#include "lpgkit/trainer.hpp"

namespace lpgkit {

/// A completion task: predict a held-out label (classification) or property
/// (classification over its distinct values, or regression). The exclusion
/// set is what the leakage guard strips from the input encoding.
struct CompletionTask {
  TaskKind task = TaskKind::Classification;
  bool target_is_label = false;
  std::string target;
  std::set<std::string> exclude;            // target, plus sibling labels for label tasks
  size_t num_classes = 0;                   // classification only
  std::vector<PropertyValue> class_values;  // property classification: class index -> value
  Targets targets;                          // row-aligned with ascending-id vertex rows
  std::vector<size_t> eligible_rows;        // rows that carry a target
};

inline std::string value_to_text(const PropertyValue& v) {
  switch (v.kind()) {
    case ValueKind::Integer: return std::to_string(v.as_integer());
    case ValueKind::Real: return format_double(v.as_real());
    case ValueKind::Boolean: return v.as_boolean() ? "true" : "false";
    case ValueKind::Text: return v.as_text();
    case ValueKind::RealVector: {
      std::string out;
      const auto& comps = v.as_real_vector();
      for (size_t i = 0; i < comps.size(); ++i) {
        if (i > 0) out.push_back(';');
        out += format_double(comps[i]);
      }
      return out;
    }
  }
  return "";
}

/// Builds targets for predicting `target` on vertices. Label targets become
/// binary presence classification and, by default, exclude the whole label
/// block from the inputs — sibling labels of a one-label-per-vertex scheme
/// would leak the answer. Property targets classify over the key's distinct
/// values or regress on its numeric value.
inline CompletionTask build_completion_task(const PropertyGraph& graph, TaskKind task, const std::string& target,
                                            bool target_is_label, bool exclude_sibling_labels = true) {
  if (!graph.frozen()) fail(ErrorCode::NotFrozen, "completion task needs a frozen graph");
  CompletionTask out;
  out.task = task;
  out.target = target;
  out.target_is_label = target_is_label;
  const size_t n = graph.vertex_count();
  out.targets.task = task;
  out.targets.has.assign(n, 0);

  if (target_is_label) {
    if (task != TaskKind::Classification) {
      fail(ErrorCode::InvalidConfig, "label targets are classification tasks");
    }
    const auto& labels = graph.label_universe();
    if (std::find(labels.begin(), labels.end(), target) == labels.end()) {
      fail(ErrorCode::UnknownTarget, "graph has no label '" + target + "'");
    }
    out.num_classes = 2;
    out.targets.class_of.assign(n, 0);
    size_t positives = 0;
    size_t r = 0;
    for (const auto& v : graph.vertices()) {
      const bool present = v.labels.count(target) > 0;
      out.targets.class_of[r] = present ? 1 : 0;
      out.targets.has[r] = 1;
      out.eligible_rows.push_back(r);
      positives += present ? 1 : 0;
      ++r;
    }
    if (positives == 0 || positives == n) {
      fail(ErrorCode::DegenerateTarget, "label '" + target + "' is constant across vertices");
    }
    if (exclude_sibling_labels) {
      out.exclude.insert(labels.begin(), labels.end());
    } else {
      out.exclude.insert(target);
    }
    return out;
  }

  const auto& keys = graph.key_universe();
  if (std::find(keys.begin(), keys.end(), target) == keys.end()) {
    fail(ErrorCode::UnknownTarget, "graph has no property key '" + target + "'");
  }
  out.exclude.insert(target);

  if (task == TaskKind::Classification) {
    std::set<PropertyValue> distinct;
    for (const auto& v : graph.vertices()) {
      const auto it = v.properties.find(target);
      if (it != v.properties.end()) distinct.insert(it->second.front());
    }
    if (distinct.size() < 2) {
      fail(ErrorCode::DegenerateTarget, "property '" + target + "' has fewer than two distinct values");
    }
    out.class_values.assign(distinct.begin(), distinct.end());
    out.num_classes = out.class_values.size();
    out.targets.class_of.assign(n, 0);
    size_t r = 0;
    for (const auto& v : graph.vertices()) {
      const auto it = v.properties.find(target);
      if (it != v.properties.end()) {
        const auto vit = std::lower_bound(out.class_values.begin(), out.class_values.end(), it->second.front());
        out.targets.class_of[r] = static_cast<int64_t>(vit - out.class_values.begin());
        out.targets.has[r] = 1;
        out.eligible_rows.push_back(r);
      }
      ++r;
    }
  } else {
    out.targets.value_of.assign(n, 0.0);
    bool first = true;
    double lo = 0.0, hi = 0.0;
    size_t r = 0;
    for (const auto& v : graph.vertices()) {
      const auto it = v.properties.find(target);
      if (it != v.properties.end()) {
        double sum = 0.0;
        size_t count = 0;
        for (const auto& val : it->second) {
          if (val.kind() == ValueKind::Integer || val.kind() == ValueKind::Real) {
            sum += val.as_number();
            ++count;
          }
        }
        if (count > 0) {
          const double y = sum / static_cast<double>(count);
          out.targets.value_of[r] = y;
          out.targets.has[r] = 1;
          out.eligible_rows.push_back(r);
          if (first) {
            lo = hi = y;
            first = false;
          } else {
            lo = std::min(lo, y);
            hi = std::max(hi, y);
          }
        }
      }
      ++r;
    }
    if (out.eligible_rows.empty() || lo == hi) {
      fail(ErrorCode::DegenerateTarget, "property '" + target + "' has no usable numeric spread");
    }
  }
  return out;
}

inline bool leakage_free(const EncodingSchema& schema, const std::set<std::string>& exclude) {
  for (const auto& name : schema.block_names()) {
    if (exclude.count(name) > 0) return false;
  }
  return true;
}

inline void require_leakage_free(const EncodingSchema& schema, const std::set<std::string>& exclude) {
  for (const auto& name : schema.block_names()) {
    if (exclude.count(name) > 0) {
      fail(ErrorCode::SchemaMismatch, "input schema contains excluded block '" + name + "'");
    }
  }
}

/// Schema for a task: infer on the graph, drop the task's exclusion set, and
/// assert the leakage guard held.
inline EncodingSchema build_task_schema(const PropertyGraph& graph, const CompletionTask& task,
                                        const SchemaOptions& options = {}, const SplitMasks* train_stats = nullptr) {
  const EncodingSchema full = infer_schema(graph, EntityKind::Vertex, options, train_stats);
  std::set<std::string> include;
  for (const auto& name : full.block_names()) {
    if (task.exclude.count(name) == 0) include.insert(name);
  }
  EncodingSchema restricted = restrict_schema(full, include);
  require_leakage_free(restricted, task.exclude);
  return restricted;
}

/// Features for one configuration: restrict the task schema to `include`,
/// encode, and substitute a single constant column when nothing remains so
/// the structure-only baseline still feeds the network. `degree_feature`
/// swaps that constant for the max-normalized vertex degree.
inline FeatureMatrix build_config_features(const PropertyGraph& graph, const EncodingSchema& task_schema,
                                           const std::set<std::string>& include, bool degree_feature = false) {
  const EncodingSchema schema = restrict_schema(task_schema, include);
  FeatureMatrix fm = encode_vertices(schema, graph);
  if (fm.cols == 0) {
    std::vector<std::vector<double>> extra(fm.rows, std::vector<double>{1.0});
    if (degree_feature) {
      const Csr& adj = graph.adjacency();
      double max_deg = 1.0;
      for (size_t r = 0; r < fm.rows; ++r) max_deg = std::max(max_deg, static_cast<double>(adj.degree(r)));
      for (size_t r = 0; r < fm.rows; ++r) extra[r][0] = static_cast<double>(adj.degree(r)) / max_deg;
    }
    fm = augment_features(fm, extra);
  }
  return fm;
}

// ---- repeat-seed summaries ----

struct CellStats {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation
  std::vector<double> per_seed;
};

inline CellStats summarize_runs(std::vector<double> values) {
  CellStats out;
  out.per_seed = std::move(values);
  const size_t k = out.per_seed.size();
  for (double v : out.per_seed) out.mean += v;
  out.mean /= static_cast<double>(k);
  if (k > 1) {
    double ss = 0.0;
    for (double v : out.per_seed) ss += (v - out.mean) * (v - out.mean);
    out.stddev = std::sqrt(ss / static_cast<double>(k - 1));
  }
  return out;
}

/// One named feature configuration of an uplift sweep.
struct FeatureConfig {
  std::string name;
  std::set<std::string> include;
};

inline FeatureConfig config_structure_only() { return {"structure", {}}; }

inline FeatureConfig config_labels_only(const EncodingSchema& schema) {
  FeatureConfig cfg{"labels", {}};
  cfg.include.insert(schema.label_order.begin(), schema.label_order.end());
  return cfg;
}

inline FeatureConfig config_single_key(const std::string& key) { return {"prop:" + key, {key}}; }

inline FeatureConfig config_labels_plus_key(const EncodingSchema& schema, const std::string& key) {
  FeatureConfig cfg = config_labels_only(schema);
  cfg.name = "labels+prop:" + key;
  cfg.include.insert(key);
  return cfg;
}

inline FeatureConfig config_all(const EncodingSchema& schema) {
  FeatureConfig cfg{"all", {}};
  for (const auto& name : schema.block_names()) cfg.include.insert(name);
  return cfg;
}

struct UpliftRow {
  std::string model;
  std::string config;
  CellStats metric;
};

struct UpliftTable {
  TaskKind task = TaskKind::Classification;
  size_t repeats = 0;
  std::vector<UpliftRow> rows;

  const UpliftRow* find(const std::string& model, const std::string& config) const {
    for (const auto& row : rows) {
      if (row.model == model && row.config == config) return &row;
    }
    return nullptr;
  }
};

/// Trains one model per (kind, configuration, seed) and tabulates the test
/// metric. Splits are fixed; only the training seed varies across repeats,
/// so configuration columns are directly comparable.
inline UpliftTable run_uplift_experiment(const PropertyGraph& graph, const CompletionTask& task,
                                         const EncodingSchema& task_schema, const std::vector<GnnKind>& models,
                                         const std::vector<FeatureConfig>& configs, const SplitMasks& splits,
                                         const ModelConfig& base_model, const TrainConfig& base_train,
                                         size_t repeats, bool degree_feature = false) {
  UpliftTable table;
  table.task = task.task;
  table.repeats = repeats;
  for (GnnKind kind : models) {
    for (const auto& config : configs) {
      const FeatureMatrix fm = build_config_features(graph, task_schema, config.include, degree_feature);
      std::vector<double> per_seed;
      per_seed.reserve(repeats);
      for (size_t rep = 0; rep < repeats; ++rep) {
        ModelConfig mc = base_model;
        mc.kind = kind;
        mc.out_dim = task.task == TaskKind::Classification ? task.num_classes : 1;
        TrainConfig tc = base_train;
        tc.seed = base_train.seed + rep;
        per_seed.push_back(train(graph, fm, task.targets, splits, mc, tc).report.test_metric);
      }
      table.rows.push_back({gnn_kind_name(kind), config.name, summarize_runs(std::move(per_seed))});
    }
  }
  return table;
}

inline void write_uplift_csv(const UpliftTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path);
  out << "model,config,mean,std";
  for (size_t s = 0; s < table.repeats; ++s) out << ",seed" << s;
  out << '\n';
  for (const auto& row : table.rows) {
    out << row.model << ',' << row.config << ',' << format_double(row.metric.mean) << ','
        << format_double(row.metric.stddev);
    for (double v : row.metric.per_seed) out << ',' << format_double(v);
    out << '\n';
  }
  if (!out) fail(ErrorCode::IoError, "write failed for " + path);
}

/// Single-feature and pairwise sweep against the structure-only baseline.
struct AblationReport {
  std::string model;
  std::string target;
  bool maximize = true;  // accuracy: up is better; error metrics: down
  size_t repeats = 0;
  CellStats baseline;
  std::vector<std::string> single_names;  // "labels" group first, then keys
  std::vector<CellStats> single_stats;
  std::vector<std::string> pair_keys;    // property keys in schema order
  std::vector<CellStats> pair_stats;     // k×k row-major; diagonal = the key alone
  bool has_pairs = false;

  double improvement(const CellStats& cell) const {
    return maximize ? cell.mean - baseline.mean : baseline.mean - cell.mean;
  }
};

/// Cells are enumerated up front, run as independent jobs (bounded worker
/// pool when jobs > 1 — each run only reads shared state and writes its own
/// result slot), then merged in enumeration order, so the report is the same
/// for any worker count.
inline AblationReport run_pairwise_ablation(const PropertyGraph& graph, const CompletionTask& task,
                                            const EncodingSchema& task_schema, GnnKind model_kind,
                                            const SplitMasks& splits, const ModelConfig& base_model,
                                            const TrainConfig& base_train, size_t repeats, bool with_pairs = true,
                                            size_t jobs = 1, bool degree_feature = false) {
  AblationReport report;
  report.model = gnn_kind_name(model_kind);
  report.target = task.target;
  report.maximize = task.task == TaskKind::Classification;
  report.repeats = repeats;
  report.has_pairs = with_pairs;

  for (const auto& spec : task_schema.property_order) report.pair_keys.push_back(spec.key);
  if (with_pairs && report.pair_keys.size() < 2) {
    fail(ErrorCode::InvalidConfig, "pairwise sweep needs at least two property keys");
  }
  const bool has_labels = !task_schema.label_order.empty();
  const size_t k = report.pair_keys.size();

  std::vector<std::set<std::string>> cells;
  cells.push_back({});  // baseline
  if (has_labels) cells.push_back(config_labels_only(task_schema).include);
  const size_t first_single = cells.size();
  for (const auto& key : report.pair_keys) cells.push_back({key});
  const size_t first_pair = cells.size();
  if (with_pairs) {
    for (size_t i = 0; i < k; ++i) {
      for (size_t j = i + 1; j < k; ++j) cells.push_back({report.pair_keys[i], report.pair_keys[j]});
    }
  }

  auto run_cell = [&](const std::set<std::string>& include) {
    const FeatureMatrix fm = build_config_features(graph, task_schema, include, degree_feature);
    std::vector<double> per_seed;
    per_seed.reserve(repeats);
    for (size_t rep = 0; rep < repeats; ++rep) {
      ModelConfig mc = base_model;
      mc.kind = model_kind;
      mc.out_dim = task.task == TaskKind::Classification ? task.num_classes : 1;
      TrainConfig tc = base_train;
      tc.seed = base_train.seed + rep;
      per_seed.push_back(train(graph, fm, task.targets, splits, mc, tc).report.test_metric);
    }
    return summarize_runs(std::move(per_seed));
  };

  std::vector<CellStats> results(cells.size());
  if (jobs <= 1 || cells.size() <= 1) {
    for (size_t i = 0; i < cells.size(); ++i) results[i] = run_cell(cells[i]);
  } else {
    std::atomic<size_t> next{0};
    auto worker = [&]() {
      for (size_t i = next.fetch_add(1); i < cells.size(); i = next.fetch_add(1)) {
        results[i] = run_cell(cells[i]);
      }
    };
    std::vector<std::thread> pool;
    for (size_t t = 0; t < std::min(jobs, cells.size()); ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  size_t cursor = 0;
  report.baseline = results[cursor++];
  if (has_labels) {
    report.single_names.push_back("labels");
    report.single_stats.push_back(results[cursor++]);
  }
  for (size_t i = 0; i < k; ++i) {
    report.single_names.push_back(report.pair_keys[i]);
    report.single_stats.push_back(results[first_single + i]);
  }
  if (with_pairs) {
    report.pair_stats.assign(k * k, CellStats{});
    size_t at = first_pair;
    for (size_t i = 0; i < k; ++i) {
      report.pair_stats[i * k + i] = results[first_single + i];  // diagonal reuses the single runs
      for (size_t j = i + 1; j < k; ++j, ++at) {
        report.pair_stats[i * k + j] = results[at];
        report.pair_stats[j * k + i] = results[at];  // unordered pair, symmetric by construction
      }
    }
  }
  return report;
}

inline void write_ablation_csv(const AblationReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path);
  out << "kind,feature_a,feature_b,mean,std,delta\n";
  out << "baseline,,," << format_double(report.baseline.mean) << ',' << format_double(report.baseline.stddev)
      << ",0\n";
  for (size_t i = 0; i < report.single_names.size(); ++i) {
    const CellStats& cell = report.single_stats[i];
    out << "single," << report.single_names[i] << ",," << format_double(cell.mean) << ','
        << format_double(cell.stddev) << ',' << format_double(report.improvement(cell)) << '\n';
  }
  if (report.has_pairs) {
    const size_t k = report.pair_keys.size();
    for (size_t i = 0; i < k; ++i) {
      for (size_t j = i + 1; j < k; ++j) {
        const CellStats& cell = report.pair_stats[i * k + j];
        out << "pair," << report.pair_keys[i] << ',' << report.pair_keys[j] << ',' << format_double(cell.mean)
            << ',' << format_double(cell.stddev) << ',' << format_double(report.improvement(cell)) << '\n';
      }
    }
  }
  if (!out) fail(ErrorCode::IoError, "write failed for " + path);
}

/// End-to-end completion run: hold out the test split of eligible vertices,
/// train on the rest, report the held-out metric and per-entity predictions.
struct CompletionOutcome {
  TrainResult trained;
  double masked_metric = 0.0;  // metric on the held-out (masked) split
  std::vector<size_t> masked_rows;
  DenseMatrix outputs;  // full-graph outputs of the selected model
};

inline CompletionOutcome run_completion(const PropertyGraph& graph, const CompletionTask& task,
                                        const FeatureMatrix& features, const SplitMasks& splits,
                                        const ModelConfig& model_cfg, const TrainConfig& train_cfg) {
  CompletionOutcome out;
  ModelConfig mc = model_cfg;
  mc.out_dim = task.task == TaskKind::Classification ? task.num_classes : 1;
  out.trained = train(graph, features, task.targets, splits, mc, train_cfg);
  const NormalizedAdjacency adj = build_normalized_adjacency(graph);
  const DenseMatrix x = to_dense(features);
  out.outputs = out.trained.model.forward(adj, x);
  out.masked_rows = detail::rows_of_mask(features, splits.test);
  out.masked_metric = evaluate_metric(task.targets, out.outputs, out.masked_rows);
  return out;
}

/// Predictions for every eligible vertex: id, split membership, predicted
/// value, and the held-out true value.
inline void write_predictions_csv(const CompletionTask& task, const CompletionOutcome& outcome,
                                  const FeatureMatrix& features, const SplitMasks& splits,
                                  const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path);
  out << "id,split,prediction,target\n";
  for (size_t r : task.eligible_rows) {
    const uint64_t id = features.ids[r];
    const char* split = splits.test.count(id) ? "test" : (splits.val.count(id) ? "val" : "train");
    std::string pred, truth;
    if (task.task == TaskKind::Classification) {
      const double* z = outcome.outputs.row(r);
      size_t best = 0;
      for (size_t c = 1; c < outcome.outputs.cols; ++c) {
        if (z[c] > z[best]) best = c;
      }
      if (task.target_is_label) {
        pred = best == 1 ? "1" : "0";
        truth = task.targets.class_of[r] == 1 ? "1" : "0";
      } else {
        pred = value_to_text(task.class_values[best]);
        truth = value_to_text(task.class_values[static_cast<size_t>(task.targets.class_of[r])]);
      }
    } else {
      pred = format_double(outcome.outputs.at(r, 0));
      truth = format_double(task.targets.value_of[r]);
    }
    out << id << ',' << split << ',' << pred << ',' << truth << '\n';
  }
  if (!out) fail(ErrorCode::IoError, "write failed for " + path);
}

}  // namespace lpgkit
