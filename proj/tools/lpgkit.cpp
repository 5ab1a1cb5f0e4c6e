// lpgkit command line: inspect, encode, train, complete, ablate, synth.
// One binary, JSON config files mirroring flag names, flags > config >
// defaults; every file-producing run leaves a manifest that pins the resolved
// configuration, input digests, and seed.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lpgkit/csv.hpp"
#include "lpgkit/encoder.hpp"
#include "lpgkit/error.hpp"
#include "lpgkit/graph.hpp"
#include "lpgkit/heatmap.hpp"
#include "lpgkit/jsonl.hpp"
#include "lpgkit/model.hpp"
#include "lpgkit/rng.hpp"
#include "lpgkit/schema.hpp"
#include "lpgkit/splits.hpp"
#include "lpgkit/stats.hpp"
#include "lpgkit/synth.hpp"
#include "lpgkit/tasks.hpp"
#include "lpgkit/textfmt.hpp"
#include "lpgkit/trainer.hpp"

namespace {

constexpr const char* kToolVersion = "lpgkit 1.0.0";

std::string hex64(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

uint64_t file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) lpgkit::fail(lpgkit::ErrorCode::IoError, "cannot open " + path);
  uint64_t h = 1469598103934665603ull;  // FNV offset basis
  char chunk[4096];
  while (in.read(chunk, sizeof(chunk)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(chunk[i]);
      h *= 1099511628211ull;
    }
  }
  return h;
}

nlohmann::json load_config_file(const std::string& path) {
  if (path.empty()) return nlohmann::json::object();
  std::ifstream in(path);
  if (!in) lpgkit::fail(lpgkit::ErrorCode::IoError, "cannot open config " + path);
  nlohmann::json cfg;
  try {
    in >> cfg;
  } catch (const nlohmann::json::exception& e) {
    lpgkit::fail(lpgkit::ErrorCode::ParseError, "config " + path + ": " + e.what());
  }
  if (!cfg.is_object()) lpgkit::fail(lpgkit::ErrorCode::ParseError, "config " + path + ": expected a JSON object");
  return cfg;
}

// flags > config file > defaults: a flag the user typed wins; otherwise the
// config file key with the same spelling; otherwise whatever `value` already
// holds.
template <class T>
void overlay(const CLI::App& sub, const char* flag, const nlohmann::json& cfg, const char* key, T& value) {
  if (sub.count(flag) > 0) return;
  if (!cfg.contains(key)) return;
  try {
    value = cfg.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    lpgkit::fail(lpgkit::ErrorCode::InvalidConfig, std::string("config key '") + key + "' has the wrong type");
  }
}

// LPGKIT_SEED steps in only when neither a --seed flag nor a config "seed"
// pins one.
uint64_t resolve_seed(const CLI::App& sub, const nlohmann::json& cfg, uint64_t flag_value) {
  if (sub.count("--seed") > 0) return flag_value;
  if (cfg.contains("seed")) {
    if (!cfg["seed"].is_number_unsigned() && !cfg["seed"].is_number_integer()) {
      lpgkit::fail(lpgkit::ErrorCode::InvalidConfig, "config key 'seed' must be an integer");
    }
    return cfg["seed"].get<uint64_t>();
  }
  if (const char* env = std::getenv("LPGKIT_SEED")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0') {
      lpgkit::fail(lpgkit::ErrorCode::InvalidConfig, "LPGKIT_SEED is not an unsigned integer");
    }
    return v;
  }
  return 0;
}

// ---- shared flag groups ----

struct InputOpts {
  std::string input;
  std::string edges;
  std::string csv_manifest;
  bool csv_directed = false;
  bool no_symmetrize = false;
};

void add_input_flags(CLI::App* sub, InputOpts& io) {
  sub->add_option("--input", io.input, "graph in LPG-JSONL form (or node CSV with --csv-manifest)")->required();
  sub->add_option("--edges", io.edges, "edge CSV (CSV pair form only)");
  sub->add_option("--csv-manifest", io.csv_manifest, "column-role manifest JSON enabling the CSV pair form");
  sub->add_flag("--directed", io.csv_directed, "treat CSV edges as directed");
  sub->add_flag("--no-symmetrize", io.no_symmetrize, "message passing follows edge direction instead of both ways");
}

lpgkit::PropertyGraph load_input(const InputOpts& io, nlohmann::json& input_digests) {
  lpgkit::PropertyGraph g;
  if (!io.csv_manifest.empty()) {
    if (io.edges.empty()) {
      lpgkit::fail(lpgkit::ErrorCode::InvalidConfig, "--csv-manifest needs --edges as well");
    }
    g = lpgkit::load_lpg_csv(io.input, io.edges, io.csv_manifest, io.csv_directed);
    input_digests[io.input] = hex64(file_digest(io.input));
    input_digests[io.edges] = hex64(file_digest(io.edges));
    input_digests[io.csv_manifest] = hex64(file_digest(io.csv_manifest));
  } else {
    g = lpgkit::load_lpg_jsonl(io.input);
    input_digests[io.input] = hex64(file_digest(io.input));
  }
  if (io.no_symmetrize) {
    g.set_symmetrize_messages(false);
    g.freeze();
  }
  return g;
}

nlohmann::json input_opts_json(const InputOpts& io) {
  nlohmann::json j;
  j["input"] = io.input;
  j["edges"] = io.edges;
  j["csv-manifest"] = io.csv_manifest;
  j["directed"] = io.csv_directed;
  j["no-symmetrize"] = io.no_symmetrize;
  return j;
}

struct SchemaOpts {
  size_t categorical_threshold = 32;
  size_t hashed_text_dim = 64;
  size_t discretize_scalars = 0;
  bool appendix_layout = false;
  bool no_integer_categorical = false;
  bool no_integer_coercion = false;
};

void add_schema_flags(CLI::App* sub, SchemaOpts& so) {
  sub->add_option("--categorical-threshold", so.categorical_threshold,
                  "max distinct values for one-hot treatment (default 32)");
  sub->add_option("--hashed-text-dim", so.hashed_text_dim, "hashed text block width (default 64)");
  sub->add_option("--discretize-scalars", so.discretize_scalars, "one-hot scalars into this many bins (0 = off)");
  sub->add_flag("--appendix-layout", so.appendix_layout, "move hashed-text blocks after all other blocks");
  sub->add_flag("--no-integer-categorical", so.no_integer_categorical, "never one-hot integer keys");
  sub->add_flag("--no-integer-coercion", so.no_integer_coercion, "reject keys mixing integer and real values");
}

void overlay_schema(const CLI::App& sub, const nlohmann::json& cfg, SchemaOpts& so) {
  overlay(sub, "--categorical-threshold", cfg, "categorical-threshold", so.categorical_threshold);
  overlay(sub, "--hashed-text-dim", cfg, "hashed-text-dim", so.hashed_text_dim);
  overlay(sub, "--discretize-scalars", cfg, "discretize-scalars", so.discretize_scalars);
  overlay(sub, "--appendix-layout", cfg, "appendix-layout", so.appendix_layout);
  overlay(sub, "--no-integer-categorical", cfg, "no-integer-categorical", so.no_integer_categorical);
  overlay(sub, "--no-integer-coercion", cfg, "no-integer-coercion", so.no_integer_coercion);
}

lpgkit::SchemaOptions to_schema_options(const SchemaOpts& so) {
  lpgkit::SchemaOptions opts;
  opts.categorical_threshold = so.categorical_threshold;
  opts.hashed_text_dim = so.hashed_text_dim;
  opts.discretize_scalars = so.discretize_scalars;
  opts.appendix_layout = so.appendix_layout;
  opts.integers_as_categorical = !so.no_integer_categorical;
  opts.coerce_integer_to_real = !so.no_integer_coercion;
  return opts;
}

nlohmann::json schema_opts_json(const SchemaOpts& so) {
  nlohmann::json j;
  j["categorical-threshold"] = so.categorical_threshold;
  j["hashed-text-dim"] = so.hashed_text_dim;
  j["discretize-scalars"] = so.discretize_scalars;
  j["appendix-layout"] = so.appendix_layout;
  j["no-integer-categorical"] = so.no_integer_categorical;
  j["no-integer-coercion"] = so.no_integer_coercion;
  return j;
}

struct TrainOpts {
  std::string model = "gcn";
  size_t epochs = 100;
  size_t batch_size = 32;
  size_t hidden = 64;
  size_t heads = 4;
  double lr = 0.01;
  std::string sampler = "node";
  size_t nodes_per_batch = 0;
  double train_frac = 0.6;
  double val_frac = 0.2;
  double test_frac = 0.2;
};

void add_train_flags(CLI::App* sub, TrainOpts& to) {
  sub->add_option("--model", to.model, "gcn | gin | gat (default gcn)");
  sub->add_option("--epochs", to.epochs, "training epochs (default 100)");
  sub->add_option("--batch-size", to.batch_size, "parameter updates per epoch (default 32)");
  sub->add_option("--hidden", to.hidden, "hidden width (default 64)");
  sub->add_option("--heads", to.heads, "attention heads (default 4)");
  sub->add_option("--lr", to.lr, "peak learning rate (default 0.01)");
  sub->add_option("--sampler", to.sampler, "node | full (default node)");
  sub->add_option("--nodes-per-batch", to.nodes_per_batch, "subgraph size, 0 = auto");
  sub->add_option("--train-frac", to.train_frac, "train split fraction");
  sub->add_option("--val-frac", to.val_frac, "validation split fraction");
  sub->add_option("--test-frac", to.test_frac, "test split fraction");
}

void overlay_train(const CLI::App& sub, const nlohmann::json& cfg, TrainOpts& to) {
  overlay(sub, "--model", cfg, "model", to.model);
  overlay(sub, "--epochs", cfg, "epochs", to.epochs);
  overlay(sub, "--batch-size", cfg, "batch-size", to.batch_size);
  overlay(sub, "--hidden", cfg, "hidden", to.hidden);
  overlay(sub, "--heads", cfg, "heads", to.heads);
  overlay(sub, "--lr", cfg, "lr", to.lr);
  overlay(sub, "--sampler", cfg, "sampler", to.sampler);
  overlay(sub, "--nodes-per-batch", cfg, "nodes-per-batch", to.nodes_per_batch);
  overlay(sub, "--train-frac", cfg, "train-frac", to.train_frac);
  overlay(sub, "--val-frac", cfg, "val-frac", to.val_frac);
  overlay(sub, "--test-frac", cfg, "test-frac", to.test_frac);
}

lpgkit::TrainConfig to_train_config(const TrainOpts& to, uint64_t seed) {
  lpgkit::TrainConfig tc;
  tc.epochs = to.epochs;
  tc.batch_size = to.batch_size;
  tc.adam.lr0 = to.lr;
  tc.seed = seed;
  if (to.sampler == "node") {
    tc.sampler = lpgkit::SamplerKind::NodeSubgraph;
  } else if (to.sampler == "full") {
    tc.sampler = lpgkit::SamplerKind::FullBatch;
  } else {
    lpgkit::fail(lpgkit::ErrorCode::InvalidConfig, "unknown sampler '" + to.sampler + "'");
  }
  tc.nodes_per_batch = to.nodes_per_batch;
  return tc;
}

lpgkit::ModelConfig to_model_config(const TrainOpts& to) {
  lpgkit::ModelConfig mc;
  mc.kind = lpgkit::gnn_kind_from_name(to.model);
  mc.hidden = to.hidden;
  mc.heads = to.heads;
  return mc;
}

nlohmann::json train_opts_json(const TrainOpts& to) {
  nlohmann::json j;
  j["model"] = to.model;
  j["epochs"] = to.epochs;
  j["batch-size"] = to.batch_size;
  j["hidden"] = to.hidden;
  j["heads"] = to.heads;
  j["lr"] = to.lr;
  j["sampler"] = to.sampler;
  j["nodes-per-batch"] = to.nodes_per_batch;
  j["train-frac"] = to.train_frac;
  j["val-frac"] = to.val_frac;
  j["test-frac"] = to.test_frac;
  return j;
}

lpgkit::TaskKind parse_task(const std::string& s) {
  if (s == "node-class") return lpgkit::TaskKind::Classification;
  if (s == "node-reg") return lpgkit::TaskKind::Regression;
  lpgkit::fail(lpgkit::ErrorCode::InvalidConfig, "unknown task '" + s + "' (expected node-class or node-reg)");
}

// --include may repeat and each occurrence may hold a comma-separated list;
// "--include \"\"" is an explicit empty selection, distinct from no flag.
std::set<std::string> parse_include(const std::vector<std::string>& raw) {
  std::set<std::string> names;
  for (const auto& entry : raw) {
    for (const auto& piece : lpgkit::detail::split_on(entry, ',')) {
      if (!piece.empty()) names.insert(piece);
    }
  }
  return names;
}

void write_manifest(const std::string& path, const std::string& command, nlohmann::json resolved,
                    nlohmann::json inputs, uint64_t seed) {
  nlohmann::json m;
  m["tool_version"] = kToolVersion;
  m["command"] = command;
  m["seed"] = seed;
  m["inputs"] = std::move(inputs);
  m["resolved"] = std::move(resolved);
  std::ofstream out(path);
  if (!out) lpgkit::fail(lpgkit::ErrorCode::IoError, "cannot write " + path);
  out << m.dump(2) << '\n';
  if (!out) lpgkit::fail(lpgkit::ErrorCode::IoError, "write failed for " + path);
}

void write_json_file(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) lpgkit::fail(lpgkit::ErrorCode::IoError, "cannot write " + path);
  out << j.dump(2) << '\n';
  if (!out) lpgkit::fail(lpgkit::ErrorCode::IoError, "write failed for " + path);
}

// Shared by train / complete / ablate: resolve a completion task, leakage-free
// schema, per-task splits over eligible vertices, and the feature matrix.
struct TaskBundle {
  lpgkit::CompletionTask task;
  lpgkit::SplitMasks splits;
  lpgkit::EncodingSchema task_schema;   // everything except the target blocks
  lpgkit::EncodingSchema input_schema;  // task schema after --include restriction
  lpgkit::FeatureMatrix features;
};

TaskBundle build_task_bundle(const lpgkit::PropertyGraph& graph, lpgkit::TaskKind kind, const std::string& target,
                             bool target_is_label, const lpgkit::SplitRatios& ratios, uint64_t seed,
                             const lpgkit::SchemaOptions& schema_opts, const std::set<std::string>* include,
                             bool degree_feature = false) {
  TaskBundle b;
  b.task = lpgkit::build_completion_task(graph, kind, target, target_is_label);

  // split only over vertices that actually carry a target; rows index the
  // ascending-id vertex order
  std::vector<lpgkit::VertexId> eligible;
  eligible.reserve(b.task.eligible_rows.size());
  for (size_t r : b.task.eligible_rows) eligible.push_back(graph.vertices()[r].id);
  b.splits = lpgkit::make_splits(std::move(eligible), ratios, seed);

  b.task_schema = lpgkit::build_task_schema(graph, b.task, schema_opts, &b.splits);
  std::set<std::string> chosen = include ? *include : lpgkit::config_all(b.task_schema).include;
  b.input_schema = lpgkit::restrict_schema(b.task_schema, chosen);
  b.features = lpgkit::build_config_features(graph, b.task_schema, chosen, degree_feature);
  return b;
}

// ---- subcommands ----

struct StatsCmd {
  InputOpts io;
  std::string config_path;
  std::string manifest_out;
  bool as_json = false;
};

int run_stats(const CLI::App& sub, StatsCmd& c) {
  const nlohmann::json cfg = load_config_file(c.config_path);
  overlay(sub, "--json", cfg, "json", c.as_json);
  nlohmann::json digests;
  const lpgkit::PropertyGraph g = load_input(c.io, digests);
  const lpgkit::DatasetStats s = lpgkit::dataset_stats(g);
  if (c.as_json) {
    std::cout << lpgkit::stats_to_json(s).dump() << '\n';
  } else {
    std::cout << "n_vertices=" << s.n_vertices << " n_edges=" << s.n_edges << " n_labels=" << s.n_labels
              << " n_property_keys=" << s.n_property_keys << '\n';
  }
  if (!c.manifest_out.empty()) {
    nlohmann::json resolved = input_opts_json(c.io);
    resolved["json"] = c.as_json;
    write_manifest(c.manifest_out, "stats", std::move(resolved), std::move(digests), 0);
  }
  return 0;
}

struct EncodeCmd {
  InputOpts io;
  SchemaOpts schema;
  std::string config_path;
  std::string entity = "vertex";
  std::string out;
  std::string schema_out;
  std::vector<std::string> include_raw;
};

int run_encode(const CLI::App& sub, EncodeCmd& c) {
  const nlohmann::json cfg = load_config_file(c.config_path);
  overlay(sub, "--entity", cfg, "entity", c.entity);
  overlay(sub, "--include", cfg, "include", c.include_raw);
  overlay_schema(sub, cfg, c.schema);

  nlohmann::json digests;
  const lpgkit::PropertyGraph g = load_input(c.io, digests);

  lpgkit::EntityKind kind;
  if (c.entity == "vertex") {
    kind = lpgkit::EntityKind::Vertex;
  } else if (c.entity == "edge") {
    kind = lpgkit::EntityKind::Edge;
  } else {
    lpgkit::fail(lpgkit::ErrorCode::InvalidConfig, "unknown entity '" + c.entity + "'");
  }

  lpgkit::EncodingSchema schema = lpgkit::infer_schema(g, kind, to_schema_options(c.schema));
  const bool selective = sub.count("--include") > 0 || cfg.contains("include");
  if (selective) {
    schema = lpgkit::restrict_schema(schema, parse_include(c.include_raw));
  }
  const lpgkit::FeatureMatrix fm =
      kind == lpgkit::EntityKind::Vertex ? lpgkit::encode_vertices(schema, g) : lpgkit::encode_edges(schema, g);
  lpgkit::save_features(fm, c.out);
  if (!c.schema_out.empty()) {
    write_json_file(c.schema_out, lpgkit::schema_to_json(schema));
  }

  nlohmann::json resolved = input_opts_json(c.io);
  resolved.update(schema_opts_json(c.schema));
  resolved["entity"] = c.entity;
  resolved["out"] = c.out;
  resolved["schema-out"] = c.schema_out;
  resolved["include"] = selective ? nlohmann::json(parse_include(c.include_raw)) : nlohmann::json("(all)");
  write_manifest(c.out + ".manifest.json", "encode", std::move(resolved), std::move(digests), 0);

  std::cout << "rows=" << fm.rows << " cols=" << fm.cols << '\n';
  return 0;
}

struct TrainCmd {
  InputOpts io;
  SchemaOpts schema;
  TrainOpts train;
  std::string config_path;
  std::string task = "node-class";
  std::string target;
  std::string target_kind = "property";
  std::string out = "train_run";
  std::vector<std::string> include_raw;
  bool degree_feature = false;
  uint64_t seed = 0;
};

int run_train(const CLI::App& sub, TrainCmd& c) {
  const nlohmann::json cfg = load_config_file(c.config_path);
  overlay(sub, "--task", cfg, "task", c.task);
  overlay(sub, "--target", cfg, "target", c.target);
  overlay(sub, "--target-kind", cfg, "target-kind", c.target_kind);
  overlay(sub, "--out", cfg, "out", c.out);
  overlay(sub, "--include", cfg, "include", c.include_raw);
  overlay(sub, "--degree-feature", cfg, "degree-feature", c.degree_feature);
  overlay_schema(sub, cfg, c.schema);
  overlay_train(sub, cfg, c.train);
  const uint64_t seed = resolve_seed(sub, cfg, c.seed);

  if (c.target.empty()) lpgkit::fail(lpgkit::ErrorCode::InvalidConfig, "--target is required");
  const lpgkit::TaskKind kind = parse_task(c.task);
  const bool is_label = c.target_kind == "label";
  if (!is_label && c.target_kind != "property") {
    lpgkit::fail(lpgkit::ErrorCode::InvalidConfig, "unknown target kind '" + c.target_kind + "'");
  }
  if (is_label && kind != lpgkit::TaskKind::Classification) {
    lpgkit::fail(lpgkit::ErrorCode::InvalidConfig, "label targets are classification tasks");
  }

  nlohmann::json digests;
  const lpgkit::PropertyGraph g = load_input(c.io, digests);

  const lpgkit::SplitRatios ratios{c.train.train_frac, c.train.val_frac, c.train.test_frac};
  const bool selective = sub.count("--include") > 0 || cfg.contains("include");
  const std::set<std::string> include = parse_include(c.include_raw);
  const TaskBundle b = build_task_bundle(g, kind, c.target, is_label, ratios, seed, to_schema_options(c.schema),
                                         selective ? &include : nullptr, c.degree_feature);

  lpgkit::ModelConfig mc = to_model_config(c.train);
  mc.out_dim = kind == lpgkit::TaskKind::Classification ? b.task.num_classes : 1;
  const lpgkit::TrainConfig tc = to_train_config(c.train, seed);
  lpgkit::TrainResult result = lpgkit::train(g, b.features, b.task.targets, b.splits, mc, tc);

  lpgkit::save_model(result.model, lpgkit::schema_digest(b.input_schema), c.out + ".model");
  lpgkit::write_report_csv(result.report, c.out + ".report.csv");
  write_json_file(c.out + ".report.json", lpgkit::report_to_json(result.report));

  nlohmann::json resolved = input_opts_json(c.io);
  resolved.update(schema_opts_json(c.schema));
  resolved.update(train_opts_json(c.train));
  resolved["task"] = c.task;
  resolved["target"] = c.target;
  resolved["target-kind"] = c.target_kind;
  resolved["out"] = c.out;
  resolved["include"] = selective ? nlohmann::json(include) : nlohmann::json("(all)");
  resolved["degree-feature"] = c.degree_feature;
  write_manifest(c.out + ".manifest.json", "train", std::move(resolved), std::move(digests), seed);

  std::cout << "best_epoch=" << result.report.best_epoch
            << " best_val_metric=" << lpgkit::format_double(result.report.best_val_metric)
            << " test_metric=" << lpgkit::format_double(result.report.test_metric) << '\n';
  return 0;
}

struct CompleteCmd {
  InputOpts io;
  SchemaOpts schema;
  TrainOpts train;
  std::string config_path;
  std::string kind = "label";
  std::string task = "node-class";
  std::string target;
  std::string out = "complete_run";
  uint64_t seed = 0;
};

int run_complete(const CLI::App& sub, CompleteCmd& c) {
  const nlohmann::json cfg = load_config_file(c.config_path);
  // completion defaults: hold out 10% as the masked set (unless overridden)
  if (sub.count("--train-frac") == 0 && !cfg.contains("train-frac")) c.train.train_frac = 0.8;
  if (sub.count("--val-frac") == 0 && !cfg.contains("val-frac")) c.train.val_frac = 0.1;
  if (sub.count("--test-frac") == 0 && !cfg.contains("test-frac")) c.train.test_frac = 0.1;
  overlay(sub, "--kind", cfg, "kind", c.kind);
  overlay(sub, "--task", cfg, "task", c.task);
  overlay(sub, "--target", cfg, "target", c.target);
  overlay(sub, "--out", cfg, "out", c.out);
  overlay_schema(sub, cfg, c.schema);
  overlay_train(sub, cfg, c.train);
  const uint64_t seed = resolve_seed(sub, cfg, c.seed);

  if (c.target.empty()) lpgkit::fail(lpgkit::ErrorCode::InvalidConfig, "--target is required");
  const bool is_label = c.kind == "label";
  if (!is_label && c.kind != "property") {
    lpgkit::fail(lpgkit::ErrorCode::InvalidConfig, "unknown completion kind '" + c.kind + "'");
  }
  const lpgkit::TaskKind kind = is_label ? lpgkit::TaskKind::Classification : parse_task(c.task);

  nlohmann::json digests;
  const lpgkit::PropertyGraph g = load_input(c.io, digests);

  const lpgkit::SplitRatios ratios{c.train.train_frac, c.train.val_frac, c.train.test_frac};
  const TaskBundle b =
      build_task_bundle(g, kind, c.target, is_label, ratios, seed, to_schema_options(c.schema), nullptr);

  const lpgkit::ModelConfig mc = to_model_config(c.train);
  const lpgkit::TrainConfig tc = to_train_config(c.train, seed);
  const lpgkit::CompletionOutcome outcome = lpgkit::run_completion(g, b.task, b.features, b.splits, mc, tc);

  lpgkit::write_predictions_csv(b.task, outcome, b.features, b.splits, c.out + ".predictions.csv");
  lpgkit::write_report_csv(outcome.trained.report, c.out + ".report.csv");
  write_json_file(c.out + ".report.json", lpgkit::report_to_json(outcome.trained.report));

  nlohmann::json resolved = input_opts_json(c.io);
  resolved.update(schema_opts_json(c.schema));
  resolved.update(train_opts_json(c.train));
  resolved["kind"] = c.kind;
  resolved["task"] = c.task;
  resolved["target"] = c.target;
  resolved["out"] = c.out;
  write_manifest(c.out + ".manifest.json", "complete", std::move(resolved), std::move(digests), seed);

  std::cout << "masked_rows=" << outcome.masked_rows.size()
            << " masked_metric=" << lpgkit::format_double(outcome.masked_metric) << '\n';
  return 0;
}

struct AblateCmd {
  InputOpts io;
  SchemaOpts schema;
  TrainOpts train;
  std::string config_path;
  std::string task = "node-class";
  std::string target;
  std::string target_kind = "property";
  std::string out = "ablation";
  bool pairs = false;
  bool degree_feature = false;
  size_t repeats = 5;
  size_t jobs = 0;
  uint64_t seed = 0;
};

int run_ablate(const CLI::App& sub, AblateCmd& c) {
  const nlohmann::json cfg = load_config_file(c.config_path);
  overlay(sub, "--task", cfg, "task", c.task);
  overlay(sub, "--target", cfg, "target", c.target);
  overlay(sub, "--target-kind", cfg, "target-kind", c.target_kind);
  overlay(sub, "--out", cfg, "out", c.out);
  overlay(sub, "--pairs", cfg, "pairs", c.pairs);
  overlay(sub, "--degree-feature", cfg, "degree-feature", c.degree_feature);
  overlay(sub, "--repeats", cfg, "repeats", c.repeats);
  overlay(sub, "--jobs", cfg, "jobs", c.jobs);
  overlay_schema(sub, cfg, c.schema);
  overlay_train(sub, cfg, c.train);
  const uint64_t seed = resolve_seed(sub, cfg, c.seed);
  if (c.jobs == 0) {
    c.jobs = std::max(1u, std::thread::hardware_concurrency());
  }

  if (c.target.empty()) lpgkit::fail(lpgkit::ErrorCode::InvalidConfig, "--target is required");
  if (c.repeats == 0) lpgkit::fail(lpgkit::ErrorCode::InvalidConfig, "--repeats must be >= 1");
  const lpgkit::TaskKind kind = parse_task(c.task);
  const bool is_label = c.target_kind == "label";
  if (!is_label && c.target_kind != "property") {
    lpgkit::fail(lpgkit::ErrorCode::InvalidConfig, "unknown target kind '" + c.target_kind + "'");
  }

  nlohmann::json digests;
  const lpgkit::PropertyGraph g = load_input(c.io, digests);

  const lpgkit::SplitRatios ratios{c.train.train_frac, c.train.val_frac, c.train.test_frac};
  const TaskBundle b =
      build_task_bundle(g, kind, c.target, is_label, ratios, seed, to_schema_options(c.schema), nullptr);

  const lpgkit::ModelConfig mc = to_model_config(c.train);
  const lpgkit::TrainConfig tc = to_train_config(c.train, seed);
  const lpgkit::AblationReport report = lpgkit::run_pairwise_ablation(
      g, b.task, b.task_schema, mc.kind, b.splits, mc, tc, c.repeats, c.pairs, c.jobs, c.degree_feature);

  lpgkit::write_ablation_csv(report, c.out + ".csv");
  lpgkit::render_heatmap(report, c.out + ".svg");

  nlohmann::json resolved = input_opts_json(c.io);
  resolved.update(schema_opts_json(c.schema));
  resolved.update(train_opts_json(c.train));
  resolved["task"] = c.task;
  resolved["target"] = c.target;
  resolved["target-kind"] = c.target_kind;
  resolved["out"] = c.out;
  resolved["pairs"] = c.pairs;
  resolved["degree-feature"] = c.degree_feature;
  resolved["repeats"] = c.repeats;
  resolved["jobs"] = c.jobs;
  write_manifest(c.out + ".manifest.json", "ablate", std::move(resolved), std::move(digests), seed);

  std::cout << "cells=" << (1 + report.single_stats.size() +
                            (report.has_pairs ? report.pair_keys.size() * (report.pair_keys.size() - 1) / 2 : 0))
            << " baseline_mean=" << lpgkit::format_double(report.baseline.mean) << '\n';
  return 0;
}

struct SynthCmd {
  std::string spec_path;
  std::string config_path;
  std::string out;
  uint64_t seed = 0;
};

lpgkit::PlantedSpec spec_from_json(const nlohmann::json& j) {
  lpgkit::PlantedSpec spec;
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) {
      try {
        field = j.at(key).get<std::decay_t<decltype(field)>>();
      } catch (const nlohmann::json::exception&) {
        lpgkit::fail(lpgkit::ErrorCode::InvalidSpec, std::string("spec key '") + key + "' has the wrong type");
      }
    }
  };
  get("n", spec.n);
  get("classes", spec.classes);
  get("intra_p", spec.intra_p);
  get("inter_p", spec.inter_p);
  get("planted_cat_key", spec.planted_cat_key);
  get("rho", spec.rho);
  get("planted_scalar_key", spec.planted_scalar_key);
  get("scalar_separation", spec.scalar_separation);
  get("noise_categorical", spec.noise_categorical);
  get("noise_scalar", spec.noise_scalar);
  get("noise_text", spec.noise_text);
  get("rho_label", spec.rho_label);
  get("class_key", spec.class_key);
  get("seed", spec.seed);
  return spec;
}

nlohmann::json spec_to_json(const lpgkit::PlantedSpec& spec) {
  nlohmann::json j;
  j["n"] = spec.n;
  j["classes"] = spec.classes;
  j["intra_p"] = spec.intra_p;
  j["inter_p"] = spec.inter_p;
  j["planted_cat_key"] = spec.planted_cat_key;
  j["rho"] = spec.rho;
  j["planted_scalar_key"] = spec.planted_scalar_key;
  j["scalar_separation"] = spec.scalar_separation;
  j["noise_categorical"] = spec.noise_categorical;
  j["noise_scalar"] = spec.noise_scalar;
  j["noise_text"] = spec.noise_text;
  j["rho_label"] = spec.rho_label;
  j["class_key"] = spec.class_key;
  j["seed"] = spec.seed;
  return j;
}

int run_synth(const CLI::App& sub, SynthCmd& c) {
  const nlohmann::json cfg = load_config_file(c.config_path);
  nlohmann::json digests;
  nlohmann::json spec_json = nlohmann::json::object();
  if (!c.spec_path.empty()) {
    std::ifstream in(c.spec_path);
    if (!in) lpgkit::fail(lpgkit::ErrorCode::IoError, "cannot open spec " + c.spec_path);
    try {
      in >> spec_json;
    } catch (const nlohmann::json::exception& e) {
      lpgkit::fail(lpgkit::ErrorCode::ParseError, "spec " + c.spec_path + ": " + e.what());
    }
    digests[c.spec_path] = hex64(file_digest(c.spec_path));
  }
  lpgkit::PlantedSpec spec = spec_from_json(spec_json);
  if (sub.count("--seed") > 0) {
    spec.seed = c.seed;
  } else if (!spec_json.contains("seed")) {
    spec.seed = resolve_seed(sub, cfg, c.seed);
  }

  std::filesystem::create_directories(c.out);
  const lpgkit::PlantedFixture fixture = lpgkit::generate(spec);
  lpgkit::write_fixture(fixture, c.out);

  nlohmann::json resolved = spec_to_json(spec);
  resolved["out"] = c.out;
  resolved["spec"] = c.spec_path;
  write_manifest(c.out + "/manifest.json", "synth", std::move(resolved), std::move(digests), spec.seed);

  std::cout << "n=" << fixture.graph.vertex_count() << " m=" << fixture.graph.edge_count()
            << " property_bayes=" << lpgkit::format_double(fixture.certificate["property_bayes_accuracy"].get<double>())
            << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LPG feature encoding and graph-learning toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  StatsCmd stats_cmd;
  CLI::App* stats_sub = app.add_subcommand("stats", "dataset summary: counts of vertices, edges, labels, keys");
  add_input_flags(stats_sub, stats_cmd.io);
  stats_sub->add_option("--config", stats_cmd.config_path, "JSON config file mirroring flag names");
  stats_sub->add_option("--manifest-out", stats_cmd.manifest_out, "also write a run manifest here");
  stats_sub->add_flag("--json", stats_cmd.as_json, "emit JSON instead of the one-line summary");

  EncodeCmd encode_cmd;
  CLI::App* encode_sub = app.add_subcommand("encode", "turn labels and properties into a feature matrix");
  add_input_flags(encode_sub, encode_cmd.io);
  add_schema_flags(encode_sub, encode_cmd.schema);
  encode_sub->add_option("--config", encode_cmd.config_path, "JSON config file mirroring flag names");
  encode_sub->add_option("--entity", encode_cmd.entity, "vertex | edge (default vertex)");
  encode_sub->add_option("--out", encode_cmd.out, "feature matrix output path")->required();
  encode_sub->add_option("--schema-out", encode_cmd.schema_out, "write the inferred schema JSON here");
  encode_sub->add_option("--include", encode_cmd.include_raw,
                         "labels / property keys to keep (comma separated; '' = none)");

  TrainCmd train_cmd;
  CLI::App* train_sub = app.add_subcommand("train", "fit a node-level model and report metrics");
  add_input_flags(train_sub, train_cmd.io);
  add_schema_flags(train_sub, train_cmd.schema);
  add_train_flags(train_sub, train_cmd.train);
  train_sub->add_option("--config", train_cmd.config_path, "JSON config file mirroring flag names");
  train_sub->add_option("--task", train_cmd.task, "node-class | node-reg");
  train_sub->add_option("--target", train_cmd.target, "label or property key to predict");
  train_sub->add_option("--target-kind", train_cmd.target_kind, "label | property (default property)");
  train_sub->add_option("--out", train_cmd.out, "output prefix (default train_run)");
  train_sub->add_option("--include", train_cmd.include_raw, "restrict input features to these blocks");
  train_sub->add_flag("--degree-feature", train_cmd.degree_feature,
                      "structure-only runs see normalized degree instead of a constant");
  train_sub->add_option("--seed", train_cmd.seed, "RNG seed (default 0, or LPGKIT_SEED)");

  CompleteCmd complete_cmd;
  CLI::App* complete_sub = app.add_subcommand("complete", "hold out a label/property and predict it");
  add_input_flags(complete_sub, complete_cmd.io);
  add_schema_flags(complete_sub, complete_cmd.schema);
  add_train_flags(complete_sub, complete_cmd.train);
  complete_sub->add_option("--config", complete_cmd.config_path, "JSON config file mirroring flag names");
  complete_sub->add_option("--kind", complete_cmd.kind, "label | property");
  complete_sub->add_option("--task", complete_cmd.task, "node-class | node-reg (property targets)");
  complete_sub->add_option("--target", complete_cmd.target, "label or property key to complete");
  complete_sub->add_option("--out", complete_cmd.out, "output prefix (default complete_run)");
  complete_sub->add_option("--seed", complete_cmd.seed, "RNG seed (default 0, or LPGKIT_SEED)");

  AblateCmd ablate_cmd;
  CLI::App* ablate_sub = app.add_subcommand("ablate", "per-feature (and pairwise) contribution sweep");
  add_input_flags(ablate_sub, ablate_cmd.io);
  add_schema_flags(ablate_sub, ablate_cmd.schema);
  add_train_flags(ablate_sub, ablate_cmd.train);
  ablate_sub->add_option("--config", ablate_cmd.config_path, "JSON config file mirroring flag names");
  ablate_sub->add_option("--task", ablate_cmd.task, "node-class | node-reg");
  ablate_sub->add_option("--target", ablate_cmd.target, "label or property key to predict");
  ablate_sub->add_option("--target-kind", ablate_cmd.target_kind, "label | property (default property)");
  ablate_sub->add_option("--out", ablate_cmd.out, "output prefix (default ablation)");
  ablate_sub->add_flag("--pairs", ablate_cmd.pairs, "also sweep unordered key pairs");
  ablate_sub->add_flag("--degree-feature", ablate_cmd.degree_feature,
                       "structure-only cells see normalized degree instead of a constant");
  ablate_sub->add_option("--repeats", ablate_cmd.repeats, "training repeats per cell (default 5)");
  ablate_sub->add_option("--jobs", ablate_cmd.jobs, "worker pool size (default: logical cores)");
  ablate_sub->add_option("--seed", ablate_cmd.seed, "RNG seed (default 0, or LPGKIT_SEED)");

  SynthCmd synth_cmd;
  CLI::App* synth_sub = app.add_subcommand("synth", "generate a planted-signal benchmark fixture");
  synth_sub->add_option("--spec", synth_cmd.spec_path, "PlantedSpec JSON (defaults apply to missing keys)");
  synth_sub->add_option("--config", synth_cmd.config_path, "JSON config file mirroring flag names");
  synth_sub->add_option("--out", synth_cmd.out, "output directory")->required();
  synth_sub->add_option("--seed", synth_cmd.seed, "RNG seed override");

  CLI11_PARSE(app, argc, argv);

  try {
    if (stats_sub->parsed()) return run_stats(*stats_sub, stats_cmd);
    if (encode_sub->parsed()) return run_encode(*encode_sub, encode_cmd);
    if (train_sub->parsed()) return run_train(*train_sub, train_cmd);
    if (complete_sub->parsed()) return run_complete(*complete_sub, complete_cmd);
    if (ablate_sub->parsed()) return run_ablate(*ablate_sub, ablate_cmd);
    if (synth_sub->parsed()) return run_synth(*synth_sub, synth_cmd);
  } catch (const lpgkit::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
