// Tests for the training loop: subgraph sampling, determinism, the
// full-batch equivalence, zero-rate freezing, best-epoch selection, loss
// descent on a planted-signal fixture, and configuration validation.

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lpgkit/sampling.hpp"
#include "lpgkit/synth.hpp"
#include "lpgkit/tasks.hpp"
#include "lpgkit/trainer.hpp"

using namespace lpgkit;

namespace {

template <typename F>
ErrorCode thrown_code(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  throw std::runtime_error("expected an lpgkit::Error, got none");
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Small planted fixture with every signal turned on; strong enough that a
// dozen epochs visibly move the loss.
struct TrainSetup {
  PropertyGraph graph;
  CompletionTask task;
  FeatureMatrix features;
  SplitMasks splits;
  ModelConfig model;
  TrainConfig train_cfg;
};

TrainSetup make_setup(size_t n = 240, uint64_t seed = 1) {
  PlantedSpec spec;
  spec.n = n;
  spec.intra_p = 0.05;
  spec.inter_p = 0.005;
  spec.seed = 7;
  PlantedFixture fixture = generate(spec);

  TrainSetup s;
  s.graph = std::move(fixture.graph);
  s.task = build_completion_task(s.graph, TaskKind::Classification, spec.class_key, false);
  const EncodingSchema schema = build_task_schema(s.graph, s.task);
  s.features = build_config_features(s.graph, schema, config_all(schema).include);
  s.splits = make_splits(s.graph, SplitRatios{}, 0);
  s.model.kind = GnnKind::Gcn;
  s.model.hidden = 16;
  s.model.heads = 4;
  s.model.out_dim = s.task.num_classes;
  s.train_cfg.epochs = 12;
  s.train_cfg.batch_size = 8;
  s.train_cfg.seed = seed;
  return s;
}

Csr path_csr(size_t n) {
  Csr csr;
  csr.offsets.assign(n + 1, 0);
  for (size_t i = 0; i < n; ++i) {
    if (i > 0) csr.targets.push_back(i - 1);
    if (i + 1 < n) csr.targets.push_back(i + 1);
    csr.offsets[i + 1] = csr.targets.size();
  }
  return csr;
}

}  // namespace

// ---------------------------------------------------------------------------
// node-subgraph sampler

TEST(Sampler, SingleNodeKeepsOnlyItsLoop) {
  Rng rng(5);
  const SampledSubgraph sub = sample_node_subgraph(path_csr(6), true, 1, rng);
  ASSERT_EQ(sub.nodes.size(), 1u);
  ASSERT_EQ(sub.adjacency.loops.targets, std::vector<size_t>{0});
  EXPECT_DOUBLE_EQ(sub.adjacency.weights[0], 1.0);
}

TEST(Sampler, WholeGraphSampleIsTheGraph) {
  Rng rng(5);
  const Csr full = path_csr(6);
  const SampledSubgraph sub = sample_node_subgraph(full, true, 6, rng);
  std::vector<size_t> want(6);
  std::iota(want.begin(), want.end(), size_t{0});
  EXPECT_EQ(sub.nodes, want);
  EXPECT_EQ(sub.adjacency.raw.targets, full.targets);
  EXPECT_EQ(sub.adjacency.raw.offsets, full.offsets);
}

TEST(Sampler, OversizedRequestRejected) {
  Rng rng(5);
  EXPECT_EQ(thrown_code([&] { sample_node_subgraph(path_csr(4), true, 5, rng); }), ErrorCode::InvalidConfig);
}

TEST(Sampler, DrawsAreRoughlyUniform) {
  Rng rng(17);
  const Csr full = path_csr(10);
  std::vector<size_t> hits(10, 0);
  const int draws = 10000;
  for (int d = 0; d < draws; ++d) {
    for (size_t v : sample_node_subgraph(full, true, 3, rng).nodes) hits[v] += 1;
  }
  // expectation is 3000 per vertex; a generous band still catches bias
  for (size_t v = 0; v < 10; ++v) {
    EXPECT_GT(hits[v], 2500u) << "vertex " << v;
    EXPECT_LT(hits[v], 3500u) << "vertex " << v;
  }
}

// ---------------------------------------------------------------------------
// training loop behavior

TEST(Trainer, LossDescendsOnPlantedSignal) {
  for (GnnKind kind : {GnnKind::Gcn, GnnKind::Gin, GnnKind::Gat}) {
    TrainSetup s = make_setup();
    s.model.kind = kind;
    const TrainResult res = train(s.graph, s.features, s.task.targets, s.splits, s.model, s.train_cfg);
    ASSERT_EQ(res.report.epochs.size(), 12u);
    const double first = res.report.epochs.front().train_loss;
    const double last = res.report.epochs.back().train_loss;
    EXPECT_LT(last, 0.5 * first) << gnn_kind_name(kind) << ": " << first << " -> " << last;
  }
}

TEST(Trainer, SameSeedReproducesTheRun) {
  TrainSetup s = make_setup();
  const TrainResult a = train(s.graph, s.features, s.task.targets, s.splits, s.model, s.train_cfg);
  const TrainResult b = train(s.graph, s.features, s.task.targets, s.splits, s.model, s.train_cfg);
  ASSERT_EQ(a.report.epochs.size(), b.report.epochs.size());
  for (size_t e = 0; e < a.report.epochs.size(); ++e) {
    EXPECT_EQ(a.report.epochs[e].lr, b.report.epochs[e].lr);
    EXPECT_EQ(a.report.epochs[e].train_loss, b.report.epochs[e].train_loss);
    EXPECT_EQ(a.report.epochs[e].val_metric, b.report.epochs[e].val_metric);
  }
  EXPECT_EQ(a.report.best_epoch, b.report.best_epoch);
  EXPECT_EQ(a.report.test_metric, b.report.test_metric);

  const auto pa = std::filesystem::temp_directory_path() / "lpgkit_report_a.csv";
  const auto pb = std::filesystem::temp_directory_path() / "lpgkit_report_b.csv";
  write_report_csv(a.report, pa.string());
  write_report_csv(b.report, pb.string());
  EXPECT_EQ(slurp(pa), slurp(pb));
  std::filesystem::remove(pa);
  std::filesystem::remove(pb);
}

TEST(Trainer, DifferentSeedsDiverge) {
  TrainSetup s = make_setup();
  const TrainResult a = train(s.graph, s.features, s.task.targets, s.splits, s.model, s.train_cfg);
  s.train_cfg.seed = 2;
  const TrainResult b = train(s.graph, s.features, s.task.targets, s.splits, s.model, s.train_cfg);
  EXPECT_NE(a.report.epochs.front().train_loss, b.report.epochs.front().train_loss);
}

TEST(Trainer, FullBatchMatchesWholeGraphSubgraph) {
  TrainSetup s = make_setup(200);
  s.train_cfg.epochs = 5;
  s.train_cfg.batch_size = 4;
  s.train_cfg.sampler = SamplerKind::FullBatch;
  const TrainResult full = train(s.graph, s.features, s.task.targets, s.splits, s.model, s.train_cfg);
  s.train_cfg.sampler = SamplerKind::NodeSubgraph;
  s.train_cfg.nodes_per_batch = 200;  // the whole graph, via the sampler path
  const TrainResult sub = train(s.graph, s.features, s.task.targets, s.splits, s.model, s.train_cfg);
  ASSERT_EQ(full.report.epochs.size(), sub.report.epochs.size());
  for (size_t e = 0; e < full.report.epochs.size(); ++e) {
    EXPECT_EQ(full.report.epochs[e].train_loss, sub.report.epochs[e].train_loss);
    EXPECT_EQ(full.report.epochs[e].val_metric, sub.report.epochs[e].val_metric);
  }
  EXPECT_EQ(full.report.test_metric, sub.report.test_metric);
}

TEST(Trainer, ZeroLearningRateFreezesInitialization) {
  TrainSetup s = make_setup(120);
  s.train_cfg.epochs = 4;
  s.train_cfg.adam.lr0 = 0.0;
  const TrainResult res = train(s.graph, s.features, s.task.targets, s.splits, s.model, s.train_cfg);

  // every epoch evaluates the untouched initialization
  for (const auto& row : res.report.epochs) {
    EXPECT_EQ(row.val_metric, res.report.epochs.front().val_metric);
  }

  // and that initialization is exactly GnnModel(cfg, Rng(seed))
  ModelConfig mc = s.model;
  mc.in_dim = s.features.cols;
  Rng rng(s.train_cfg.seed);
  GnnModel fresh(mc, rng);
  const NormalizedAdjacency adj = build_normalized_adjacency(s.graph);
  const DenseMatrix x = to_dense(s.features);
  const std::vector<size_t> val_rows = [&] {
    std::vector<size_t> rows;
    for (VertexId id : s.splits.val) rows.push_back(id);  // ids are 0..n-1 here
    std::sort(rows.begin(), rows.end());
    return rows;
  }();
  EXPECT_EQ(res.report.epochs.front().val_metric, evaluate(fresh, adj, x, s.task.targets, val_rows));
}

TEST(Trainer, BestEpochTracksStrictValidationImprovement) {
  TrainSetup s = make_setup();
  const TrainResult res = train(s.graph, s.features, s.task.targets, s.splits, s.model, s.train_cfg);
  double best = -1.0;
  size_t best_epoch = 0;
  for (const auto& row : res.report.epochs) {
    if (row.val_metric > best) {  // strict: ties keep the earlier epoch
      best = row.val_metric;
      best_epoch = row.epoch;
    }
  }
  EXPECT_EQ(res.report.best_val_metric, best);
  EXPECT_EQ(res.report.best_epoch, best_epoch);
}

TEST(Trainer, SparseTrainMaskSurvivesEmptyBatches) {
  TrainSetup s = make_setup(60);
  // leave one vertex per split role; 2-node samples will often miss it
  s.splits.train = {0};
  s.splits.val = {1};
  s.splits.test = {2};
  s.train_cfg.epochs = 2;
  s.train_cfg.batch_size = 6;
  s.train_cfg.nodes_per_batch = 2;
  const TrainResult res = train(s.graph, s.features, s.task.targets, s.splits, s.model, s.train_cfg);
  EXPECT_EQ(res.report.epochs.size(), 2u);
  for (const auto& row : res.report.epochs) {
    EXPECT_TRUE(std::isfinite(row.train_loss));
  }
}

// ---------------------------------------------------------------------------
// validation of bad configurations

TEST(Trainer, RejectsBadConfigurations) {
  TrainSetup s = make_setup(60);

  TrainConfig zero_epochs = s.train_cfg;
  zero_epochs.epochs = 0;
  EXPECT_EQ(thrown_code([&] { train(s.graph, s.features, s.task.targets, s.splits, s.model, zero_epochs); }),
            ErrorCode::InvalidConfig);

  TrainConfig negative_lr = s.train_cfg;
  negative_lr.adam.lr0 = -0.1;
  EXPECT_EQ(thrown_code([&] { train(s.graph, s.features, s.task.targets, s.splits, s.model, negative_lr); }),
            ErrorCode::InvalidConfig);

  FeatureMatrix empty_cols(s.features.rows, 0);
  empty_cols.ids = s.features.ids;
  EXPECT_EQ(thrown_code([&] { train(s.graph, empty_cols, s.task.targets, s.splits, s.model, s.train_cfg); }),
            ErrorCode::InvalidConfig);

  FeatureMatrix short_rows(s.features.rows - 1, s.features.cols);
  EXPECT_EQ(thrown_code([&] { train(s.graph, short_rows, s.task.targets, s.splits, s.model, s.train_cfg); }),
            ErrorCode::RowMismatch);

  ModelConfig no_out = s.model;
  no_out.out_dim = 0;
  EXPECT_EQ(thrown_code([&] { train(s.graph, s.features, s.task.targets, s.splits, no_out, s.train_cfg); }),
            ErrorCode::InvalidConfig);

  SplitMasks empty_val = s.splits;
  empty_val.val.clear();
  EXPECT_EQ(thrown_code([&] { train(s.graph, s.features, s.task.targets, empty_val, s.model, s.train_cfg); }),
            ErrorCode::EmptyMask);

  Targets holey = s.task.targets;
  holey.has[*s.splits.train.begin()] = 0;
  EXPECT_EQ(thrown_code([&] { train(s.graph, s.features, holey, s.splits, s.model, s.train_cfg); }),
            ErrorCode::UnknownTarget);

  Targets misaligned = s.task.targets;
  misaligned.has.pop_back();
  EXPECT_EQ(thrown_code([&] { train(s.graph, s.features, misaligned, s.splits, s.model, s.train_cfg); }),
            ErrorCode::RowMismatch);
}

// ---------------------------------------------------------------------------
// report serialization

TEST(Trainer, ReportCsvUsesShortestRoundTripNumbers) {
  TrainReport report;
  report.epochs.push_back({1, 0.01, 1.3862943611198906, 0.25});
  report.epochs.push_back({2, 0.005, 0.5, 1.0});
  const auto path = std::filesystem::temp_directory_path() / "lpgkit_report_fmt.csv";
  write_report_csv(report, path.string());
  EXPECT_EQ(slurp(path),
            "epoch,lr,train_loss,val_metric\n"
            "1,0.01,1.3862943611198906,0.25\n"
            "2,0.005,0.5,1\n");
  std::filesystem::remove(path);
}

TEST(Trainer, ReportJsonCarriesSummary) {
  TrainReport report;
  report.epochs.push_back({1, 0.01, 1.0, 0.5});
  report.best_epoch = 1;
  report.best_val_metric = 0.5;
  report.test_metric = 0.75;
  const nlohmann::json j = report_to_json(report);
  EXPECT_EQ(j.at("epochs").get<size_t>(), 1u);
  EXPECT_EQ(j.at("best_epoch").get<size_t>(), 1u);
  EXPECT_DOUBLE_EQ(j.at("test_metric").get<double>(), 0.75);
}
