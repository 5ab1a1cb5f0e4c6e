// Tests for the interchange formats (LPG-JSONL, node/edge CSV pairs),
// dataset stats, and the train/val/test split makers.

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "lpgkit/csv.hpp"
#include "lpgkit/graph.hpp"
#include "lpgkit/jsonl.hpp"
#include "lpgkit/splits.hpp"
#include "lpgkit/stats.hpp"

using namespace lpgkit;

namespace {

const std::string kDataDir = LPGKIT_TEST_DATA_DIR;

template <typename F>
ErrorCode thrown_code(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  throw std::runtime_error("expected an lpgkit::Error, got none");
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Semantic equality: same directedness, ids, labels and properties.
// PropertyValue keeps the integer/real distinction, so this is strict.
void expect_same_graph(const PropertyGraph& a, const PropertyGraph& b) {
  EXPECT_EQ(a.directed(), b.directed());
  ASSERT_EQ(a.vertex_count(), b.vertex_count());
  ASSERT_EQ(a.edge_count(), b.edge_count());
  for (const auto& v : a.vertices()) {
    ASSERT_TRUE(b.has_vertex(v.id));
    const Vertex& w = b.vertex(v.id);
    EXPECT_EQ(v.labels, w.labels);
    EXPECT_EQ(v.properties, w.properties);
  }
  for (const auto& e : a.edges()) {
    ASSERT_TRUE(b.has_edge(e.id));
    const Edge& f = b.edge(e.id);
    EXPECT_EQ(e.src, f.src);
    EXPECT_EQ(e.dst, f.dst);
    EXPECT_EQ(e.labels, f.labels);
    EXPECT_EQ(e.properties, f.properties);
  }
}

// One vertex pair exercising every value kind plus a multi-valued key.
PropertyGraph make_kitchen_sink_graph() {
  PropertyGraph g;
  Vertex a;
  a.id = 0;
  a.labels.insert("Paper");
  a.add_property("year", PropertyValue::integer(2020));
  a.add_property("score", PropertyValue::real(0.125));
  a.add_property("open", PropertyValue::boolean(true));
  a.add_property("title", PropertyValue::text("graph systems"));
  a.add_property("embedding", PropertyValue::real_vector({0.5, -1.5, 2.0}));
  a.add_property("keywords", PropertyValue::text("graphs"));
  a.add_property("keywords", PropertyValue::text("vectors"));
  g.add_vertex(std::move(a));
  Vertex b;
  b.id = 1;
  g.add_vertex(std::move(b));
  Edge e;
  e.id = 0;
  e.src = 0;
  e.dst = 1;
  e.labels.insert("cites");
  e.add_property("weight", PropertyValue::real(1.0 / 3.0));
  g.add_edge(std::move(e));
  g.freeze();
  return g;
}

}  // namespace

// ---- LPG-JSONL ----

TEST(Jsonl, CitationsFixtureStats) {
  PropertyGraph g = load_lpg_jsonl(kDataDir + "/citations_mini.jsonl");
  const DatasetStats s = dataset_stats(g);
  EXPECT_EQ(s.n_vertices, 5u);
  EXPECT_EQ(s.n_edges, 4u);
  EXPECT_EQ(s.n_labels, 3u);  // author, article, venue
  EXPECT_EQ(s.n_property_keys, 7u);
  EXPECT_DOUBLE_EQ(s.label_vertex_fraction.at("author"), 0.4);
}

TEST(Jsonl, RoundTripIsSemanticallyIdenticalAndCanonical) {
  const PropertyGraph g = load_lpg_jsonl(kDataDir + "/citations_mini.jsonl");
  const std::string first = temp_path("lpgkit_rt1.jsonl");
  const std::string second = temp_path("lpgkit_rt2.jsonl");
  save_lpg_jsonl(g, first);
  const PropertyGraph g2 = load_lpg_jsonl(first);
  expect_same_graph(g, g2);
  // canonical writer: saving the reloaded graph reproduces the bytes
  save_lpg_jsonl(g2, second);
  EXPECT_EQ(read_file(first), read_file(second));
}

TEST(Jsonl, AllValueKindsAndMultiValuedRoundTrip) {
  const PropertyGraph g = make_kitchen_sink_graph();
  const std::string path = temp_path("lpgkit_kitchen.jsonl");
  save_lpg_jsonl(g, path);
  const PropertyGraph g2 = load_lpg_jsonl(path);
  expect_same_graph(g, g2);
  const Vertex& v = g2.vertex(0);
  EXPECT_EQ(v.properties.at("year").front().kind(), ValueKind::Integer);
  EXPECT_EQ(v.properties.at("score").front().kind(), ValueKind::Real);
  EXPECT_EQ(v.properties.at("open").front().kind(), ValueKind::Boolean);
  EXPECT_EQ(v.properties.at("title").front().kind(), ValueKind::Text);
  EXPECT_EQ(v.properties.at("embedding").front().kind(), ValueKind::RealVector);
  EXPECT_EQ(v.properties.at("keywords").size(), 2u);
}

TEST(Jsonl, EdgeRecordBeforeEndpointsLoads) {
  const std::string path = temp_path("lpgkit_order.jsonl");
  write_file(path,
             "{\"kind\":\"header\",\"version\":1,\"directed\":false}\n"
             "{\"kind\":\"edge\",\"id\":0,\"src\":0,\"dst\":1,\"labels\":[],\"props\":{}}\n"
             "{\"kind\":\"vertex\",\"id\":0,\"labels\":[],\"props\":{}}\n"
             "{\"kind\":\"vertex\",\"id\":1,\"labels\":[],\"props\":{}}\n");
  const PropertyGraph g = load_lpg_jsonl(path);
  EXPECT_EQ(g.vertex_count(), 2u);
  EXPECT_EQ(g.edge_count(), 1u);
  EXPECT_EQ(g.neighbors(0), std::vector<VertexId>{1});
}

TEST(Jsonl, SelfDescribingValueKinds) {
  // "year": true is unusual but the format is self-describing: it loads as
  // a Boolean property.
  const std::string path = temp_path("lpgkit_bool_year.jsonl");
  write_file(path,
             "{\"kind\":\"header\",\"version\":1,\"directed\":false}\n"
             "{\"kind\":\"vertex\",\"id\":0,\"labels\":[],\"props\":{\"year\":[true]}}\n");
  const PropertyGraph g = load_lpg_jsonl(path);
  EXPECT_EQ(g.vertex(0).properties.at("year").front().kind(), ValueKind::Boolean);
}

TEST(Jsonl, MalformedInputsFail) {
  const std::string path = temp_path("lpgkit_bad.jsonl");

  write_file(path, "{\"kind\":\"vertex\",\"id\":0}\n");
  EXPECT_EQ(thrown_code([&] { load_lpg_jsonl(path); }), ErrorCode::ParseError);  // missing header

  write_file(path, "{\"kind\":\"header\",\"version\":1}\nnot json\n");
  EXPECT_EQ(thrown_code([&] { load_lpg_jsonl(path); }), ErrorCode::ParseError);

  write_file(path, "{\"kind\":\"header\",\"version\":2}\n");
  EXPECT_EQ(thrown_code([&] { load_lpg_jsonl(path); }), ErrorCode::ParseError);  // unknown version

  write_file(path,
             "{\"kind\":\"header\",\"version\":1}\n"
             "{\"kind\":\"hyperedge\",\"id\":0}\n");
  EXPECT_EQ(thrown_code([&] { load_lpg_jsonl(path); }), ErrorCode::ParseError);  // unknown record kind

  write_file(path,
             "{\"kind\":\"header\",\"version\":1}\n"
             "{\"kind\":\"vertex\",\"labels\":[]}\n");
  EXPECT_EQ(thrown_code([&] { load_lpg_jsonl(path); }), ErrorCode::ParseError);  // vertex without id

  write_file(path,
             "{\"kind\":\"header\",\"version\":1}\n"
             "{\"kind\":\"vertex\",\"id\":0,\"props\":{\"x\":3}}\n");
  EXPECT_EQ(thrown_code([&] { load_lpg_jsonl(path); }), ErrorCode::ParseError);  // props values must be arrays

  EXPECT_EQ(thrown_code([&] { load_lpg_jsonl(temp_path("lpgkit_no_such_file.jsonl")); }), ErrorCode::IoError);
}

// ---- CSV pair ----

TEST(Csv, MiniFixtureLoads) {
  const PropertyGraph g = load_lpg_csv(kDataDir + "/mini_nodes.csv", kDataDir + "/mini_edges.csv",
                                       kDataDir + "/mini_manifest.json", /*directed=*/true);
  EXPECT_EQ(g.vertex_count(), 3u);
  EXPECT_EQ(g.edge_count(), 3u);

  const Vertex& v0 = g.vertex(0);
  EXPECT_EQ(v0.labels, (LabelSet{"person", "admin"}));
  EXPECT_EQ(v0.properties.at("display_name").front().as_text(), "Reyes, Ana");  // quoted comma survives
  EXPECT_EQ(v0.properties.at("age").front().as_integer(), 34);
  EXPECT_EQ(v0.properties.at("member").front().as_boolean(), true);
  EXPECT_EQ(v0.properties.at("embedding").front().as_real_vector(), (std::vector<double>{0.1, 0.2, 0.3}));

  EXPECT_EQ(v0.properties.at("intro").front().as_text(), "Says \"hola\" to everyone");  // doubled quotes
  EXPECT_EQ(g.vertex(2).properties.count("display_name"), 0u);  // empty cell means absent

  // no id column in the edge file: edges numbered by row order
  EXPECT_EQ(g.edge(0).src, 0u);
  EXPECT_EQ(g.edge(0).dst, 1u);
  EXPECT_EQ(g.edge(1).labels, (LabelSet{"follows", "blocks"}));
  EXPECT_EQ(g.edge(2).labels, LabelSet{});
  EXPECT_DOUBLE_EQ(g.edge(2).properties.at("weight").front().as_real(), 0.5);
}

TEST(Csv, UncoveredColumnRejected) {
  const std::string nodes = temp_path("lpgkit_nodes_extra.csv");
  write_file(nodes, "node_id,mystery\n0,x\n");
  EXPECT_EQ(thrown_code([&] {
              load_lpg_csv(nodes, kDataDir + "/mini_edges.csv", kDataDir + "/mini_manifest.json");
            }),
            ErrorCode::ManifestMismatch);
}

TEST(Csv, MissingIdColumnRejected) {
  const std::string nodes = temp_path("lpgkit_nodes_noid.csv");
  write_file(nodes, "kinds\nperson\n");
  EXPECT_EQ(thrown_code([&] {
              load_lpg_csv(nodes, kDataDir + "/mini_edges.csv", kDataDir + "/mini_manifest.json");
            }),
            ErrorCode::ManifestMismatch);
}

TEST(Csv, DanglingEdgeRejected) {
  const std::string edges = temp_path("lpgkit_edges_dangling.csv");
  write_file(edges, "from,to,kinds,weight\n0,99,,\n");
  EXPECT_EQ(thrown_code([&] {
              load_lpg_csv(kDataDir + "/mini_nodes.csv", edges, kDataDir + "/mini_manifest.json");
            }),
            ErrorCode::DanglingEndpoint);
}

TEST(Csv, BadCellsRejected) {
  const std::string nodes = temp_path("lpgkit_nodes_bad.csv");
  write_file(nodes, "node_id,kinds,display_name,age,score,member,intro,embedding\n0,,,thirty,,,,\n");
  EXPECT_EQ(thrown_code([&] {
              load_lpg_csv(nodes, kDataDir + "/mini_edges.csv", kDataDir + "/mini_manifest.json");
            }),
            ErrorCode::ParseError);
  write_file(nodes, "node_id,kinds,display_name,age,score,member,intro,embedding\n0,,,,,maybe,,\n");
  EXPECT_EQ(thrown_code([&] {
              load_lpg_csv(nodes, kDataDir + "/mini_edges.csv", kDataDir + "/mini_manifest.json");
            }),
            ErrorCode::ParseError);
}

TEST(Csv, RoundTripThroughJsonlKeepsStats) {
  const PropertyGraph g = load_lpg_csv(kDataDir + "/mini_nodes.csv", kDataDir + "/mini_edges.csv",
                                       kDataDir + "/mini_manifest.json", /*directed=*/true);
  const std::string path = temp_path("lpgkit_csv_rt.jsonl");
  save_lpg_jsonl(g, path);
  const PropertyGraph g2 = load_lpg_jsonl(path);
  expect_same_graph(g, g2);
  const DatasetStats a = dataset_stats(g);
  const DatasetStats b = dataset_stats(g2);
  EXPECT_EQ(a.n_vertices, b.n_vertices);
  EXPECT_EQ(a.n_edges, b.n_edges);
  EXPECT_EQ(a.n_labels, b.n_labels);
  EXPECT_EQ(a.n_property_keys, b.n_property_keys);
}

// ---- dataset stats ----

TEST(Stats, EmptyGraphIsAllZeros) {
  PropertyGraph g;
  const DatasetStats s = dataset_stats(g);
  EXPECT_EQ(s.n_vertices, 0u);
  EXPECT_EQ(s.n_edges, 0u);
  EXPECT_EQ(s.n_labels, 0u);
  EXPECT_EQ(s.n_property_keys, 0u);
  EXPECT_TRUE(s.label_vertex_fraction.empty());
}

TEST(Stats, LabelFractions) {
  PropertyGraph g;
  for (VertexId id = 0; id < 10; ++id) {
    Vertex v;
    v.id = id;
    v.labels.insert(id < 6 ? "author" : "article");
    g.add_vertex(std::move(v));
  }
  const DatasetStats s = dataset_stats(g);
  EXPECT_DOUBLE_EQ(s.label_vertex_fraction.at("author"), 0.6);
  EXPECT_DOUBLE_EQ(s.label_vertex_fraction.at("article"), 0.4);
}

// ---- splits ----

TEST(Splits, ExactApportionment) {
  std::vector<VertexId> ids(100);
  for (size_t i = 0; i < ids.size(); ++i) ids[i] = i;
  const SplitMasks m = make_splits(ids, {0.8, 0.1, 0.1}, 7);
  EXPECT_EQ(m.train.size(), 80u);
  EXPECT_EQ(m.val.size(), 10u);
  EXPECT_EQ(m.test.size(), 10u);
}

TEST(Splits, DeterministicAndPartitioning) {
  std::vector<VertexId> ids;
  for (VertexId i = 0; i < 103; ++i) ids.push_back(i * 3);  // non-contiguous ids
  const SplitMasks a = make_splits(ids, {0.6, 0.2, 0.2}, 11);
  const SplitMasks b = make_splits(ids, {0.6, 0.2, 0.2}, 11);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.val, b.val);
  EXPECT_EQ(a.test, b.test);
  // the three masks partition the id set
  EXPECT_EQ(a.train.size() + a.val.size() + a.test.size(), ids.size());
  std::set<VertexId> all(ids.begin(), ids.end());
  std::set<VertexId> joined = a.train;
  joined.insert(a.val.begin(), a.val.end());
  joined.insert(a.test.begin(), a.test.end());
  EXPECT_EQ(joined, all);
  // input order must not matter
  std::reverse(ids.begin(), ids.end());
  const SplitMasks c = make_splits(ids, {0.6, 0.2, 0.2}, 11);
  EXPECT_EQ(a.train, c.train);
}

TEST(Splits, BadRatiosRejected) {
  EXPECT_EQ(thrown_code([] { make_splits(std::vector<VertexId>{0, 1}, {0.5, 0.1, 0.1}, 0); }),
            ErrorCode::InvalidRatios);
  EXPECT_EQ(thrown_code([] { make_splits(std::vector<VertexId>{0, 1}, {1.2, -0.1, -0.1}, 0); }),
            ErrorCode::InvalidRatios);
}

TEST(Splits, StratifiedHistogramMatchesGlobal) {
  // 4 classes x 25 members; each split's class histogram must match the
  // global proportions to within one vertex per class.
  std::map<VertexId, int64_t> classes;
  for (VertexId id = 0; id < 100; ++id) classes[id] = static_cast<int64_t>(id % 4);
  const SplitMasks m = make_stratified_splits(classes, {0.6, 0.2, 0.2}, 3);
  for (int64_t c = 0; c < 4; ++c) {
    auto count = [&](const std::set<VertexId>& mask) {
      size_t k = 0;
      for (VertexId id : mask) {
        if (classes.at(id) == c) ++k;
      }
      return k;
    };
    EXPECT_NEAR(static_cast<double>(count(m.train)), 15.0, 1.0) << "class " << c;
    EXPECT_NEAR(static_cast<double>(count(m.val)), 5.0, 1.0) << "class " << c;
    EXPECT_NEAR(static_cast<double>(count(m.test)), 5.0, 1.0) << "class " << c;
  }
}

TEST(Splits, TinyClassRejected) {
  std::map<VertexId, int64_t> classes{{0, 0}, {1, 0}, {2, 0}, {3, 1}, {4, 1}};
  EXPECT_EQ(thrown_code([&] { make_stratified_splits(classes, {0.6, 0.2, 0.2}, 0); }), ErrorCode::EmptyClass);
}
