#pragma once

#include <algorithm>
#include <array>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lpgkit/error.hpp"
#include "lpgkit/graph.hpp"
#include "lpgkit/jsonl.hpp"
#include "lpgkit/rng.hpp"
#include "lpgkit/textfmt.hpp"

namespace lpgkit {

/// Recipe for a planted-signal benchmark graph: stochastic-block structure,
/// one categorical key that reveals the class with known reliability, one
/// scalar key with per-class mean separation, plus signal-free noise keys.
/// The achievable accuracy is analytic, which is what makes the fixture a
/// usable oracle.
struct PlantedSpec {
  size_t n = 2000;
  size_t classes = 4;
  double intra_p = 0.02;   // edge probability inside a class
  double inter_p = 0.002;  // edge probability across classes
  std::string planted_cat_key = "group";
  double rho = 0.9;  // P(planted categorical value reveals the class)
  std::string planted_scalar_key = "score";
  double scalar_separation = 3.0;  // class-mean gap in units of the noise std
  size_t noise_categorical = 1;
  size_t noise_scalar = 1;
  size_t noise_text = 1;
  double rho_label = 0.9;  // P(the single vertex label reveals the class)
  std::string class_key = "class";  // ground truth, stored for task targeting
  uint64_t seed = 0;
};

struct PlantedFixture {
  PropertyGraph graph;
  std::vector<int64_t> class_of;  // indexed by vertex id
  nlohmann::json certificate;
};

namespace detail {

inline const std::array<const char*, 24>& noise_word_pool() {
  static const std::array<const char*, 24> pool = {
      "amber", "basalt", "cedar",  "dune",   "ember",  "fjord",  "garnet", "harbor",
      "indigo", "juniper", "krill", "lichen", "meadow", "nectar", "onyx",   "pumice",
      "quartz", "reed",    "sage",  "tundra", "umber",  "vale",   "willow", "zephyr"};
  return pool;
}

}  // namespace detail

inline void validate_spec(const PlantedSpec& spec) {
  if (spec.classes < 2) fail(ErrorCode::InvalidSpec, "need at least two classes");
  if (spec.n < 3 * spec.classes) fail(ErrorCode::InvalidSpec, "graph too small for its class count");
  if (!(spec.rho > 0.5 && spec.rho <= 1.0)) fail(ErrorCode::InvalidSpec, "reliability must be in (0.5, 1]");
  if (!(spec.rho_label > 0.0 && spec.rho_label <= 1.0)) {
    fail(ErrorCode::InvalidSpec, "label reliability must be in (0, 1]");
  }
  if (!(spec.intra_p > spec.inter_p && spec.inter_p >= 0.0 && spec.intra_p <= 1.0)) {
    fail(ErrorCode::InvalidSpec, "edge probabilities need intra > inter >= 0");
  }
  if (spec.scalar_separation <= 0.0) fail(ErrorCode::InvalidSpec, "scalar separation must be positive");
}

/// Deterministic per seed. Classes cycle v mod C so they are exactly
/// balanced; every generator purpose draws from its own forked stream, so
/// adding a key leaves the others' draws untouched.
inline PlantedFixture generate(const PlantedSpec& spec) {
  validate_spec(spec);
  const size_t n = spec.n;
  const size_t C = spec.classes;

  Rng rng_edges = Rng(spec.seed).fork(1);
  Rng rng_label = Rng(spec.seed).fork(2);
  Rng rng_group = Rng(spec.seed).fork(3);
  Rng rng_score = Rng(spec.seed).fork(4);
  std::vector<Rng> rng_noise_cat, rng_noise_scalar, rng_noise_text;
  for (size_t i = 0; i < spec.noise_categorical; ++i) rng_noise_cat.push_back(Rng(spec.seed).fork(16 + i));
  for (size_t i = 0; i < spec.noise_scalar; ++i) rng_noise_scalar.push_back(Rng(spec.seed).fork(64 + i));
  for (size_t i = 0; i < spec.noise_text; ++i) rng_noise_text.push_back(Rng(spec.seed).fork(128 + i));

  PlantedFixture fixture;
  fixture.class_of.resize(n);
  PropertyGraph& g = fixture.graph;

  for (size_t v = 0; v < n; ++v) {
    const auto cls = static_cast<int64_t>(v % C);
    fixture.class_of[v] = cls;
    Vertex vert;
    vert.id = v;

    const size_t label_cls = rng_label.next_bernoulli(spec.rho_label)
                                 ? static_cast<size_t>(cls)
                                 : static_cast<size_t>(rng_label.next_below(C));
    vert.labels.insert("L" + std::to_string(label_cls));

    vert.add_property(spec.class_key, PropertyValue::integer(cls));

    const size_t group_cls = rng_group.next_bernoulli(spec.rho) ? static_cast<size_t>(cls)
                                                                : static_cast<size_t>(rng_group.next_below(C));
    vert.add_property(spec.planted_cat_key, PropertyValue::text("g" + std::to_string(group_cls)));

    vert.add_property(spec.planted_scalar_key,
                      PropertyValue::real(static_cast<double>(cls) * spec.scalar_separation +
                                          rng_score.next_normal()));

    for (size_t i = 0; i < spec.noise_categorical; ++i) {
      vert.add_property("noise_cat" + std::to_string(i),
                        PropertyValue::text("n" + std::to_string(rng_noise_cat[i].next_below(4))));
    }
    for (size_t i = 0; i < spec.noise_scalar; ++i) {
      vert.add_property("noise_val" + std::to_string(i), PropertyValue::real(rng_noise_scalar[i].next_normal()));
    }
    for (size_t i = 0; i < spec.noise_text; ++i) {
      const auto& pool = detail::noise_word_pool();
      const size_t len = 3 + rng_noise_text[i].next_below(6);
      std::string sentence;
      for (size_t w = 0; w < len; ++w) {
        if (w > 0) sentence.push_back(' ');
        sentence += pool[rng_noise_text[i].next_below(pool.size())];
      }
      vert.add_property("noise_text" + std::to_string(i), PropertyValue::text(sentence));
    }
    g.add_vertex(std::move(vert));
  }

  uint64_t edge_id = 0;
  for (size_t u = 0; u < n; ++u) {
    for (size_t v = u + 1; v < n; ++v) {
      const double p = fixture.class_of[u] == fixture.class_of[v] ? spec.intra_p : spec.inter_p;
      if (rng_edges.next_bernoulli(p)) {
        Edge e;
        e.id = edge_id++;
        e.src = u;
        e.dst = v;
        g.add_edge(std::move(e));
      }
    }
  }
  g.freeze();

  // ---- certificate ----
  const double property_bayes = spec.rho + (1.0 - spec.rho) / static_cast<double>(C);
  const double label_bayes = spec.rho_label + (1.0 - spec.rho_label) / static_cast<double>(C);
  // binary "does vertex carry label L_c" with the class fully known:
  // P(carry | class==c) = label_bayes, P(carry | class!=c) = (1-ρ_label)/C
  const double q_match = label_bayes;
  const double q_other = (1.0 - spec.rho_label) / static_cast<double>(C);
  const double pi = 1.0 / static_cast<double>(C);
  const double label_completion_bayes =
      pi * std::max(q_match, 1.0 - q_match) + (1.0 - pi) * std::max(q_other, 1.0 - q_other);

  // empirical structure bound: 1-hop majority vote with true neighbor classes
  size_t vote_hits = 0;
  for (size_t v = 0; v < n; ++v) {
    std::vector<size_t> counts(C, 0);
    for (size_t k = g.adjacency().offsets[v]; k < g.adjacency().offsets[v + 1]; ++k) {
      counts[static_cast<size_t>(fixture.class_of[g.adjacency().targets[k]])] += 1;
    }
    const size_t vote = static_cast<size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
    if (static_cast<int64_t>(vote) == fixture.class_of[v]) ++vote_hits;
  }

  double expected_edges = 0.0;
  std::vector<size_t> class_sizes(C, 0);
  for (size_t v = 0; v < n; ++v) class_sizes[v % C] += 1;
  double intra_pairs = 0.0;
  for (size_t c = 0; c < C; ++c) {
    intra_pairs += static_cast<double>(class_sizes[c]) * static_cast<double>(class_sizes[c] - 1) / 2.0;
  }
  const double all_pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  expected_edges = spec.intra_p * intra_pairs + spec.inter_p * (all_pairs - intra_pairs);

  nlohmann::json cert;
  cert["n"] = n;
  cert["classes"] = C;
  cert["seed"] = spec.seed;
  cert["rho"] = spec.rho;
  cert["rho_label"] = spec.rho_label;
  cert["intra_p"] = spec.intra_p;
  cert["inter_p"] = spec.inter_p;
  cert["planted_cat_key"] = spec.planted_cat_key;
  cert["planted_scalar_key"] = spec.planted_scalar_key;
  cert["class_key"] = spec.class_key;
  cert["property_bayes_accuracy"] = property_bayes;
  cert["label_bayes_accuracy"] = label_bayes;
  cert["label_completion_bayes_accuracy"] = label_completion_bayes;
  cert["structure_majority_accuracy"] = static_cast<double>(vote_hits) / static_cast<double>(n);
  cert["edge_count"] = g.edge_count();
  cert["expected_edge_count"] = expected_edges;
  fixture.certificate = std::move(cert);
  return fixture;
}

/// graph.jsonl + targets.csv + certificate.json under `dir` (must exist).
inline void write_fixture(const PlantedFixture& fixture, const std::string& dir) {
  save_lpg_jsonl(fixture.graph, dir + "/graph.jsonl");

  std::ofstream targets(dir + "/targets.csv");
  if (!targets) fail(ErrorCode::IoError, "cannot write " + dir + "/targets.csv");
  targets << "id,class\n";
  for (size_t v = 0; v < fixture.class_of.size(); ++v) targets << v << ',' << fixture.class_of[v] << '\n';
  if (!targets) fail(ErrorCode::IoError, "write failed for " + dir + "/targets.csv");

  std::ofstream cert(dir + "/certificate.json");
  if (!cert) fail(ErrorCode::IoError, "cannot write " + dir + "/certificate.json");
  cert << fixture.certificate.dump(2) << '\n';
  if (!cert) fail(ErrorCode::IoError, "write failed for " + dir + "/certificate.json");
}

}  // namespace lpgkit
