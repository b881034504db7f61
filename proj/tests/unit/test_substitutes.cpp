#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "bfs/embedding.hpp"
#include "bfs/error.hpp"
#include "bfs/substitutes.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace bfs;
using fixtures::product;

namespace {

std::vector<Product> pen_catalog() {
  return {product("p1", "parker jotter fountain pen blue", "pens"),
          product("p2", "parker jotter fountain pen black", "pens"),
          product("p3", "parker jotter fountain pen red", "pens"),
          product("n1", "spiral notebook a5 ruled", "paper"),
          product("n2", "spiral notebook a4 ruled", "paper"),
          product("n3", "spiral notebook a5 dotted", "paper")};
}

// Embedding table over random unit vectors quantized to a coarse grid so that
// exact cosine ties occur.
EmbeddingTable random_table(std::mt19937_64& rng, std::size_t n, std::size_t dim,
                            std::vector<std::string>& ids,
                            std::vector<std::vector<double>>& rows) {
  std::uniform_int_distribution<int> level(-2, 2);
  EmbeddingTable table(dim);
  ids.clear();
  rows.clear();
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> v(dim);
    double norm = 0.0;
    do {
      norm = 0.0;
      for (double& x : v) {
        x = level(rng);
        norm += x * x;
      }
    } while (norm == 0.0);
    for (double& x : v) x /= std::sqrt(norm);
    char id[16];
    std::snprintf(id, sizeof id, "id%05zu", (i * 7919) % 100000);
    ids.emplace_back(id);
    rows.push_back(v);
    table.add({ProductId(id), v});
  }
  return table;
}

}  // namespace

TEST_CASE("embeddings are unit length and deterministic") {
  const Product p = product("a", "Parker Jotter Fountain Pen", "pens");
  const ProductEmbedding e1 = embed_product(p);
  const ProductEmbedding e2 = embed_product(p);
  CHECK(e1.vector == e2.vector);
  CHECK(e1.vector.size() == kDefaultEmbeddingDim);
  CHECK(dot(e1.vector, e1.vector) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("similar titles embed closer than unrelated ones") {
  const EmbeddingTable t = EmbeddingTable::build(pen_catalog());
  CHECK(t.cosine(ProductId("p1"), ProductId("p2")) > t.cosine(ProductId("p1"), ProductId("n1")));
  CHECK_THROWS_AS(t.index_of(ProductId("zz")), LookupError);
}

TEST_CASE("embedding table rejects duplicates and dimension mismatches") {
  EmbeddingTable t(4);
  t.add({ProductId("a"), {1, 0, 0, 0}});
  CHECK_THROWS_AS(t.add({ProductId("a"), {0, 1, 0, 0}}), InputError);
  CHECK_THROWS_AS(t.add({ProductId("b"), {1, 0, 0}}), InputError);
}

TEST_CASE("knn excludes the seed and orders by cosine then id") {
  const EmbeddingTable t = EmbeddingTable::build(pen_catalog());
  const auto hits = knn_candidates(ProductId("p1"), t, 3);
  REQUIRE(hits.size() == 3);
  for (const auto& h : hits) CHECK(h.candidate != ProductId("p1"));
  CHECK(hits[0].cosine >= hits[1].cosine);
  CHECK(knn_candidates(ProductId("p1"), t, 100).size() == 5);
  CHECK_THROWS_AS(knn_candidates(ProductId("p1"), t, 0), InputError);
}

TEST_CASE("knn matches a full-sort oracle, ties included") {
  std::mt19937_64 rng(17);
  std::vector<std::string> ids;
  std::vector<std::vector<double>> rows;
  for (int trial = 0; trial < 20; ++trial) {
    const EmbeddingTable t = random_table(rng, 60 + 10 * trial, 3, ids, rows);
    for (std::size_t seed = 0; seed < ids.size(); seed += 7) {
      const auto got = knn_candidates(ProductId(ids[seed]), t, 12);
      const auto want = oracle::knn(ids, rows, seed, 12);
      REQUIRE(got.size() == want.size());
      for (std::size_t i = 0; i < got.size(); ++i) {
        CHECK(got[i].candidate.str() == want[i].id);
        CHECK(got[i].cosine == want[i].cosine);
      }
    }
  }
}

TEST_CASE("pair classifier separates substitutes from non-substitutes") {
  const std::vector<Product> catalog = pen_catalog();
  const EmbeddingTable t = EmbeddingTable::build(catalog, 64);
  std::vector<LabeledPair> pairs;
  for (int rep = 0; rep < 5; ++rep) {
    for (const Product& a : catalog) {
      for (const Product& b : catalog) {
        if (a.id == b.id) continue;
        pairs.push_back({{a.id, b.id, t.cosine(a.id, b.id), std::nullopt},
                         a.category == b.category ? 1 : 0});
      }
    }
  }
  const TrainedClassifier trained = train_pair_classifier(pairs, t, 200, 1.0, 0.8);
  const auto& loss = trained.report.loss_history;
  REQUIRE(loss.size() >= 2);
  for (std::size_t i = 1; i < loss.size(); ++i) CHECK(loss[i] <= loss[i - 1] + 1e-12);
  CHECK(loss.back() < loss.front());
  CHECK_FALSE(trained.report.threshold_fallback);
  CHECK(trained.report.holdout_precision >= 0.8);
  const auto& clf = trained.classifier;
  const double same = clf.score(t.vector(ProductId("p1")), t.vector(ProductId("p2")));
  const double cross = clf.score(t.vector(ProductId("p1")), t.vector(ProductId("n1")));
  CHECK(same > cross);
  CHECK(clf.accepts(same));
  CHECK_FALSE(clf.accepts(cross));
}

TEST_CASE("pair classifier rejects single-class data and bad settings") {
  const std::vector<Product> catalog = pen_catalog();
  const EmbeddingTable t = EmbeddingTable::build(catalog, 32);
  std::vector<LabeledPair> pairs{{{ProductId("p1"), ProductId("p2"), 0.9, std::nullopt}, 1},
                                 {{ProductId("p1"), ProductId("p3"), 0.9, std::nullopt}, 1}};
  CHECK_THROWS_AS(train_pair_classifier(pairs, t, 10, 1.0, 0.8), TrainingError);
  pairs[1].label = 0;
  CHECK_THROWS_AS(train_pair_classifier(pairs, t, 10, 1.0, 1.0), ConfigError);
  CHECK_THROWS_AS(train_pair_classifier(pairs, t, 10, 0.0, 0.8), ConfigError);
}

TEST_CASE("unattainable precision target falls back to 0.5 and is flagged") {
  const std::vector<Product> catalog = pen_catalog();
  const EmbeddingTable t = EmbeddingTable::build(catalog, 32);
  // Identical pairs carry both labels, so no threshold can be precise.
  std::vector<LabeledPair> pairs;
  for (int i = 0; i < 20; ++i) {
    pairs.push_back({{ProductId("p1"), ProductId("n1"), 0.0, std::nullopt}, i % 2});
  }
  const TrainedClassifier trained = train_pair_classifier(pairs, t, 20, 1.0, 0.9);
  CHECK(trained.report.threshold_fallback);
  CHECK(trained.classifier.threshold == 0.5);
}

TEST_CASE("attribute post-filter enforces category and required attributes") {
  std::vector<Product> catalog = pen_catalog();
  catalog[1].attributes["color"] = "blue";
  const CatalogIndex index(catalog);
  std::vector<CandidatePair> pairs{{ProductId("p1"), ProductId("p2"), 0.9, 0.9},
                                   {ProductId("p1"), ProductId("p3"), 0.8, 0.8},
                                   {ProductId("p1"), ProductId("n1"), 0.7, 0.7}};
  CHECK(attribute_post_filter(pairs, index, {}).size() == 2);
  const std::vector<std::string> color{"color"};
  const auto kept = attribute_post_filter(pairs, index, color);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].candidate == ProductId("p3"));
}

TEST_CASE("lookup table respects size, category and self-exclusion") {
  const std::vector<Product> catalog = pen_catalog();
  const EmbeddingTable t = EmbeddingTable::build(catalog, 32);
  PairClassifier accept_all{std::vector<double>(96, 0.0), 5.0, 0.5};
  SubstituteParams params;
  params.k = 5;
  params.max_substitutes = 1;
  const LookupTable table = build_lookup_table(catalog, t, accept_all, params);
  CHECK(table.size() == catalog.size());
  const CatalogIndex index(catalog);
  for (const auto& [seed, set] : table) {
    CHECK(set.substitutes.size() <= 1);
    for (const Substitute& s : set.substitutes) {
      CHECK(s.id != seed);
      CHECK(index.at(s.id).category == index.at(seed).category);
    }
  }
  PairClassifier reject_all{std::vector<double>(96, 0.0), -5.0, 0.5};
  for (const auto& [seed, set] : build_lookup_table(catalog, t, reject_all, params)) {
    CHECK(set.substitutes.empty());
  }
  PairClassifier wrong_dim{std::vector<double>(30, 0.0), 0.0, 0.5};
  CHECK_THROWS_AS(build_lookup_table(catalog, t, wrong_dim, params), ConsistencyError);
}

TEST_CASE("lookup table files round-trip") {
  fixtures::TempDir dir("lookup");
  LookupTable table;
  table[ProductId("a")] = {ProductId("a"), {{ProductId("b"), 0.75}, {ProductId("c"), 0.125}}};
  table[ProductId("b")] = {ProductId("b"), {}};
  write_lookup_table(dir.path() / "t.jsonl", table);
  CHECK(read_lookup_table(dir.path() / "t.jsonl") == table);
}

TEST_CASE("classifier json round-trips") {
  PairClassifier c{{0.5, -0.25, 1.0}, 0.1, 0.7};
  const PairClassifier back = Json(c).get<PairClassifier>();
  CHECK(back.weights == c.weights);
  CHECK(back.bias == c.bias);
  CHECK(back.threshold == c.threshold);
}
