// Acceptance suite: one PASS/FAIL line per criterion; nonzero exit if any fail.
// Criterion numbers given as arguments restrict the run to those.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "bfs/boost.hpp"
#include "bfs/embedding.hpp"
#include "bfs/feature_store.hpp"
#include "bfs/hash.hpp"
#include "bfs/market_sim.hpp"
#include "bfs/metrics.hpp"
#include "bfs/pipeline.hpp"
#include "bfs/ranker.hpp"
#include "bfs/substitutes.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace bfs;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr double kAttentionTol = 1e-12;
constexpr double kSvTol = 1e-9;
constexpr double kFiniteDiffRelTol = 1e-5;
constexpr double kMinPrecision = 0.8;
constexpr double kMinRecall = 0.5;
constexpr double kMinNdcgSeparable = 0.99;
constexpr double kMinColdLift = 0.01;
constexpr double kMaxOverallDrop = -0.005;
constexpr double kMaxSecondsPerSeed = 300.0;
constexpr double kMinSpearman = 0.9;
const std::vector<std::uint64_t> kSeeds{1, 2, 3, 4, 5};

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::vector<double> dyadic_values(std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<std::int64_t> units(0, std::int64_t{1} << 30);
  std::uniform_int_distribution<int> coin(0, 9);
  std::vector<double> v(n);
  for (double& x : v) x = coin(rng) == 0 ? 0.0 : static_cast<double>(units(rng)) / 256.0;
  if (n > 1 && coin(rng) < 3) v[n - 1] = v[0];  // duplicates
  return v;
}

std::vector<double> unit_vector(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> g;
  std::vector<double> v(dim);
  double norm = 0.0;
  for (double& x : v) {
    x = g(rng);
    norm += x * x;
  }
  for (double& x : v) x /= std::sqrt(norm);
  return v;
}

// --- criterion 1 -------------------------------------------------------------

Outcome dominance() {
  std::mt19937_64 rng(101);
  std::size_t checked = 0;
  std::size_t violations = 0;
  for (int run = 0; run < 20; ++run) {
    const std::size_t n = 200 + 40 * static_cast<std::size_t>(run);
    std::vector<ProductId> ids;
    EmbeddingTable emb(16);
    FeatureSnapshot snap;
    std::exponential_distribution<double> sv(0.05);
    std::uniform_int_distribution<int> coin(0, 3);
    for (std::size_t i = 0; i < n; ++i) {
      ids.emplace_back("p" + std::to_string(i));
      emb.add({ids.back(), unit_vector(rng, 16)});
      snap.sv[ids.back()] = coin(rng) == 0 ? 0.0 : sv(rng);
    }
    std::uniform_int_distribution<std::size_t> size(0, 10);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    LookupTable table;
    for (std::size_t i = 0; i < n; ++i) {
      SubstituteSet set{ids[i], {}};
      const std::size_t m = size(rng);
      while (set.substitutes.size() < m) {
        const std::size_t j = pick(rng);
        if (j != i) set.substitutes.push_back({ids[j], 0.9});
      }
      table[ids[i]] = set;
    }
    for (const auto& s : {AggregationStrategy::mean(), AggregationStrategy::max(),
                          AggregationStrategy::percentile(0.75), AggregationStrategy::attention()}) {
      const auto [boosted, report] = boost_all(snap, table, s, &emb);
      for (const auto& [id, v] : boosted.sv) {
        ++checked;
        violations += boosted.sv_subs_of(id) < v;
      }
    }
  }
  return {violations == 0, std::to_string(checked) + " (product, strategy) values over 20 runs, " +
                               std::to_string(violations) + " with sv_subs < sv"};
}

// --- criterion 2 -------------------------------------------------------------

Outcome aggregation_oracles() {
  std::mt19937_64 rng(202);
  std::uniform_int_distribution<std::size_t> size(1, 10);
  std::uniform_real_distribution<double> q(0.0, 1.0);
  std::size_t exact_mismatch = 0;
  double worst_attention = 0.0;
  for (int trial = 0; trial < 10000; ++trial) {
    const std::vector<double> v = dyadic_values(rng, size(rng));
    const double qq = std::max(1e-3, q(rng));
    exact_mismatch += aggregate(v, AggregationStrategy::mean()) != oracle::mean(v);
    exact_mismatch += aggregate(v, AggregationStrategy::max()) != oracle::max(v);
    exact_mismatch +=
        aggregate(v, AggregationStrategy::percentile(qq)) != oracle::percentile(v, qq);
    exact_mismatch += aggregate(v, AggregationStrategy::percentile(0.75)) !=
                      oracle::percentile(v, 0.75);

    const std::vector<double> seed = unit_vector(rng, 12);
    std::vector<std::vector<double>> embs;
    for (std::size_t i = 0; i < v.size(); ++i) embs.push_back(unit_vector(rng, 12));
    std::vector<std::span<const double>> spans(embs.begin(), embs.end());
    const double got = aggregate(v, AggregationStrategy::attention(), seed, spans);
    const double want = oracle::attention(v, seed, embs);
    worst_attention = std::max(worst_attention, std::abs(got - want) / std::max(1.0, std::abs(want)));
  }
  return {exact_mismatch == 0 && worst_attention <= kAttentionTol,
          "10000 sets: " + std::to_string(exact_mismatch) +
              " mean/max/percentile mismatches; attention max rel err " +
              fmt("%.2e", worst_attention) + " (tol 1e-12)"};
}

// --- criterion 3 -------------------------------------------------------------

Outcome sv_oracle() {
  std::mt19937_64 rng(303);
  constexpr Timestamp as_of = 1'750'000'000;
  std::uniform_int_distribution<int> products(1, 8);
  std::uniform_int_distribution<int> count(0, 60);
  std::uniform_int_distribution<Timestamp> when(as_of - 45 * 86400, as_of);
  std::uniform_int_distribution<unsigned> qty(1, 5);
  std::uniform_int_distribution<int> action(0, 3);
  std::uniform_real_distribution<double> hl(0.5, 90.0);
  double worst = 0.0;
  std::size_t values = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    DecayConfig cfg;
    if (trial % 2 == 1) {
      const double w = std::uniform_real_distribution<double>(0.05, 0.95)(rng);
      cfg.half_lives_days = {hl(rng), hl(rng)};
      cfg.blend_weights = {w, 1.0 - w};
      cfg.window_days = std::uniform_real_distribution<double>(1.0, 45.0)(rng);
      cfg.count_quantity = trial % 4 == 1;
    }
    const int np = products(rng);
    std::vector<Product> catalog;
    for (int p = 0; p < np; ++p) catalog.push_back(fixtures::product("p" + std::to_string(p), "t", "c"));
    std::vector<InteractionEvent> events;
    std::vector<oracle::Event> plain;
    const int ne = count(rng);
    for (int e = 0; e < ne; ++e) {
      const std::string id = "p" + std::to_string(std::uniform_int_distribution<int>(0, np - 1)(rng));
      const auto a = static_cast<Action>(action(rng));
      const unsigned q = a == Action::Purchase ? qty(rng) : 0;
      const Timestamp t = e % 10 == 0 ? as_of - static_cast<Timestamp>(cfg.window_days * 86400) : when(rng);
      events.push_back({"u", ProductId(id), a, t, q});
      plain.push_back({id, a == Action::Purchase, t, q});
    }
    const FeatureSnapshot snap = build_snapshot(events, catalog, as_of, cfg);
    for (const Product& p : catalog) {
      const double want = oracle::decayed_sum(plain, p.id.str(), as_of, cfg.half_lives_days,
                                              cfg.blend_weights, cfg.window_days,
                                              cfg.count_quantity);
      worst = std::max(worst, std::abs(snap.sv_of(p.id) - want));
      ++values;
    }
  }
  return {worst <= kSvTol, "1000 event sets, " + std::to_string(values) +
                               " products: max abs err " + fmt("%.2e", worst) + " (tol 1e-9)"};
}

// --- criterion 4 -------------------------------------------------------------

Outcome knn_oracle() {
  std::mt19937_64 rng(404);
  const std::vector<std::string> words{"pen", "ink", "nib", "gold", "steel", "blue", "black",
                                       "fine", "broad", "case", "refill", "classic"};
  std::uniform_int_distribution<std::size_t> size(20, 1000);
  std::uniform_int_distribution<std::size_t> word(0, words.size() - 1);
  std::uniform_int_distribution<int> len(1, 4);
  std::size_t seeds_checked = 0;
  std::size_t mismatches = 0;
  std::size_t tie_groups = 0;
  for (int c = 0; c < 200; ++c) {
    const std::size_t n = size(rng);
    std::vector<Product> catalog;
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < n; ++i) {
      std::string title;
      const int l = len(rng);
      for (int w = 0; w < l; ++w) title += (w ? " " : "") + words[word(rng)];
      char id[24];
      std::snprintf(id, sizeof id, "k%06zu", (i * 104729) % 1000003);
      ids.emplace_back(id);
      catalog.push_back(fixtures::product(id, title, "cat" + std::to_string(i % 3)));
    }
    const EmbeddingTable emb = EmbeddingTable::build(catalog, 64);
    std::vector<std::vector<double>> rows;
    for (const std::string& id : ids) {
      const auto r = emb.vector(ProductId(id));
      rows.emplace_back(r.begin(), r.end());
    }
    for (std::size_t s = 0; s < n; s += std::max<std::size_t>(1, n / 10)) {
      const auto got = knn_candidates(ProductId(ids[s]), emb, 25);
      const auto want = oracle::knn(ids, rows, s, 25);
      bool same = got.size() == want.size();
      for (std::size_t i = 0; same && i < got.size(); ++i) {
        same = got[i].candidate.str() == want[i].id && got[i].cosine == want[i].cosine;
        if (i > 0 && want[i].cosine == want[i - 1].cosine) ++tie_groups;
      }
      mismatches += !same;
      ++seeds_checked;
    }
  }
  return {mismatches == 0, "200 catalogs, " + std::to_string(seeds_checked) + " seeds, " +
                               std::to_string(tie_groups) + " tied neighbours, " +
                               std::to_string(mismatches) + " mismatches"};
}

// --- criterion 6 -------------------------------------------------------------

Outcome ranker_sanity() {
  std::mt19937_64 rng(606);
  std::uniform_int_distribution<int> grade(0, kMaxGrade);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<QueryJudgment> judgments;
  FeatureTable features({"noise", "label_copy"});
  for (int q = 0; q < 100; ++q) {
    QueryJudgment j;
    j.query = "q" + std::to_string(q);
    for (int c = 0; c < 15; ++c) {
      const ProductId id("p" + std::to_string(q) + "_" + std::to_string(c));
      const int label = grade(rng);
      j.candidates.push_back(id);
      j.labels.push_back(label);
      j.logged_rank.push_back(c + 1);
      features.set(j.query, id, {u(rng), static_cast<double>(label)});
    }
    judgments.push_back(std::move(j));
  }
  TrainConfig cfg;
  cfg.num_trees = 50;
  const RankerModel model = train(judgments, features, cfg);
  const double ndcg = mean_ndcg(model, judgments, features);

  std::normal_distribution<double> s;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> scores(5);
    std::vector<int> labels(5);
    for (double& x : scores) x = s(rng);
    for (int& l : labels) l = grade(rng);
    const auto deltas = oracle::swap_deltas(scores, labels, 10);
    const auto fd = oracle::pairwise_gradient_fd(scores, labels, deltas);
    const auto got = lambda_gradients(scores, labels, 10);
    for (std::size_t i = 0; i < 5; ++i) {
      const double err = std::abs(got[i] - fd[i]);
      worst = std::max(worst, std::abs(fd[i]) < 1e-9 ? err : err / std::abs(fd[i]));
    }
  }
  return {ndcg >= kMinNdcgSeparable && worst <= kFiniteDiffRelTol,
          "label-equals-feature NDCG@10 " + fmt("%.4f", ndcg) + " (>= 0.99); lambda vs finite " +
              "differences max rel err " + fmt("%.2e", worst) + " (tol 1e-5)"};
}

// --- criteria 5, 7, 8, 9 ------------------------------------------------------

struct SeedRun {
  double seconds = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double knn_precision = 0.0;
  double classified_precision = 0.0;
  double cold_lift = 0.0;
  double share_delta = 0.0;
  double overall_delta = 0.0;
  double spearman_t2 = 0.0;
  bool low_decile_ok = true;
  std::string low_decile_detail;
};

std::vector<SeedRun> run_seeds(const fs::path& root) {
  std::vector<SeedRun> runs;
  for (std::uint64_t seed : kSeeds) {
    PipelineConfig cfg;
    cfg.sim.seed = seed;
    cfg.train.seed = seed;
    cfg.out_dir = root / ("seed_" + std::to_string(seed));
    const auto start = std::chrono::steady_clock::now();
    const RunManifest m = run_pipeline(cfg);
    SeedRun r;
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const Json& subs = m.summary.at("substitutes");
    r.precision = subs.at("final").at("precision").get<double>();
    r.recall = subs.at("final").at("recall").get<double>();
    r.knn_precision = subs.at("knn").at("precision").get<double>();
    r.classified_precision = subs.at("classified").at("precision").get<double>();
    for (const Json& model : m.summary.at("evaluation").at("models")) {
      if (model.at("model") != "T2") continue;
      r.cold_lift = model.at("vs_T1").at("ndcg_cold_start_rel_delta").get<double>();
      r.share_delta = model.at("vs_T1").at("cold_start_share_delta").get<double>();
      r.overall_delta = model.at("vs_T1").at("ndcg_all_rel_delta").get<double>();
    }
    const Json& report = m.summary.at("report");
    r.spearman_t2 = report.at("partial_dependence").at("T2").at("spearman").get<double>();
    for (const auto& [strategy, shift] : report.at("low_decile_shift").items()) {
      const double sv = shift.at("sv_fraction").get<double>();
      const double subs_frac = shift.at("sv_subs_fraction").get<double>();
      const bool ok = shift.at("products").get<std::size_t>() > 0 && subs_frac < sv;
      r.low_decile_ok = r.low_decile_ok && ok;
      r.low_decile_detail += " " + strategy + " " + fmt("%.3f", sv) + "->" + fmt("%.3f", subs_frac);
    }
    std::fprintf(stderr, "seed %llu: %.1fs\n", static_cast<unsigned long long>(seed), r.seconds);
    runs.push_back(r);
  }
  return runs;
}

template <typename F>
double median_of(const std::vector<SeedRun>& runs, F field) {
  std::vector<double> v;
  for (const SeedRun& r : runs) v.push_back(field(r));
  return median(v);
}

Outcome substitute_quality(const std::vector<SeedRun>& runs) {
  const double p = median_of(runs, [](const SeedRun& r) { return r.precision; });
  const double rc = median_of(runs, [](const SeedRun& r) { return r.recall; });
  const double knn = median_of(runs, [](const SeedRun& r) { return r.knn_precision; });
  const double cls = median_of(runs, [](const SeedRun& r) { return r.classified_precision; });
  return {p >= kMinPrecision && rc >= kMinRecall && cls > knn,
          "5-seed median precision " + fmt("%.3f", p) + " (>= 0.8), recall " + fmt("%.3f", rc) +
              " (>= 0.5), classifier-stage precision " + fmt("%.3f", cls) + " > kNN " +
              fmt("%.3f", knn)};
}

Outcome comparison_mechanism(const std::vector<SeedRun>& runs) {
  const double lift = median_of(runs, [](const SeedRun& r) { return r.cold_lift; });
  const double share = median_of(runs, [](const SeedRun& r) { return r.share_delta; });
  const double overall = median_of(runs, [](const SeedRun& r) { return r.overall_delta; });
  double slowest = 0.0;
  for (const SeedRun& r : runs) slowest = std::max(slowest, r.seconds);
  return {lift >= kMinColdLift && share > 0.0 && overall >= kMaxOverallDrop &&
              slowest <= kMaxSecondsPerSeed,
          "T2 vs T1 5-seed medians: cold-start NDCG@10 " + fmt("%+.2f%%", 100 * lift) +
              " (>= +1%), cold top-10 share " + fmt("%+.4f", share) + " (> 0), overall " +
              fmt("%+.2f%%", 100 * overall) + " (>= -0.5%); slowest seed " +
              fmt("%.1fs", slowest) + " (<= 300s)"};
}

Outcome low_decile(const std::vector<SeedRun>& runs) {
  bool ok = true;
  std::string detail = "lowest-decile fraction SV->SV_Subs per run:";
  for (std::size_t i = 0; i < runs.size(); ++i) {
    ok = ok && runs[i].low_decile_ok;
    detail += " [seed " + std::to_string(kSeeds[i]) + runs[i].low_decile_detail + "]";
  }
  return {ok, detail};
}

Outcome partial_dependence_trend(const std::vector<SeedRun>& runs) {
  const double rho = median_of(runs, [](const SeedRun& r) { return r.spearman_t2; });
  return {rho > kMinSpearman, "5-seed median Spearman of T2 score vs SV_Subs grid " +
                                  fmt("%.3f", rho) + " (> 0.9)"};
}

// --- criterion 10 -------------------------------------------------------------

// A pen aisle at the scale of the reported case: established pens sell in
// proportion to their cluster's appeal, new launches have barely sold, and
// relevance follows appeal. T1 and T2 are trained on it; the case query then
// holds a new pen (SV 89, substitutes averaging 297, rating 4.7, middling text
// match) among established competitors.
Outcome fountain_pen_case() {
  std::mt19937_64 rng(1010);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);
  const std::vector<std::string> schema{"text_match", "category_match", "price_score", "rating"};
  FeatureTable base(schema);
  FeatureSnapshot snap;
  snap.sv_subs.emplace();
  std::vector<QueryJudgment> train_set;
  int next_id = 0;
  auto add_product = [&](const std::string& q, double appeal, bool cold, double own_sv,
                         double subs_sv, double text, double rating, int label,
                         QueryJudgment& j) {
    char id[16];
    std::snprintf(id, sizeof id, "pen%05d", next_id++);
    const ProductId pid(id);
    base.set(q, pid, {text, 1.0, u(rng), rating});
    snap.sv[pid] = own_sv;
    (*snap.sv_subs)[pid] = std::max(own_sv, subs_sv);
    j.candidates.push_back(pid);
    j.labels.push_back(label);
    j.logged_rank.push_back(static_cast<int>(j.candidates.size()));
    (void)appeal;
    (void)cold;
  };
  for (int q = 0; q < 120; ++q) {
    QueryJudgment j;
    j.query = "pen query " + std::to_string(q);
    for (int c = 0; c < 4; ++c) {
      const double appeal = u(rng);
      const double cluster_sv = 400.0 * appeal;
      for (int m = 0; m < 4; ++m) {
        const bool cold = m == 0 && u(rng) < 0.5;
        const double own = cold ? 120.0 * u(rng) * appeal
                                : std::max(0.0, cluster_sv * (0.8 + 0.4 * u(rng)));
        const double subs = std::max(0.0, cluster_sv * (0.9 + 0.2 * u(rng)));
        // Ratings cluster near the top of the scale and say little about appeal.
        const double rating = std::clamp(
            cold ? 3.5 + 1.5 * u(rng) : 3.8 + 0.8 * appeal + 0.4 * noise(rng), 1.0, 5.0);
        const int label = static_cast<int>(
            std::clamp(std::lround(4.0 * appeal + 0.4 * noise(rng)), 0L, 4L));
        add_product(j.query, appeal, cold, own, subs, u(rng), rating, label, j);
      }
    }
    train_set.push_back(std::move(j));
  }

  QueryJudgment case_query;
  case_query.query = "fountain pen";
  struct Row {
    double sv, sv_subs, text, rating;
  };
  const std::vector<Row> rows{
      {89.0, 297.0, 0.45, 4.7},   // the new pen
      {430.0, 430.0, 0.80, 4.8},  // established competitors, best sellers first
      {390.0, 390.0, 0.30, 4.6},  {350.0, 350.0, 0.65, 4.7}, {240.0, 250.0, 0.20, 4.8},
      {200.0, 210.0, 0.90, 4.5},  {160.0, 170.0, 0.55, 4.7}, {120.0, 130.0, 0.70, 4.6},
      {40.0, 50.0, 0.35, 4.1}};
  for (const Row& r : rows) add_product(case_query.query, 0.0, false, r.sv, r.sv_subs, r.text,
                                        r.rating, 0, case_query);
  const ProductId cold_pen = case_query.candidates.front();

  TrainConfig cfg;
  cfg.num_trees = 100;
  FeatureSnapshot plain = snap;
  plain.sv_subs.reset();
  const FeatureTable t1_features = assemble_features(base, plain, false);
  const FeatureTable t2_features = assemble_features(base, snap, true);
  const RankerModel t1 = train(train_set, t1_features, cfg);
  const RankerModel t2 = train(train_set, t2_features, cfg);

  auto rank_of = [&](const RankerModel& m, const FeatureTable& f) {
    const ScoredList s = score_query(m, case_query, f);
    return static_cast<std::size_t>(std::find(s.ranked.begin(), s.ranked.end(), cold_pen) -
                                    s.ranked.begin()) + 1;
  };
  const std::size_t r1 = rank_of(t1, t1_features);
  const std::size_t r2 = rank_of(t2, t2_features);
  const double boosted = boost_product(
      cold_pen, [&] {
        FeatureSnapshot s;
        s.sv = {{cold_pen, 89.0}, {ProductId("s1"), 200.0}, {ProductId("s2"), 297.0},
                {ProductId("s3"), 394.0}};
        return s;
      }(),
      SubstituteSet{cold_pen, {{ProductId("s1"), 0.9}, {ProductId("s2"), 0.9}, {ProductId("s3"), 0.9}}},
      AggregationStrategy::mean());
  return {boosted == 297.0 && r2 < r1,
          "SV 89 boosted to SV_Subs " + fmt("%.0f", boosted) + "; new pen ranks " +
              std::to_string(r1) + " under T1 and " + std::to_string(r2) + " under T2 of " +
              std::to_string(rows.size())};
}

// --- criterion 11 -------------------------------------------------------------

int run_cli(const std::string& args) {
  const std::string cmd = std::string(BFS_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome determinism(const fs::path& root) {
  PipelineConfig cfg;
  cfg.out_dir = root / "determinism";
  write_json(root / "determinism.json", Json(cfg));
  const std::string args = "--config " + (root / "determinism.json").string() + " run-all";
  if (run_cli(args) != 0) return {false, "first run-all failed"};
  const Json first = read_json(RunLayout(cfg.out_dir).manifest());
  if (run_cli(args) != 0) return {false, "second run-all failed"};
  const Json second = read_json(RunLayout(cfg.out_dir).manifest());
  const bool same = first.at("outputs") == second.at("outputs") &&
                    first.at("config_hash") == second.at("config_hash");
  std::size_t differing = 0;
  for (const auto& [path, digest] : first.at("outputs").items()) {
    differing += !second.at("outputs").contains(path) || second.at("outputs").at(path) != digest;
  }
  return {same, std::to_string(first.at("outputs").size()) + " output digests compared, " +
                    std::to_string(differing) + " differ; config hash " +
                    (first.at("config_hash") == second.at("config_hash") ? "equal" : "differs")};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  fixtures::TempDir root("acceptance");
  std::vector<SeedRun> runs;
  bool runs_ok = true;
  std::string runs_error;
  auto seed_runs = [&]() -> const std::vector<SeedRun>& {
    if (runs.empty() && runs_ok) {
      try {
        runs = run_seeds(root.path());
      } catch (const std::exception& e) {
        runs_ok = false;
        runs_error = e.what();
      }
    }
    if (!runs_ok) throw std::runtime_error("pipeline runs failed: " + runs_error);
    return runs;
  };

  const std::vector<std::pair<int, std::function<Outcome()>>> criteria{
      {1, dominance},
      {2, aggregation_oracles},
      {3, sv_oracle},
      {4, knn_oracle},
      {5, [&] { return substitute_quality(seed_runs()); }},
      {6, ranker_sanity},
      {7, [&] { return comparison_mechanism(seed_runs()); }},
      {8, [&] { return low_decile(seed_runs()); }},
      {9, [&] { return partial_dependence_trend(seed_runs()); }},
      {10, fountain_pen_case},
      {11, [&] { return determinism(root.path()); }},
  };
  int failures = 0;
  for (const auto& [number, check] : criteria) {
    if (!only.empty() && !only.contains(number)) continue;
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s criterion %d: %s\n", o.pass ? "PASS" : "FAIL", number, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
