#include <benchmark/benchmark.h>

#include <random>

#include "bfs/boost.hpp"
#include "bfs/embedding.hpp"
#include "bfs/feature_store.hpp"
#include "bfs/market_sim.hpp"
#include "bfs/ranker.hpp"
#include "bfs/substitutes.hpp"

using namespace bfs;

namespace {

const SimOutput& marketplace() {
  static const SimOutput out = [] {
    SimConfig cfg;
    cfg.num_queries = 200;
    return generate(cfg);
  }();
  return out;
}

}  // namespace

static void BM_Embed(benchmark::State& state) {
  const auto& catalog = marketplace().catalog;
  for (auto _ : state) benchmark::DoNotOptimize(EmbeddingTable::build(catalog));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(catalog.size()));
}
BENCHMARK(BM_Embed)->Unit(benchmark::kMillisecond);

static void BM_Knn(benchmark::State& state) {
  const auto& catalog = marketplace().catalog;
  static const EmbeddingTable emb = EmbeddingTable::build(catalog);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(knn_candidates(catalog[i % catalog.size()].id, emb, 25));
    ++i;
  }
}
BENCHMARK(BM_Knn)->Unit(benchmark::kMicrosecond);

static void BM_Snapshot(benchmark::State& state) {
  const SimOutput& out = marketplace();
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_snapshot(out.events, out.catalog, out.as_of, DecayConfig{}));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(out.events.size()));
}
BENCHMARK(BM_Snapshot)->Unit(benchmark::kMillisecond);

static void BM_Aggregate(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  std::vector<double> values(10);
  for (double& v : values) v = u(rng);
  const auto strategy = static_cast<AggregationStrategy::Kind>(state.range(0));
  const AggregationStrategy s{strategy, 0.75};
  std::vector<std::vector<double>> embs(10, std::vector<double>(256, 1.0 / 16.0));
  std::vector<std::span<const double>> spans(embs.begin(), embs.end());
  for (auto _ : state) benchmark::DoNotOptimize(aggregate(values, s, embs[0], spans));
}
BENCHMARK(BM_Aggregate)->DenseRange(0, 3);

static void BM_Train(benchmark::State& state) {
  const SimOutput& out = marketplace();
  TrainConfig cfg;
  cfg.num_trees = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(train(out.train_judgments, out.base_features, cfg));
}
BENCHMARK(BM_Train)->Arg(20)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
