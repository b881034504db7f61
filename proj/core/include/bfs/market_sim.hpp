#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bfs/embedding.hpp"
#include "bfs/io.hpp"
#include "bfs/metrics.hpp"
#include "bfs/substitutes.hpp"
#include "bfs/types.hpp"

namespace bfs {

struct SimConfig {
  std::uint64_t seed = 7;
  std::size_t num_products = 2000;
  std::size_t num_categories = 40;
  double cluster_size_mean = 6.0;
  double cold_start_fraction = 0.1;
  double horizon_days = 30.0;
  double cold_start_window_days = 3.0;
  std::size_t events_per_day = 6500;
  double zipf_exponent = 1.1;
  double position_bias_exponent = 1.0;
  double relevance_noise = 0.5;
  std::size_t num_queries = 500;
  std::size_t candidates_per_query = 20;
  double train_fraction = 0.7;
  Timestamp start_time = 1717200000;  // 2024-06-01T00:00:00Z

  // Throws ConfigError.
  void validate() const;
  Timestamp horizon_end() const;
  Timestamp cold_start_begin() const;
};

void to_json(Json& j, const SimConfig& cfg);
void from_json(const Json& j, SimConfig& cfg);

inline const std::vector<std::string> kBaseFeatureSchema = {"text_match", "category_match",
                                                           "price_score", "rating"};

struct GroundTruth {
  std::vector<std::vector<ProductId>> clusters;  // disjoint, category-pure
  std::map<ProductId, std::size_t> cluster_of;
  std::map<std::pair<std::string, ProductId>, int> true_relevance;
  std::set<ProductId> cold_start_set;

  bool same_cluster(const ProductId& a, const ProductId& b) const;
  // Throws LookupError.
  int grade(const std::string& query, const ProductId& product) const;
};

Json truth_to_json(const GroundTruth& truth);
GroundTruth truth_from_json(const Json& j);

// Impressions and clicks at one display rank, summed over every session.
struct RankEngagement {
  std::size_t rank = 0;
  std::size_t impressions = 0;
  std::size_t clicks = 0;

  double ctr() const {
    return impressions == 0 ? 0.0 : static_cast<double>(clicks) / static_cast<double>(impressions);
  }
};

struct SimOutput {
  std::vector<Product> catalog;
  std::vector<InteractionEvent> events;  // sorted by timestamp
  std::vector<QueryJudgment> train_judgments;
  std::vector<QueryJudgment> test_judgments;
  FeatureTable base_features;  // kBaseFeatureSchema per judged pair
  GroundTruth truth;
  std::vector<RankEngagement> engagement;
  Timestamp as_of = 0;  // end of the horizon
};

// Synthetic marketplace: substitute clusters with Zipf popularity, search
// sessions with position-biased clicks, cold-start launches in the last
// days of the horizon and graded judgments. Deterministic in cfg.seed.
SimOutput generate(const SimConfig& cfg);

// Writes catalog.jsonl, events.jsonl, judgments_train.jsonl,
// judgments_test.jsonl, base_features.jsonl, truth.json and sim_config.json.
void write_sim_output(const std::filesystem::path& dir, const SimOutput& out, const SimConfig& cfg);

struct SubstituteQuality {
  double precision = 1.0;
  double recall = 0.0;
  std::size_t predicted_pairs = 0;
  std::size_t correct_pairs = 0;
  std::size_t reachable_pairs = 0;
};

// Precision over predicted pairs (1.0 when none); recall against each seed's
// true cluster mates, capped at max_substitutes per seed.
SubstituteQuality evaluate_substitutes(const LookupTable& table, const GroundTruth& truth,
                                       std::size_t max_substitutes = kDefaultMaxSubstitutes);

// kNN candidates for an evenly spaced sample of seeds, labeled by cluster
// membership (the simulator's stand-in for audited pair labels).
std::vector<LabeledPair> labeled_training_pairs(std::span<const Product> catalog,
                                                const EmbeddingTable& embeddings,
                                                const GroundTruth& truth, std::size_t k,
                                                std::size_t max_seeds);

using Rankings = std::map<std::string, std::vector<ProductId>>;

// Fraction of the top `depth` slots held by cold-start products.
double cold_start_share(std::span<const ProductId> ranking, const std::set<ProductId>& cold,
                        std::size_t depth);

struct SegmentMetrics {
  double ndcg_all = 0.0;
  double ndcg_cold = 0.0;         // queries with a relevant cold-start candidate
  double cold_share_top10 = 0.0;  // mean over all queries
  std::size_t queries = 0;
  std::size_t cold_queries = 0;
};

SegmentMetrics segment_metrics(const Rankings& rankings, const GroundTruth& truth,
                               std::size_t k = kDefaultNdcgK);

struct DiscoverabilityReport {
  SegmentMetrics before;
  SegmentMetrics after;
  double ndcg_all_rel_delta = 0.0;
  double ndcg_cold_rel_delta = 0.0;
  double cold_share_delta = 0.0;  // absolute
};

// Throws InputError when the two rankings cover different query sets.
DiscoverabilityReport discoverability_report(const Rankings& before, const Rankings& after,
                                             const GroundTruth& truth);

}  // namespace bfs
