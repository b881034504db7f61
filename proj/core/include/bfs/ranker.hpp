#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bfs/io.hpp"
#include "bfs/metrics.hpp"
#include "bfs/types.hpp"

namespace bfs {

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;

  bool is_leaf() const { return feature < 0; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

// Binary regression tree; x[feature] <= threshold goes left. nodes[0] is
// the root.
class RegressionTree {
 public:
  RegressionTree() = default;
  RegressionTree(std::vector<TreeNode> nodes, int max_depth);

  static RegressionTree leaf(double value);

  double predict(std::span<const double> x) const;
  const std::vector<TreeNode>& nodes() const { return nodes_; }
  int max_depth() const { return max_depth_; }
  int depth() const;

  // Throws InputError unless every node is reachable, thresholds are finite,
  // features are below schema_size and depth <= max_depth.
  void validate(std::size_t schema_size) const;

  friend bool operator==(const RegressionTree&, const RegressionTree&) = default;

 private:
  std::vector<TreeNode> nodes_;
  int max_depth_ = 0;
};

struct TrainConfig {
  int num_trees = 200;
  int max_depth = 4;
  double learning_rate = 0.1;
  int min_leaf_samples = 10;
  std::uint64_t seed = 0;

  void validate() const;
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

void to_json(Json& j, const TrainConfig& cfg);
void from_json(const Json& j, TrainConfig& cfg);

struct RankerModel {
  std::vector<RegressionTree> trees;
  double learning_rate = 0.1;
  std::vector<std::string> feature_schema;
  std::size_t k_for_ndcg = kDefaultNdcgK;
  TrainConfig config;

  // sum over trees of learning_rate * tree(x); x follows feature_schema.
  double score(std::span<const double> x) const;

  friend bool operator==(const RankerModel&, const RankerModel&) = default;
};

Json model_to_json(const RankerModel& model);
RankerModel model_from_json(const Json& j);
void write_model(const std::filesystem::path& path, const RankerModel& model);
RankerModel read_model(const std::filesystem::path& path);

// LambdaRank ascent directions (sigma = 1): for each pair with
// label_i > label_j, rho = 1 / (1 + exp(s_i - s_j)) and
// lambda_i += rho * |dNDCG@k|, lambda_j -= rho * |dNDCG@k|. Positions come
// from the current scores, ties broken by index. Zero for all-equal labels.
std::vector<double> lambda_gradients(std::span<const double> scores, std::span<const int> labels,
                                     std::size_t k);

struct LambdaTerms {
  std::vector<double> lambdas;
  std::vector<double> weights;  // sum of rho (1 - rho) |dNDCG| per item
};

LambdaTerms lambda_terms(std::span<const double> scores, std::span<const int> labels,
                         std::size_t k);

struct TrainReport {
  std::size_t trainable_queries = 0;
  std::size_t skipped_queries = 0;   // fewer than 2 candidates
  std::size_t all_zero_queries = 0;  // excluded from gradients
  std::vector<double> train_ndcg;    // mean NDCG@k after each tree
};

// LambdaMART: per tree, lambdas per query, an exact greedy variance-reduction
// tree fit to them (ties: lower feature index, then lower threshold), Newton
// leaf values sum(lambda) / sum(weight), added with learning_rate. Candidates
// are processed in ProductId order. Throws TrainingError listing missing
// feature vectors or when no query is trainable.
RankerModel train(std::span<const QueryJudgment> judgments, const FeatureTable& features,
                  const TrainConfig& cfg, TrainReport* report = nullptr);

struct ScoredList {
  std::vector<double> scores;     // aligned with the input candidates
  std::vector<ProductId> ranked;  // descending score, ties by ProductId
};

// Feature vectors are matched to the model schema by name (extra columns are
// ignored). Throws InputError when a schema column is missing.
ScoredList score(const RankerModel& model, std::span<const ProductId> candidates,
                 std::span<const FeatureVector> features);

ScoredList score_query(const RankerModel& model, const QueryJudgment& judgment,
                       const FeatureTable& features);

// Labels of the judgment in the order the model ranks its candidates.
std::vector<int> ranked_labels(const RankerModel& model, const QueryJudgment& judgment,
                               const FeatureTable& features);

// Mean NDCG@k of the model over the judgments.
double mean_ndcg(const RankerModel& model, std::span<const QueryJudgment> judgments,
                 const FeatureTable& features, std::size_t k = kDefaultNdcgK);

// Mean model score over the background with one feature overridden to each
// grid value. Throws LookupError for an unknown feature.
std::vector<std::pair<double, double>> partial_dependence(const RankerModel& model,
                                                          const std::string& feature_name,
                                                          std::span<const double> grid,
                                                          std::span<const FeatureVector> background);

}  // namespace bfs
