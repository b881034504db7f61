#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bfs/embedding.hpp"
#include "bfs/io.hpp"
#include "bfs/types.hpp"

namespace bfs {

inline constexpr std::size_t kDefaultCandidateK = 25;
inline constexpr std::size_t kDefaultMaxSubstitutes = 10;
inline constexpr double kDefaultTargetPrecision = 0.8;

struct CandidatePair {
  ProductId seed;
  ProductId candidate;
  double cosine = 0.0;
  std::optional<double> classifier_score;
};

// Exhaustive top-k by cosine, seed excluded, descending with ties broken by
// ascending ProductId. Throws LookupError when the seed has no embedding.
std::vector<CandidatePair> knn_candidates(const ProductId& seed, const EmbeddingTable& embeddings,
                                          std::size_t k);

// Logistic model over [e_seed, e_cand, |e_seed - e_cand|].
struct PairClassifier {
  std::vector<double> weights;
  double bias = 0.0;
  double threshold = 0.5;

  std::size_t embedding_dim() const { return weights.size() / 3; }
  double score(std::span<const double> seed, std::span<const double> candidate) const;
  bool accepts(double score) const { return score >= threshold; }
};

void to_json(Json& j, const PairClassifier& c);
void from_json(const Json& j, PairClassifier& c);

struct LabeledPair {
  CandidatePair pair;
  int label = 0;  // 1 = substitute
};

struct ClassifierReport {
  std::vector<double> loss_history;  // training log-loss before each epoch, then final
  bool threshold_fallback = false;   // target precision unattainable on the held-out split
  std::size_t train_size = 0;
  std::size_t holdout_size = 0;
  double holdout_accuracy = 0.0;
  double holdout_precision = 0.0;
  double holdout_recall = 0.0;
};

struct TrainedClassifier {
  PairClassifier classifier;
  ClassifierReport report;
};

// Full-batch gradient descent on mean log-loss with backtracking (the step
// starts at learning_rate and halves until the loss does not increase).
// Every fifth pair is held out; the threshold is the smallest held-out score
// whose precision reaches target_precision, else 0.5 with the fallback flag.
// Throws TrainingError when only one label is present.
TrainedClassifier train_pair_classifier(std::span<const LabeledPair> pairs,
                                        const EmbeddingTable& embeddings, int epochs,
                                        double learning_rate, double target_precision);

// Keeps pairs whose seed and candidate share the category and agree on every
// required attribute; a missing attribute on either side drops the pair.
std::vector<CandidatePair> attribute_post_filter(std::span<const CandidatePair> pairs,
                                                 const CatalogIndex& catalog,
                                                 std::span<const std::string> required_attrs);

struct Substitute {
  ProductId id;
  double score = 0.0;

  friend bool operator==(const Substitute&, const Substitute&) = default;
};

struct SubstituteSet {
  ProductId seed;
  std::vector<Substitute> substitutes;  // descending score, ties by id

  friend bool operator==(const SubstituteSet&, const SubstituteSet&) = default;
};

using LookupTable = std::map<ProductId, SubstituteSet>;

struct SubstituteParams {
  std::size_t k = kDefaultCandidateK;
  std::size_t max_substitutes = kDefaultMaxSubstitutes;
  double target_precision = kDefaultTargetPrecision;
  std::vector<std::string> required_attrs;
};

void to_json(Json& j, const SubstituteParams& p);
void from_json(const Json& j, SubstituteParams& p);

// Per-stage pair totals over the whole catalog.
struct StageCounts {
  std::size_t knn = 0;
  std::size_t classified = 0;
  std::size_t post_filtered = 0;
  std::size_t final = 0;
};

// The table after each stage. `knn` holds cosine scores, the others hold
// classifier scores; `final` is post-filtered and capped.
struct StagedLookup {
  LookupTable knn;
  LookupTable classified;
  LookupTable final;
  StageCounts counts;
};

StagedLookup build_lookup_table_staged(std::span<const Product> catalog,
                                       const EmbeddingTable& embeddings,
                                       const PairClassifier& classifier,
                                       const SubstituteParams& params);

LookupTable build_lookup_table(std::span<const Product> catalog, const EmbeddingTable& embeddings,
                               const PairClassifier& classifier, const SubstituteParams& params);

// One {"seed", "substitutes": [[id, score], ...]} record per seed, sorted.
void write_lookup_table(const std::filesystem::path& path, const LookupTable& table);
LookupTable read_lookup_table(const std::filesystem::path& path);

// Mean |S_p| over catalog products, optionally only the cold-start ones.
double mean_substitute_count(const LookupTable& table, std::span<const Product> catalog,
                             bool cold_start_only);

}  // namespace bfs
