#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bfs/boost.hpp"
#include "bfs/error.hpp"
#include "bfs/feature_store.hpp"
#include "bfs/io.hpp"
#include "bfs/market_sim.hpp"
#include "bfs/ranker.hpp"
#include "bfs/substitutes.hpp"

namespace bfs {

struct ClassifierOptions {
  std::size_t embedding_dim = kDefaultEmbeddingDim;
  int epochs = 150;
  double learning_rate = 1.0;
  std::size_t training_seeds = 1000;  // seeds whose kNN pairs are labeled for training
};

void to_json(Json& j, const ClassifierOptions& o);
void from_json(const Json& j, ClassifierOptions& o);

// One flat file drives a whole run; CLI flags override individual fields.
struct PipelineConfig {
  std::filesystem::path out_dir = "run";
  SimConfig sim;
  DecayConfig decay;
  SubstituteParams substitutes;
  ClassifierOptions classifier;
  std::vector<std::string> strategies{"mean", "max", "attention"};
  TrainConfig train;
  double refresh_period_hours = 4.0;

  // Throws ConfigError.
  void validate() const;
};

void to_json(Json& j, const PipelineConfig& cfg);
void from_json(const Json& j, PipelineConfig& cfg);
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

// "T1" is the baseline; mean, max, attention map to T2, T3, T4 and a
// percentile strategy pNN to "T5_pNN".
std::string model_name(const AggregationStrategy& strategy);

// Artifact locations under one output directory.
struct RunLayout {
  std::filesystem::path root;

  explicit RunLayout(std::filesystem::path dir) : root(std::move(dir)) {}
  std::filesystem::path data() const { return root / "data"; }
  std::filesystem::path catalog() const { return data() / "catalog.jsonl"; }
  std::filesystem::path events() const { return data() / "events.jsonl"; }
  std::filesystem::path train_judgments() const { return data() / "judgments_train.jsonl"; }
  std::filesystem::path test_judgments() const { return data() / "judgments_test.jsonl"; }
  std::filesystem::path base_features() const { return data() / "base_features.jsonl"; }
  std::filesystem::path truth() const { return data() / "truth.json"; }
  std::filesystem::path substitutes() const { return root / "substitutes" / "lookup.jsonl"; }
  std::filesystem::path classifier() const { return root / "substitutes" / "classifier.json"; }
  std::filesystem::path substitute_quality() const { return root / "substitutes" / "quality.json"; }
  std::filesystem::path snapshot() const { return root / "features" / "snapshot.json"; }
  std::filesystem::path boosted_snapshot(const std::string& strategy) const {
    return root / "features" / ("snapshot_" + strategy + ".json");
  }
  std::filesystem::path boost_report(const std::string& strategy) const {
    return root / "features" / ("boost_report_" + strategy + ".json");
  }
  std::filesystem::path model(const std::string& name) const {
    return root / "models" / (name + ".bfs");
  }
  std::filesystem::path evaluation() const { return root / "evaluation.json"; }
  std::filesystem::path report_dir() const { return root / "report"; }
  std::filesystem::path manifest() const { return root / "manifest.json"; }
};

// Appends "sv" (and "sv_subs" when the snapshot has it) to every row.
FeatureTable assemble_features(const FeatureTable& base, const FeatureSnapshot& snapshot,
                               bool include_sv_subs);

// --- stages -----------------------------------------------------------------

void stage_simulate(const SimConfig& cfg, const std::filesystem::path& data_dir);

struct SubstituteStageResult {
  SubstituteQuality knn;
  SubstituteQuality classified;
  SubstituteQuality final;
  StageCounts counts;
  ClassifierReport classifier;
  double mean_size_cold_start = 0.0;
  double mean_size_all = 0.0;
};

Json substitute_result_to_json(const SubstituteStageResult& r);

SubstituteStageResult stage_build_substitutes(const std::filesystem::path& catalog_path,
                                              const std::filesystem::path& truth_path,
                                              const SubstituteParams& params,
                                              const ClassifierOptions& opts,
                                              const std::filesystem::path& table_out,
                                              const std::filesystem::path& classifier_out,
                                              const std::filesystem::path& quality_out);

// Snapshot at as_of (default: the latest event time). Returns the snapshot.
FeatureSnapshot stage_compute_features(const std::filesystem::path& catalog_path,
                                       const std::filesystem::path& events_path,
                                       std::optional<Timestamp> as_of, const DecayConfig& decay,
                                       const std::filesystem::path& snapshot_out);

BoostReport stage_boost(const AggregationStrategy& strategy,
                        const std::filesystem::path& snapshot_path,
                        const std::filesystem::path& table_path,
                        const std::filesystem::path& catalog_path, std::size_t embedding_dim,
                        const std::filesystem::path& snapshot_out,
                        const std::filesystem::path& report_out);

// Trains on base features joined with the snapshot's sv (and sv_subs when
// present) and writes the model.
TrainReport stage_train(const std::filesystem::path& judgments_path,
                        const std::filesystem::path& features_path,
                        const std::optional<std::filesystem::path>& snapshot_path,
                        const TrainConfig& cfg, const std::filesystem::path& model_out);

enum class Segment { All, ColdStart };
Segment parse_segment(const std::string& name);

struct EvaluationResult {
  std::string model;
  std::size_t queries = 0;
  double ndcg = 0.0;  // over the requested segment
  SegmentMetrics segments;
};

Json evaluation_to_json(const EvaluationResult& r);

EvaluationResult stage_evaluate(const std::filesystem::path& model_path,
                                const std::filesystem::path& judgments_path,
                                const std::filesystem::path& features_path,
                                const std::optional<std::filesystem::path>& snapshot_path,
                                const std::filesystem::path& catalog_path, Segment segment);

// Rankings of every judged query under the model.
Rankings rank_all(const RankerModel& model, std::span<const QueryJudgment> judgments,
                  const FeatureTable& features);

// --- report -----------------------------------------------------------------

struct HistogramRow {
  std::size_t bin = 0;
  double lower = 0.0;  // exclusive, except bin 0
  double upper = 0.0;  // inclusive
  std::size_t sv_count = 0;
  std::size_t sv_subs_count = 0;
};

// Ten bins bounded by the SV deciles of the catalog (bin 0 is v <= 10th
// percentile); counts SV and SV_Subs of every product.
std::vector<HistogramRow> sv_histogram(const FeatureSnapshot& boosted);

struct LowDecileShift {
  std::size_t products = 0;  // cold-start products with a nonempty substitute set
  double sv_fraction = 0.0;
  double sv_subs_fraction = 0.0;
};

LowDecileShift low_decile_shift(const FeatureSnapshot& boosted, const LookupTable& table,
                                std::span<const Product> catalog);

struct PartialDependenceResult {
  std::vector<std::pair<double, double>> curve;
  double spearman = 0.0;
};

// Grid = 20 quantiles (2.5% .. 97.5%) of the probed feature over the
// background rows; background = the feature table rows in key order.
PartialDependenceResult sv_subs_partial_dependence(const RankerModel& model,
                                                   const FeatureTable& features);

// Writes report/histogram_<strategy>.csv, report/partial_dependence_<model>.csv,
// report/comparison.csv and report/summary.json for a completed run.
Json stage_report(const PipelineConfig& cfg, const RunLayout& layout);

// --- orchestration ----------------------------------------------------------

struct StageTiming {
  std::string stage;
  double seconds = 0.0;
};

struct RunManifest {
  std::string config_hash;
  std::vector<StageTiming> timings;
  std::map<std::string, std::string> outputs;  // relative path -> sha256
  std::vector<std::string> models;
  Json summary;
};

Json manifest_to_json(const RunManifest& m, const PipelineConfig& cfg);

// simulate -> build-substitutes -> compute-features -> boost -> train ->
// evaluate -> report, then manifest.json. Errors carry the stage name.
RunManifest run_pipeline(const PipelineConfig& cfg);

// Error from a named stage; the CLI prints the stage and exits with 2.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& message)
      : Error(stage + ": " + message), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

}  // namespace bfs
