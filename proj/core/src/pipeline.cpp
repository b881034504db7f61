#include "bfs/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "bfs/hash.hpp"
#include "bfs/metrics.hpp"

namespace bfs {

namespace fs = std::filesystem;

void to_json(Json& j, const ClassifierOptions& o) {
  j = Json{{"embedding_dim", o.embedding_dim},
           {"epochs", o.epochs},
           {"learning_rate", o.learning_rate},
           {"training_seeds", o.training_seeds}};
}

void from_json(const Json& j, ClassifierOptions& o) {
  o = ClassifierOptions{};
  if (j.contains("embedding_dim")) j.at("embedding_dim").get_to(o.embedding_dim);
  if (j.contains("epochs")) j.at("epochs").get_to(o.epochs);
  if (j.contains("learning_rate")) j.at("learning_rate").get_to(o.learning_rate);
  if (j.contains("training_seeds")) j.at("training_seeds").get_to(o.training_seeds);
}

void PipelineConfig::validate() const {
  if (out_dir.empty()) throw ConfigError("out_dir is empty");
  sim.validate();
  decay.validate();
  train.validate();
  if (substitutes.k == 0) throw ConfigError("substitutes.k must be at least 1");
  if (substitutes.max_substitutes == 0) {
    throw ConfigError("substitutes.max_substitutes must be at least 1");
  }
  if (!(substitutes.target_precision > 0.0 && substitutes.target_precision < 1.0)) {
    throw ConfigError("substitutes.target_precision must lie in (0, 1)");
  }
  if (classifier.embedding_dim < 8) throw ConfigError("classifier.embedding_dim must be >= 8");
  if (classifier.epochs < 0) throw ConfigError("classifier.epochs must be nonnegative");
  if (!(classifier.learning_rate > 0.0)) {
    throw ConfigError("classifier.learning_rate must be positive");
  }
  if (classifier.training_seeds == 0) throw ConfigError("classifier.training_seeds must be >= 1");
  if (!(refresh_period_hours > 0.0)) throw ConfigError("refresh_period_hours must be positive");
  std::vector<std::string> names;
  for (const std::string& s : strategies) {
    const std::string name = model_name(AggregationStrategy::parse(s));
    if (std::find(names.begin(), names.end(), name) != names.end()) {
      throw ConfigError("strategy '" + s + "' listed twice");
    }
    names.push_back(name);
  }
}

void to_json(Json& j, const PipelineConfig& c) {
  j = Json{{"out_dir", c.out_dir.string()},
           {"sim", c.sim},
           {"decay", c.decay},
           {"substitutes", c.substitutes},
           {"classifier", c.classifier},
           {"strategies", c.strategies},
           {"train", c.train},
           {"refresh_period_hours", c.refresh_period_hours}};
}

void from_json(const Json& j, PipelineConfig& c) {
  c = PipelineConfig{};
  if (j.contains("out_dir")) c.out_dir = j.at("out_dir").get<std::string>();
  if (j.contains("sim")) j.at("sim").get_to(c.sim);
  if (j.contains("decay")) j.at("decay").get_to(c.decay);
  if (j.contains("substitutes")) j.at("substitutes").get_to(c.substitutes);
  if (j.contains("classifier")) j.at("classifier").get_to(c.classifier);
  if (j.contains("strategies")) j.at("strategies").get_to(c.strategies);
  if (j.contains("train")) j.at("train").get_to(c.train);
  if (j.contains("refresh_period_hours")) {
    j.at("refresh_period_hours").get_to(c.refresh_period_hours);
  }
}

PipelineConfig load_pipeline_config(const fs::path& path) {
  try {
    return read_json(path).get<PipelineConfig>();
  } catch (const Json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  } catch (const InputError& e) {
    throw ConfigError(e.what());
  }
}

std::string model_name(const AggregationStrategy& strategy) {
  switch (strategy.kind) {
    case AggregationStrategy::Kind::Mean: return "T2";
    case AggregationStrategy::Kind::Max: return "T3";
    case AggregationStrategy::Kind::Attention: return "T4";
    case AggregationStrategy::Kind::Percentile: return "T5_" + strategy.name();
  }
  return "T2";
}

FeatureTable assemble_features(const FeatureTable& base, const FeatureSnapshot& snapshot,
                               bool include_sv_subs) {
  std::vector<std::string> schema = base.schema();
  schema.push_back("sv");
  if (include_sv_subs) {
    if (!snapshot.has_sv_subs()) throw InputError("snapshot has no sv_subs column");
    schema.push_back("sv_subs");
  }
  FeatureTable out(schema);
  for (const auto& [key, values] : base.rows()) {
    std::vector<double> row = values;
    row.push_back(snapshot.sv_of(key.second));
    if (include_sv_subs) row.push_back(snapshot.sv_subs_of(key.second));
    out.set(key.first, key.second, std::move(row));
  }
  return out;
}

void stage_simulate(const SimConfig& cfg, const fs::path& data_dir) {
  write_sim_output(data_dir, generate(cfg), cfg);
}

Json substitute_result_to_json(const SubstituteStageResult& r) {
  auto quality = [](const SubstituteQuality& q) {
    return Json{{"precision", q.precision},
                {"recall", q.recall},
                {"predicted_pairs", q.predicted_pairs},
                {"correct_pairs", q.correct_pairs},
                {"reachable_pairs", q.reachable_pairs}};
  };
  return Json{{"knn", quality(r.knn)},
              {"classified", quality(r.classified)},
              {"final", quality(r.final)},
              {"stage_pairs",
               {{"knn", r.counts.knn},
                {"classified", r.counts.classified},
                {"post_filtered", r.counts.post_filtered},
                {"final", r.counts.final}}},
              {"classifier",
               {{"train_size", r.classifier.train_size},
                {"holdout_size", r.classifier.holdout_size},
                {"holdout_accuracy", r.classifier.holdout_accuracy},
                {"holdout_precision", r.classifier.holdout_precision},
                {"holdout_recall", r.classifier.holdout_recall},
                {"threshold_fallback", r.classifier.threshold_fallback},
                {"final_loss", r.classifier.loss_history.empty()
                                   ? Json(nullptr)
                                   : Json(r.classifier.loss_history.back())}}},
              {"mean_size_cold_start", r.mean_size_cold_start},
              {"mean_size_all", r.mean_size_all}};
}

SubstituteStageResult stage_build_substitutes(const fs::path& catalog_path,
                                              const fs::path& truth_path,
                                              const SubstituteParams& params,
                                              const ClassifierOptions& opts,
                                              const fs::path& table_out,
                                              const fs::path& classifier_out,
                                              const fs::path& quality_out) {
  const std::vector<Product> catalog = read_catalog(catalog_path);
  const ValidationReport validation = validate_catalog(catalog);
  if (!validation.ok()) {
    throw InputError("catalog has " + std::to_string(validation.error_count()) + " errors");
  }
  const GroundTruth truth = truth_from_json(read_json(truth_path));
  const EmbeddingTable embeddings = EmbeddingTable::build(catalog, opts.embedding_dim);

  const std::vector<LabeledPair> pairs =
      labeled_training_pairs(catalog, embeddings, truth, params.k, opts.training_seeds);
  TrainedClassifier trained = train_pair_classifier(pairs, embeddings, opts.epochs,
                                                    opts.learning_rate, params.target_precision);
  const StagedLookup staged =
      build_lookup_table_staged(catalog, embeddings, trained.classifier, params);

  SubstituteStageResult r;
  r.knn = evaluate_substitutes(staged.knn, truth, params.max_substitutes);
  r.classified = evaluate_substitutes(staged.classified, truth, params.max_substitutes);
  r.final = evaluate_substitutes(staged.final, truth, params.max_substitutes);
  r.counts = staged.counts;
  r.classifier = std::move(trained.report);
  r.mean_size_cold_start = mean_substitute_count(staged.final, catalog, true);
  r.mean_size_all = mean_substitute_count(staged.final, catalog, false);

  write_lookup_table(table_out, staged.final);
  write_json(classifier_out, Json(trained.classifier));
  write_json(quality_out, substitute_result_to_json(r));
  return r;
}

FeatureSnapshot stage_compute_features(const fs::path& catalog_path, const fs::path& events_path,
                                       std::optional<Timestamp> as_of, const DecayConfig& decay,
                                       const fs::path& snapshot_out) {
  decay.validate();
  const std::vector<Product> catalog = read_catalog(catalog_path);
  const std::vector<InteractionEvent> events = read_events(events_path);
  Timestamp t = 0;
  if (as_of) {
    t = *as_of;
  } else {
    for (const InteractionEvent& e : events) t = std::max(t, e.timestamp);
  }
  const std::vector<InteractionEvent> visible = events_until(events, t);
  FeatureSnapshot snap = build_snapshot(visible, catalog, t, decay);
  write_snapshot(snapshot_out, snap);
  return snap;
}

BoostReport stage_boost(const AggregationStrategy& strategy, const fs::path& snapshot_path,
                        const fs::path& table_path, const fs::path& catalog_path,
                        std::size_t embedding_dim, const fs::path& snapshot_out,
                        const fs::path& report_out) {
  FeatureSnapshot snapshot = read_snapshot(snapshot_path);
  snapshot.sv_subs.reset();
  const LookupTable table = read_lookup_table(table_path);
  std::optional<EmbeddingTable> embeddings;
  if (strategy.kind == AggregationStrategy::Kind::Attention) {
    embeddings = EmbeddingTable::build(read_catalog(catalog_path), embedding_dim);
  }
  auto [boosted, report] =
      boost_all(snapshot, table, strategy, embeddings ? &*embeddings : nullptr);
  write_snapshot(snapshot_out, boosted);
  write_json(report_out, boost_report_to_json(report));
  return report;
}

namespace {

FeatureTable load_features(const fs::path& features_path,
                           const std::optional<fs::path>& snapshot_path) {
  FeatureTable base = read_features(features_path);
  if (!snapshot_path) return base;
  const FeatureSnapshot snap = read_snapshot(*snapshot_path);
  return assemble_features(base, snap, snap.has_sv_subs());
}

GroundTruth truth_from_judgments(std::span<const QueryJudgment> judgments,
                                 std::span<const Product> catalog) {
  GroundTruth truth;
  for (const QueryJudgment& q : judgments) {
    for (std::size_t i = 0; i < q.candidates.size(); ++i) {
      truth.true_relevance[{q.query, q.candidates[i]}] = q.labels[i];
    }
  }
  for (const Product& p : catalog) {
    if (p.is_cold_start) truth.cold_start_set.insert(p.id);
  }
  return truth;
}

}  // namespace

TrainReport stage_train(const fs::path& judgments_path, const fs::path& features_path,
                        const std::optional<fs::path>& snapshot_path, const TrainConfig& cfg,
                        const fs::path& model_out) {
  const std::vector<QueryJudgment> judgments = read_judgments(judgments_path);
  const FeatureTable features = load_features(features_path, snapshot_path);
  TrainReport report;
  const RankerModel model = train(judgments, features, cfg, &report);
  write_model(model_out, model);
  return report;
}

Segment parse_segment(const std::string& name) {
  if (name == "all") return Segment::All;
  if (name == "cold-start") return Segment::ColdStart;
  throw ConfigError("unknown segment '" + name + "' (expected all or cold-start)");
}

Rankings rank_all(const RankerModel& model, std::span<const QueryJudgment> judgments,
                  const FeatureTable& features) {
  Rankings out;
  for (const QueryJudgment& q : judgments) out[q.query] = score_query(model, q, features).ranked;
  return out;
}

Json evaluation_to_json(const EvaluationResult& r) {
  return Json{{"model", r.model},
              {"queries", r.queries},
              {"ndcg_at_10", r.ndcg},
              {"ndcg_all", r.segments.ndcg_all},
              {"ndcg_cold_start", r.segments.ndcg_cold},
              {"cold_start_share_top10", r.segments.cold_share_top10},
              {"cold_start_queries", r.segments.cold_queries}};
}

EvaluationResult stage_evaluate(const fs::path& model_path, const fs::path& judgments_path,
                                const fs::path& features_path,
                                const std::optional<fs::path>& snapshot_path,
                                const fs::path& catalog_path, Segment segment) {
  const RankerModel model = read_model(model_path);
  const std::vector<QueryJudgment> judgments = read_judgments(judgments_path);
  const FeatureTable features = load_features(features_path, snapshot_path);
  const std::vector<Product> catalog = read_catalog(catalog_path);
  const GroundTruth truth = truth_from_judgments(judgments, catalog);
  EvaluationResult r;
  r.model = model_path.stem().string();
  r.segments = segment_metrics(rank_all(model, judgments, features), truth, model.k_for_ndcg);
  r.queries = segment == Segment::All ? r.segments.queries : r.segments.cold_queries;
  r.ndcg = segment == Segment::All ? r.segments.ndcg_all : r.segments.ndcg_cold;
  return r;
}

std::vector<HistogramRow> sv_histogram(const FeatureSnapshot& boosted) {
  if (!boosted.has_sv_subs()) throw InputError("histogram needs a boosted snapshot");
  if (boosted.sv.empty()) return {};
  std::vector<double> sv;
  double top = 0.0;
  for (const auto& [id, v] : boosted.sv) {
    sv.push_back(v);
    top = std::max({top, v, boosted.sv_subs->at(id)});
  }
  std::vector<double> edges;
  for (int i = 1; i <= 9; ++i) edges.push_back(percentile(sv, i / 10.0));
  edges.push_back(top);
  auto bin_of = [&](double v) {
    for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
      if (v <= edges[b]) return b;
    }
    return edges.size() - 1;
  };
  std::vector<HistogramRow> rows(edges.size());
  for (std::size_t b = 0; b < rows.size(); ++b) {
    rows[b].bin = b;
    rows[b].lower = b == 0 ? 0.0 : edges[b - 1];
    rows[b].upper = edges[b];
  }
  for (const auto& [id, v] : boosted.sv) {
    ++rows[bin_of(v)].sv_count;
    ++rows[bin_of(boosted.sv_subs->at(id))].sv_subs_count;
  }
  return rows;
}

LowDecileShift low_decile_shift(const FeatureSnapshot& boosted, const LookupTable& table,
                                std::span<const Product> catalog) {
  if (!boosted.has_sv_subs()) throw InputError("low-decile shift needs a boosted snapshot");
  std::vector<double> sv;
  for (const auto& [id, v] : boosted.sv) sv.push_back(v);
  const double cut = percentile(sv, 0.1);
  LowDecileShift out;
  std::size_t sv_low = 0;
  std::size_t subs_low = 0;
  for (const Product& p : catalog) {
    if (!p.is_cold_start) continue;
    auto it = table.find(p.id);
    if (it == table.end() || it->second.substitutes.empty()) continue;
    ++out.products;
    sv_low += static_cast<std::size_t>(boosted.sv_of(p.id) <= cut);
    subs_low += static_cast<std::size_t>(boosted.sv_subs_of(p.id) <= cut);
  }
  if (out.products > 0) {
    out.sv_fraction = static_cast<double>(sv_low) / static_cast<double>(out.products);
    out.sv_subs_fraction = static_cast<double>(subs_low) / static_cast<double>(out.products);
  }
  return out;
}

PartialDependenceResult sv_subs_partial_dependence(const RankerModel& model,
                                                   const FeatureTable& features) {
  const std::size_t col = features.column("sv_subs");
  std::vector<FeatureVector> background;
  std::vector<double> observed;
  background.reserve(features.size());
  for (const auto& [key, values] : features.rows()) {
    background.push_back({features.schema(), values});
    observed.push_back(values[col]);
  }
  std::vector<double> grid;
  for (int i = 0; i < 20; ++i) grid.push_back(percentile(observed, 0.025 + 0.05 * i));
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  PartialDependenceResult r;
  r.curve = partial_dependence(model, "sv_subs", grid, background);
  if (r.curve.size() >= 2) {
    std::vector<double> xs;
    std::vector<double> ys;
    for (const auto& [x, y] : r.curve) {
      xs.push_back(x);
      ys.push_back(y);
    }
    r.spearman = spearman(xs, ys);
  }
  return r;
}

namespace {

std::string csv_number(double v) {
  std::ostringstream ss;
  ss.precision(10);
  ss << v;
  return ss.str();
}

}  // namespace

Json stage_report(const PipelineConfig& cfg, const RunLayout& layout) {
  for (const fs::path& p : {layout.catalog(), layout.substitutes(), layout.evaluation(),
                            layout.base_features(), layout.model("T1")}) {
    if (!fs::exists(p)) {
      throw InputError("missing " + p.string() + "; rerun run-all (or the stage producing it)");
    }
  }
  const std::vector<Product> catalog = read_catalog(layout.catalog());
  const LookupTable table = read_lookup_table(layout.substitutes());
  const FeatureTable base = read_features(layout.base_features());
  const fs::path dir = layout.report_dir();
  fs::create_directories(dir);
  Json summary{{"low_decile_shift", Json::object()},
               {"partial_dependence", Json::object()}};

  for (const std::string& s : cfg.strategies) {
    const AggregationStrategy strategy = AggregationStrategy::parse(s);
    const fs::path snap_path = layout.boosted_snapshot(strategy.name());
    if (!fs::exists(snap_path)) {
      throw InputError("missing " + snap_path.string() + "; rerun the boost stage");
    }
    const FeatureSnapshot boosted = read_snapshot(snap_path);

    std::string csv = "bin,lower,upper,sv_count,sv_subs_count\n";
    for (const HistogramRow& row : sv_histogram(boosted)) {
      csv += std::to_string(row.bin) + "," + csv_number(row.lower) + "," + csv_number(row.upper) +
             "," + std::to_string(row.sv_count) + "," + std::to_string(row.sv_subs_count) + "\n";
    }
    write_text(dir / ("histogram_" + strategy.name() + ".csv"), csv);

    const LowDecileShift shift = low_decile_shift(boosted, table, catalog);
    summary["low_decile_shift"][strategy.name()] = Json{{"products", shift.products},
                                                        {"sv_fraction", shift.sv_fraction},
                                                        {"sv_subs_fraction", shift.sv_subs_fraction}};

    const std::string name = model_name(strategy);
    const RankerModel model = read_model(layout.model(name));
    const PartialDependenceResult pd =
        sv_subs_partial_dependence(model, assemble_features(base, boosted, true));
    std::string pd_csv = "sv_subs,mean_score\n";
    for (const auto& [x, y] : pd.curve) pd_csv += csv_number(x) + "," + csv_number(y) + "\n";
    write_text(dir / ("partial_dependence_" + name + ".csv"), pd_csv);
    summary["partial_dependence"][name] = Json{{"spearman", pd.spearman}, {"points", pd.curve.size()}};
  }

  const Json evaluation = read_json(layout.evaluation());
  std::string comparison =
      "model,strategy,ndcg_all,ndcg_cold_start,cold_start_share_top10,"
      "ndcg_all_rel_delta_vs_T1,ndcg_cold_start_rel_delta_vs_T1,cold_start_share_delta_vs_T1\n";
  for (const Json& m : evaluation.at("models")) {
    comparison += m.at("model").get<std::string>() + "," + m.at("strategy").get<std::string>() + "," +
              csv_number(m.at("ndcg_all").get<double>()) + "," +
              csv_number(m.at("ndcg_cold_start").get<double>()) + "," +
              csv_number(m.at("cold_start_share_top10").get<double>()) + "," +
              csv_number(m.at("vs_T1").at("ndcg_all_rel_delta").get<double>()) + "," +
              csv_number(m.at("vs_T1").at("ndcg_cold_start_rel_delta").get<double>()) + "," +
              csv_number(m.at("vs_T1").at("cold_start_share_delta").get<double>()) + "\n";
  }
  write_text(dir / "comparison.csv", comparison);
  write_json(dir / "summary.json", summary);
  return summary;
}

Json manifest_to_json(const RunManifest& m, const PipelineConfig& cfg) {
  Json stages = Json::array();
  for (const StageTiming& t : m.timings) {
    stages.push_back(Json{{"stage", t.stage}, {"seconds", t.seconds}});
  }
  return Json{{"config_hash", m.config_hash},
              {"config", cfg},
              {"seeds", {{"sim", cfg.sim.seed}, {"train", cfg.train.seed}}},
              {"stages", std::move(stages)},
              {"models", m.models},
              {"outputs", m.outputs},
              {"summary", m.summary}};
}

namespace {

std::string config_hash(const PipelineConfig& cfg) {
  Json j = cfg;
  j.erase("out_dir");
  return sha256_hex(j.dump());
}

}  // namespace

RunManifest run_pipeline(const PipelineConfig& cfg) {
  cfg.validate();
  const RunLayout layout(cfg.out_dir);
  fs::create_directories(layout.root);
  RunManifest manifest;
  manifest.config_hash = config_hash(cfg);

  auto stage = [&](const std::string& name, const std::function<void()>& body) {
    const auto start = std::chrono::steady_clock::now();
    try {
      body();
    } catch (const StageError&) {
      throw;
    } catch (const std::exception& e) {
      throw StageError(name, e.what());
    }
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    manifest.timings.push_back({name, elapsed.count()});
  };

  stage("simulate", [&] { stage_simulate(cfg.sim, layout.data()); });

  SubstituteStageResult subs;
  stage("build-substitutes", [&] {
    subs = stage_build_substitutes(layout.catalog(), layout.truth(), cfg.substitutes,
                                   cfg.classifier, layout.substitutes(), layout.classifier(),
                                   layout.substitute_quality());
  });

  const std::vector<Timestamp> schedule =
      refresh_schedule(cfg.sim.start_time, cfg.sim.horizon_end(), cfg.refresh_period_hours);
  stage("compute-features", [&] {
    stage_compute_features(layout.catalog(), layout.events(), schedule.back(), cfg.decay,
                           layout.snapshot());
  });

  std::vector<AggregationStrategy> strategies;
  for (const std::string& s : cfg.strategies) strategies.push_back(AggregationStrategy::parse(s));
  stage("boost", [&] {
    for (const AggregationStrategy& s : strategies) {
      stage_boost(s, layout.snapshot(), layout.substitutes(), layout.catalog(),
                  cfg.classifier.embedding_dim, layout.boosted_snapshot(s.name()),
                  layout.boost_report(s.name()));
    }
  });

  stage("train", [&] {
    stage_train(layout.train_judgments(), layout.base_features(), layout.snapshot(), cfg.train,
                layout.model("T1"));
    manifest.models.push_back("T1");
    for (const AggregationStrategy& s : strategies) {
      stage_train(layout.train_judgments(), layout.base_features(),
                  layout.boosted_snapshot(s.name()), cfg.train, layout.model(model_name(s)));
      manifest.models.push_back(model_name(s));
    }
  });

  stage("evaluate", [&] {
    const std::vector<QueryJudgment> test = read_judgments(layout.test_judgments());
    const std::vector<Product> catalog = read_catalog(layout.catalog());
    const GroundTruth truth = truth_from_judgments(test, catalog);
    const FeatureTable base = read_features(layout.base_features());

    auto rankings_for = [&](const std::string& name, const fs::path& snapshot_path) {
      const FeatureSnapshot snap = read_snapshot(snapshot_path);
      return rank_all(read_model(layout.model(name)), test,
                      assemble_features(base, snap, snap.has_sv_subs()));
    };
    const Rankings baseline = rankings_for("T1", layout.snapshot());
    Json models = Json::array();
    auto add = [&](const std::string& name, const std::string& strategy, const Rankings& r) {
      const DiscoverabilityReport d = discoverability_report(baseline, r, truth);
      models.push_back(Json{{"model", name},
                            {"strategy", strategy},
                            {"queries", d.after.queries},
                            {"cold_start_queries", d.after.cold_queries},
                            {"ndcg_all", d.after.ndcg_all},
                            {"ndcg_cold_start", d.after.ndcg_cold},
                            {"cold_start_share_top10", d.after.cold_share_top10},
                            {"vs_T1",
                             {{"ndcg_all_rel_delta", d.ndcg_all_rel_delta},
                              {"ndcg_cold_start_rel_delta", d.ndcg_cold_rel_delta},
                              {"cold_start_share_delta", d.cold_share_delta}}}});
    };
    add("T1", "none", baseline);
    for (const AggregationStrategy& s : strategies) {
      add(model_name(s), s.name(), rankings_for(model_name(s), layout.boosted_snapshot(s.name())));
    }
    write_json(layout.evaluation(), Json{{"split", "test"}, {"k", kDefaultNdcgK}, {"models", models}});
  });

  Json report_summary;
  stage("report", [&] { report_summary = stage_report(cfg, layout); });

  manifest.summary = Json{{"substitutes", substitute_result_to_json(subs)},
                          {"refresh",
                           {{"period_hours", cfg.refresh_period_hours},
                            {"snapshots", schedule.size()},
                            {"as_of", schedule.back()}}},
                          {"evaluation", read_json(layout.evaluation())},
                          {"report", report_summary}};

  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(layout.root)) {
    if (entry.is_regular_file() && entry.path() != layout.manifest()) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const fs::path& f : files) {
    manifest.outputs[fs::relative(f, layout.root).generic_string()] = sha256_file(f);
  }
  write_json(layout.manifest(), manifest_to_json(manifest, cfg));
  return manifest;
}

}  // namespace bfs
