// bfs: command-line driver for the substitute-boosting pipeline.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bfs/pipeline.hpp"

namespace fs = std::filesystem;

namespace {

struct GlobalOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
};

bool looks_like_pipeline_config(const bfs::Json& j) {
  for (const char* key : {"out_dir", "sim", "decay", "substitutes", "classifier", "strategies",
                          "train", "refresh_period_hours"}) {
    if (j.contains(key)) return true;
  }
  return false;
}

// Reads --config as a full pipeline config, or as the section the command
// needs when the file holds only that section.
bfs::PipelineConfig resolve_config(const GlobalOptions& g, const std::string& command) {
  bfs::PipelineConfig cfg;
  if (!g.config.empty()) {
    bfs::Json j;
    try {
      j = bfs::read_json(g.config);
    } catch (const bfs::Error& e) {
      throw bfs::ConfigError(e.what());
    }
    try {
      if (looks_like_pipeline_config(j)) {
        cfg = j.get<bfs::PipelineConfig>();
      } else if (command == "simulate") {
        cfg.sim = j.get<bfs::SimConfig>();
      } else if (command == "train") {
        cfg.train = j.get<bfs::TrainConfig>();
      } else if (command == "compute-features") {
        cfg.decay = j.get<bfs::DecayConfig>();
      } else if (command == "build-substitutes") {
        cfg.substitutes = j.get<bfs::SubstituteParams>();
      } else {
        cfg = j.get<bfs::PipelineConfig>();
      }
    } catch (const bfs::Json::exception& e) {
      throw bfs::ConfigError(g.config + ": " + e.what());
    }
  }
  if (g.seed) {
    cfg.sim.seed = *g.seed;
    cfg.train.seed = *g.seed;
  }
  if (!g.out_dir.empty()) cfg.out_dir = g.out_dir;
  return cfg;
}

fs::path or_default(const std::string& given, const fs::path& fallback) {
  return given.empty() ? fallback : fs::path(given);
}

std::optional<fs::path> optional_path(const std::string& given) {
  if (given.empty()) return std::nullopt;
  return fs::path(given);
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void print_json(const bfs::Json& j) { std::cout << j.dump(2) << '\n'; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Behavioral feature boosting via substitute relationships"};
  app.require_subcommand(1);

  GlobalOptions g;
  std::uint64_t seed = 0;
  app.add_option("--config", g.config, "Pipeline config file (or one section of it)");
  auto* seed_opt = app.add_option("--seed", seed, "Override the simulator and training seeds");
  app.add_option("--out-dir", g.out_dir, "Run directory (overrides out_dir)");

  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic marketplace");

  std::string catalog, truth, table_out, classifier_out, quality_out, required_attrs;
  std::optional<std::size_t> k, max_subs;
  std::optional<double> target_precision;
  auto* build_subs = app.add_subcommand("build-substitutes", "Build the substitute lookup table");
  build_subs->add_option("--catalog", catalog);
  build_subs->add_option("--truth", truth, "Ground-truth file supplying training pair labels");
  build_subs->add_option("--out", table_out);
  build_subs->add_option("--classifier-out", classifier_out);
  build_subs->add_option("--quality-out", quality_out);
  build_subs->add_option("--k", k);
  build_subs->add_option("--max-substitutes", max_subs);
  build_subs->add_option("--target-precision", target_precision);
  build_subs->add_option("--required-attrs", required_attrs, "Comma-separated attribute names");

  std::string events, decay_config, snapshot_out;
  std::optional<bfs::Timestamp> as_of;
  auto* features = app.add_subcommand("compute-features", "Compute the SV snapshot");
  features->add_option("--catalog", catalog);
  features->add_option("--events", events);
  features->add_option("--as-of", as_of, "Snapshot time in epoch seconds (default: horizon end)");
  features->add_option("--decay-config", decay_config);
  features->add_option("--out", snapshot_out);

  std::string strategy, snapshot, table, report_out;
  auto* boost = app.add_subcommand("boost", "Aggregate substitute SV into SV_Subs");
  boost->add_option("--strategy", strategy, "mean|max|pNN|attention")->required();
  boost->add_option("--snapshot", snapshot);
  boost->add_option("--table", table);
  boost->add_option("--catalog", catalog, "Catalog (attention only)");
  boost->add_option("--out", snapshot_out);
  boost->add_option("--report", report_out);

  std::string judgments, features_path, model_out;
  auto* train = app.add_subcommand("train", "Train a LambdaMART ranker");
  train->add_option("--judgments", judgments);
  train->add_option("--features", features_path);
  train->add_option("--snapshot", snapshot, "Snapshot whose sv (and sv_subs) columns are joined");
  train->add_option("--out", model_out);

  std::string model, segment = "all";
  auto* evaluate = app.add_subcommand("evaluate", "NDCG@10 of a model on judged queries");
  evaluate->add_option("--model", model);
  evaluate->add_option("--judgments", judgments);
  evaluate->add_option("--features", features_path);
  evaluate->add_option("--snapshot", snapshot);
  evaluate->add_option("--catalog", catalog);
  evaluate->add_option("--segment", segment, "all|cold-start");

  auto* report = app.add_subcommand("report", "Histogram, partial dependence and model comparison CSVs");
  auto* run_all = app.add_subcommand("run-all", "Run every stage and write manifest.json");

  for (CLI::App* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  if (*seed_opt) g.seed = seed;

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    bfs::PipelineConfig cfg = resolve_config(g, command);
    if (k) cfg.substitutes.k = *k;
    if (max_subs) cfg.substitutes.max_substitutes = *max_subs;
    if (target_precision) cfg.substitutes.target_precision = *target_precision;
    if (!required_attrs.empty()) cfg.substitutes.required_attrs = split_csv(required_attrs);
    if (!decay_config.empty()) {
      try {
        cfg.decay = bfs::read_json(decay_config).get<bfs::DecayConfig>();
      } catch (const bfs::Json::exception& e) {
        throw bfs::ConfigError(decay_config + ": " + e.what());
      } catch (const bfs::InputError& e) {
        throw bfs::ConfigError(e.what());
      }
    }
    cfg.validate();
    const bfs::RunLayout layout(cfg.out_dir);
    std::optional<bfs::AggregationStrategy> parsed_strategy;
    if (*boost) parsed_strategy = bfs::AggregationStrategy::parse(strategy);
    const bfs::Segment parsed_segment = bfs::parse_segment(segment);

    try {
      if (*simulate) {
        // Standalone simulate writes straight into --out-dir.
        const fs::path dir = g.out_dir.empty() ? layout.data() : fs::path(g.out_dir);
        bfs::stage_simulate(cfg.sim, dir);
        std::cerr << "simulate: wrote " << dir.string() << '\n';
      } else if (*build_subs) {
        const fs::path out = or_default(table_out, layout.substitutes());
        const auto r = bfs::stage_build_substitutes(
            or_default(catalog, layout.catalog()), or_default(truth, layout.truth()),
            cfg.substitutes, cfg.classifier, out,
            or_default(classifier_out, out.parent_path() / "classifier.json"),
            or_default(quality_out, out.parent_path() / "quality.json"));
        print_json(bfs::substitute_result_to_json(r));
      } else if (*features) {
        std::optional<bfs::Timestamp> t = as_of;
        if (!t) t = cfg.sim.horizon_end();
        const auto snap = bfs::stage_compute_features(
            or_default(catalog, layout.catalog()), or_default(events, layout.events()), t,
            cfg.decay, or_default(snapshot_out, layout.snapshot()));
        std::cerr << "compute-features: " << snap.sv.size() << " products at " << snap.as_of
                  << '\n';
      } else if (*boost) {
        const auto r = bfs::stage_boost(
            *parsed_strategy, or_default(snapshot, layout.snapshot()),
            or_default(table, layout.substitutes()), or_default(catalog, layout.catalog()),
            cfg.classifier.embedding_dim,
            or_default(snapshot_out, layout.boosted_snapshot(parsed_strategy->name())),
            or_default(report_out, layout.boost_report(parsed_strategy->name())));
        print_json(bfs::boost_report_to_json(r));
      } else if (*train) {
        const auto r = bfs::stage_train(
            or_default(judgments, layout.train_judgments()),
            or_default(features_path, layout.base_features()),
            snapshot.empty() ? std::optional<fs::path>(layout.snapshot()) : optional_path(snapshot),
            cfg.train, or_default(model_out, layout.model("T1")));
        std::cerr << "train: " << r.trainable_queries << " queries, final train NDCG@10 "
                  << (r.train_ndcg.empty() ? 0.0 : r.train_ndcg.back()) << '\n';
      } else if (*evaluate) {
        const auto r = bfs::stage_evaluate(
            or_default(model, layout.model("T1")), or_default(judgments, layout.test_judgments()),
            or_default(features_path, layout.base_features()),
            snapshot.empty() ? std::optional<fs::path>(layout.snapshot()) : optional_path(snapshot),
            or_default(catalog, layout.catalog()), parsed_segment);
        print_json(bfs::evaluation_to_json(r));
      } else if (*report) {
        print_json(bfs::stage_report(cfg, layout));
      } else if (*run_all) {
        const auto manifest = bfs::run_pipeline(cfg);
        for (const auto& t : manifest.timings) {
          std::fprintf(stderr, "%-18s %8.2fs\n", t.stage.c_str(), t.seconds);
        }
        print_json(manifest.summary.at("evaluation"));
      }
    } catch (const bfs::StageError&) {
      throw;
    } catch (const bfs::ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw bfs::StageError(command, e.what());
    }
  } catch (const bfs::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const bfs::StageError& e) {
    std::cerr << "stage " << e.stage() << " failed: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "stage " << command << " failed: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
