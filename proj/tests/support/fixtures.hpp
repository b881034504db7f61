#pragma once

#include <atomic>
#include <filesystem>
#include <string>
#include <unistd.h>

#include "bfs/market_sim.hpp"
#include "bfs/pipeline.hpp"
#include "bfs/types.hpp"

namespace fixtures {

inline bfs::Product product(const std::string& id, const std::string& title,
                            const std::string& category, bool cold = false) {
  bfs::Product p;
  p.id = bfs::ProductId(id);
  p.title = title;
  p.category = category;
  p.brand = "acme";
  p.attributes = {{"color", "black"}, {"size", "m"}};
  p.launch_time = 1000;
  p.is_cold_start = cold;
  return p;
}

inline bfs::InteractionEvent purchase(const std::string& id, bfs::Timestamp t, unsigned qty = 1) {
  return {"u1", bfs::ProductId(id), bfs::Action::Purchase, t, qty};
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("bfs_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// A marketplace small enough for unit tests.
inline bfs::SimConfig small_sim(std::uint64_t seed = 11) {
  bfs::SimConfig cfg;
  cfg.seed = seed;
  cfg.num_products = 300;
  cfg.num_categories = 8;
  cfg.num_queries = 80;
  cfg.events_per_day = 1500;
  return cfg;
}

inline bfs::PipelineConfig small_pipeline(const std::filesystem::path& out, std::uint64_t seed = 11) {
  bfs::PipelineConfig cfg;
  cfg.out_dir = out;
  cfg.sim = small_sim(seed);
  cfg.classifier.training_seeds = 150;
  cfg.classifier.epochs = 60;
  cfg.train.num_trees = 20;
  return cfg;
}

}  // namespace fixtures
