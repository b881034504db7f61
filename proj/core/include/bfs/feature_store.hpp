#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "bfs/io.hpp"
#include "bfs/types.hpp"

namespace bfs {

// Sales Velocity decay: each purchase contributes
//   units * sum_j blend_weights[j] * 2^(-age_days / half_lives_days[j])
// when its age lies in the closed window [0, window_days].
struct DecayConfig {
  std::vector<double> half_lives_days{7.0, 30.0};
  std::vector<double> blend_weights{0.5, 0.5};
  double window_days = 30.0;
  bool count_quantity = true;  // false: every purchase counts as one order

  // Throws ConfigError.
  void validate() const;
};

void to_json(Json& j, const DecayConfig& cfg);
void from_json(const Json& j, DecayConfig& cfg);

// Decay multiplier for an event of the given age; 0 outside the window.
double decay_factor(double age_days, const DecayConfig& cfg);

double compute_sv(std::span<const InteractionEvent> events, const ProductId& product,
                  Timestamp as_of, const DecayConfig& cfg);

struct FeatureSnapshot {
  Timestamp as_of = 0;
  std::map<ProductId, double> sv;
  std::optional<std::map<ProductId, double>> sv_subs;

  bool has_sv_subs() const { return sv_subs.has_value(); }
  // Throws LookupError naming the missing product.
  double sv_of(const ProductId& product) const;
  double sv_subs_of(const ProductId& product) const;

  friend bool operator==(const FeatureSnapshot&, const FeatureSnapshot&) = default;
};

FeatureSnapshot build_snapshot(std::span<const InteractionEvent> events,
                               std::span<const Product> catalog, Timestamp as_of,
                               const DecayConfig& cfg);

// [start, start + period, ...] up to and including end.
std::vector<Timestamp> refresh_schedule(Timestamp start, Timestamp end, double period_hours);

// Events with timestamp <= as_of, for replaying a refresh over a longer log.
std::vector<InteractionEvent> events_until(std::span<const InteractionEvent> events,
                                           Timestamp as_of);

// {"as_of": t, "products": [{"id", "sv"[, "sv_subs"]}, ...]} sorted by id.
Json snapshot_to_json(const FeatureSnapshot& snapshot);
FeatureSnapshot snapshot_from_json(const Json& j);
void write_snapshot(const std::filesystem::path& path, const FeatureSnapshot& snapshot);
FeatureSnapshot read_snapshot(const std::filesystem::path& path);

}  // namespace bfs
