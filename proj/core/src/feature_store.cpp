#include "bfs/feature_store.hpp"

#include <cmath>
#include <unordered_map>

#include "bfs/error.hpp"

namespace bfs {

void DecayConfig::validate() const {
  if (half_lives_days.empty()) throw ConfigError("decay: half_lives_days is empty");
  if (half_lives_days.size() != blend_weights.size()) {
    throw ConfigError("decay: half_lives_days and blend_weights differ in length");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < half_lives_days.size(); ++i) {
    if (!(half_lives_days[i] > 0.0) || !std::isfinite(half_lives_days[i])) {
      throw ConfigError("decay: half-life must be positive");
    }
    if (!(blend_weights[i] > 0.0) || !std::isfinite(blend_weights[i])) {
      throw ConfigError("decay: blend weight must be positive");
    }
    total += blend_weights[i];
  }
  if (std::abs(total - 1.0) > 1e-12) throw ConfigError("decay: blend weights must sum to 1");
  if (!(window_days > 0.0) || !std::isfinite(window_days)) {
    throw ConfigError("decay: window_days must be positive");
  }
}

void to_json(Json& j, const DecayConfig& cfg) {
  j = Json{{"half_lives_days", cfg.half_lives_days},
           {"blend_weights", cfg.blend_weights},
           {"window_days", cfg.window_days},
           {"count_quantity", cfg.count_quantity}};
}

void from_json(const Json& j, DecayConfig& cfg) {
  cfg = DecayConfig{};
  if (j.contains("half_lives_days")) j.at("half_lives_days").get_to(cfg.half_lives_days);
  if (j.contains("blend_weights")) j.at("blend_weights").get_to(cfg.blend_weights);
  if (j.contains("window_days")) j.at("window_days").get_to(cfg.window_days);
  if (j.contains("count_quantity")) j.at("count_quantity").get_to(cfg.count_quantity);
}

double decay_factor(double age_days, const DecayConfig& cfg) {
  if (age_days < 0.0 || age_days > cfg.window_days) return 0.0;
  double f = 0.0;
  for (std::size_t j = 0; j < cfg.half_lives_days.size(); ++j) {
    f += cfg.blend_weights[j] * std::exp2(-age_days / cfg.half_lives_days[j]);
  }
  return f;
}

namespace {

double units(const InteractionEvent& e, const DecayConfig& cfg) {
  return cfg.count_quantity ? static_cast<double>(e.quantity) : 1.0;
}

double age_days(Timestamp as_of, Timestamp t) {
  return static_cast<double>(as_of - t) / kSecondsPerDay;
}

}  // namespace

double compute_sv(std::span<const InteractionEvent> events, const ProductId& product,
                  Timestamp as_of, const DecayConfig& cfg) {
  cfg.validate();
  double sv = 0.0;
  for (const InteractionEvent& e : events) {
    if (e.product != product) continue;
    if (e.timestamp > as_of) {
      throw InputError("event for " + product.str() + " at " + std::to_string(e.timestamp) +
                       " is after as_of " + std::to_string(as_of));
    }
    if (e.action != Action::Purchase) continue;
    sv += units(e, cfg) * decay_factor(age_days(as_of, e.timestamp), cfg);
  }
  return sv;
}

double FeatureSnapshot::sv_of(const ProductId& product) const {
  auto it = sv.find(product);
  if (it == sv.end()) throw LookupError("snapshot has no sv for " + product.str());
  return it->second;
}

double FeatureSnapshot::sv_subs_of(const ProductId& product) const {
  if (!sv_subs) throw LookupError("snapshot has no sv_subs column");
  auto it = sv_subs->find(product);
  if (it == sv_subs->end()) throw LookupError("snapshot has no sv_subs for " + product.str());
  return it->second;
}

FeatureSnapshot build_snapshot(std::span<const InteractionEvent> events,
                               std::span<const Product> catalog, Timestamp as_of,
                               const DecayConfig& cfg) {
  cfg.validate();
  FeatureSnapshot snap;
  snap.as_of = as_of;
  // Per-product sums follow event order, matching compute_sv bit for bit.
  std::unordered_map<ProductId, double*> slot;
  slot.reserve(catalog.size());
  for (const Product& p : catalog) {
    auto [it, inserted] = snap.sv.emplace(p.id, 0.0);
    if (!inserted) throw InputError("duplicate product id " + p.id.str());
    slot.emplace(p.id, &it->second);
  }
  for (const InteractionEvent& e : events) {
    if (e.timestamp > as_of) {
      throw InputError("event for " + e.product.str() + " is after as_of " +
                       std::to_string(as_of));
    }
    auto it = slot.find(e.product);
    if (it == slot.end()) throw InputError("event references unknown product " + e.product.str());
    if (e.action != Action::Purchase) continue;
    *it->second += units(e, cfg) * decay_factor(age_days(as_of, e.timestamp), cfg);
  }
  return snap;
}

std::vector<Timestamp> refresh_schedule(Timestamp start, Timestamp end, double period_hours) {
  if (!(period_hours > 0.0) || !std::isfinite(period_hours)) {
    throw ConfigError("refresh period must be positive");
  }
  if (end < start) throw InputError("refresh schedule end precedes start");
  const long double period = static_cast<long double>(period_hours) * 3600.0L;
  const long double span = static_cast<long double>(end - start);
  const auto steps = static_cast<std::int64_t>(std::floor(span / period + 1e-9L));
  std::vector<Timestamp> out;
  out.reserve(static_cast<std::size_t>(steps) + 1);
  for (std::int64_t i = 0; i <= steps; ++i) {
    out.push_back(start + static_cast<Timestamp>(std::floor(i * period + 1e-6L)));
  }
  return out;
}

std::vector<InteractionEvent> events_until(std::span<const InteractionEvent> events,
                                           Timestamp as_of) {
  std::vector<InteractionEvent> out;
  for (const InteractionEvent& e : events) {
    if (e.timestamp <= as_of) out.push_back(e);
  }
  return out;
}

Json snapshot_to_json(const FeatureSnapshot& snapshot) {
  Json products = Json::array();
  for (const auto& [id, sv] : snapshot.sv) {
    Json row{{"id", id}, {"sv", sv}};
    if (snapshot.sv_subs) row["sv_subs"] = snapshot.sv_subs->at(id);
    products.push_back(std::move(row));
  }
  return Json{{"as_of", snapshot.as_of}, {"products", std::move(products)}};
}

FeatureSnapshot snapshot_from_json(const Json& j) {
  FeatureSnapshot snap;
  j.at("as_of").get_to(snap.as_of);
  const Json& products = j.at("products");
  bool any_subs = false;
  bool all_subs = true;
  for (const Json& row : products) {
    const bool has = row.contains("sv_subs");
    any_subs = any_subs || has;
    all_subs = all_subs && has;
  }
  if (any_subs && !all_subs) throw InputError("snapshot has sv_subs for only some products");
  if (any_subs) snap.sv_subs.emplace();
  for (const Json& row : products) {
    ProductId id = row.at("id").get<ProductId>();
    const double sv = row.at("sv").get<double>();
    if (!std::isfinite(sv) || sv < 0.0) throw InputError("invalid sv for " + id.str());
    if (any_subs) {
      const double subs = row.at("sv_subs").get<double>();
      if (!std::isfinite(subs) || subs < sv) {
        throw InputError("sv_subs below sv for " + id.str());
      }
      snap.sv_subs->emplace(id, subs);
    }
    if (!snap.sv.emplace(std::move(id), sv).second) {
      throw InputError("duplicate product in snapshot");
    }
  }
  return snap;
}

void write_snapshot(const std::filesystem::path& path, const FeatureSnapshot& snapshot) {
  write_json(path, snapshot_to_json(snapshot));
}

FeatureSnapshot read_snapshot(const std::filesystem::path& path) {
  return snapshot_from_json(read_json(path));
}

}  // namespace bfs
