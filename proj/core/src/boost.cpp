#include "bfs/boost.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "bfs/error.hpp"

namespace bfs {

AggregationStrategy AggregationStrategy::percentile(double q) {
  if (!(q > 0.0 && q <= 1.0)) throw ConfigError("percentile q must lie in (0, 1]");
  return {Kind::Percentile, q};
}

AggregationStrategy AggregationStrategy::parse(std::string_view name) {
  if (name == "mean") return mean();
  if (name == "max") return max();
  if (name == "attention") return attention();
  if (name.size() >= 2 && name.front() == 'p') {
    const std::string digits(name.substr(1));
    if (digits.find_first_not_of("0123456789") == std::string::npos && digits.size() <= 3) {
      return percentile(std::stod(digits) / 100.0);
    }
  }
  throw ConfigError("unknown aggregation strategy '" + std::string(name) + "'");
}

std::string AggregationStrategy::name() const {
  switch (kind) {
    case Kind::Mean: return "mean";
    case Kind::Max: return "max";
    case Kind::Attention: return "attention";
    case Kind::Percentile: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "p%g", q * 100.0);
      return buf;
    }
  }
  return "mean";
}

namespace {

std::vector<double> sorted_copy(std::span<const double> values) {
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  return v;
}

// Sum in ascending order so the result does not depend on input order.
double sorted_mean(std::span<const double> values) {
  double sum = 0.0;
  for (double v : sorted_copy(values)) sum += v;
  return sum / static_cast<double>(values.size());
}

}  // namespace

double percentile(std::span<const double> values, double q) {
  if (values.empty()) throw InputError("percentile of an empty list");
  if (!(q > 0.0 && q <= 1.0)) throw ConfigError("percentile q must lie in (0, 1]");
  const std::vector<double> v = sorted_copy(values);
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(lo);
  if (lo + 1 >= v.size() || frac == 0.0) return v[lo];
  return v[lo] + frac * (v[lo + 1] - v[lo]);
}

double aggregate(std::span<const double> values, const AggregationStrategy& strategy,
                 std::span<const double> seed_embedding,
                 std::span<const std::span<const double>> substitute_embeddings) {
  if (values.empty()) throw InputError("aggregate over an empty substitute set");
  switch (strategy.kind) {
    case AggregationStrategy::Kind::Mean:
      return sorted_mean(values);
    case AggregationStrategy::Kind::Max:
      return *std::max_element(values.begin(), values.end());
    case AggregationStrategy::Kind::Percentile:
      return percentile(values, strategy.q);
    case AggregationStrategy::Kind::Attention:
      break;
  }

  if (substitute_embeddings.size() != values.size()) {
    throw InputError("attention needs one substitute embedding per value");
  }
  if (seed_embedding.empty()) throw InputError("attention needs the seed embedding");
  std::vector<std::pair<double, double>> weighted;  // (value, weight)
  weighted.reserve(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (substitute_embeddings[i].size() != seed_embedding.size()) {
      throw InputError("attention embeddings differ in dimension");
    }
    weighted.emplace_back(values[i], std::max(0.0, dot(seed_embedding, substitute_embeddings[i])));
  }
  const bool uniform = std::all_of(weighted.begin(), weighted.end(), [&](const auto& vw) {
    return vw.second == weighted.front().second;
  });
  if (uniform) return sorted_mean(values);  // covers the all-zero fallback

  std::sort(weighted.begin(), weighted.end());
  double total = 0.0;
  for (const auto& vw : weighted) total += vw.second;
  double acc = 0.0;
  for (const auto& [value, weight] : weighted) acc += (weight / total) * value;
  return acc;
}

namespace {

double snapshot_sv(const FeatureSnapshot& snapshot, const ProductId& id) {
  auto it = snapshot.sv.find(id);
  if (it == snapshot.sv.end()) {
    throw ConsistencyError("product " + id.str() + " is missing from the snapshot");
  }
  return it->second;
}

std::optional<double> aggregate_substitutes(const ProductId& product,
                                            const FeatureSnapshot& snapshot,
                                            const SubstituteSet& subs,
                                            const AggregationStrategy& strategy,
                                            const EmbeddingTable* embeddings) {
  if (subs.substitutes.empty()) return std::nullopt;
  std::vector<double> values;
  values.reserve(subs.substitutes.size());
  for (const Substitute& s : subs.substitutes) values.push_back(snapshot_sv(snapshot, s.id));

  if (strategy.kind != AggregationStrategy::Kind::Attention) return aggregate(values, strategy);
  if (embeddings == nullptr) throw InputError("attention aggregation needs embeddings");
  std::vector<std::span<const double>> sub_embs;
  sub_embs.reserve(subs.substitutes.size());
  for (const Substitute& s : subs.substitutes) sub_embs.push_back(embeddings->vector(s.id));
  return aggregate(values, strategy, embeddings->vector(product), sub_embs);
}

}  // namespace

double boost_product(const ProductId& product, const FeatureSnapshot& snapshot,
                     const SubstituteSet& subs, const AggregationStrategy& strategy,
                     const EmbeddingTable* embeddings) {
  const double own = snapshot_sv(snapshot, product);
  const auto agg = aggregate_substitutes(product, snapshot, subs, strategy, embeddings);
  return agg ? std::max(*agg, own) : own;
}

std::pair<FeatureSnapshot, BoostReport> boost_all(const FeatureSnapshot& snapshot,
                                                  const LookupTable& table,
                                                  const AggregationStrategy& strategy,
                                                  const EmbeddingTable* embeddings) {
  if (table.size() != snapshot.sv.size()) {
    throw ConsistencyError("lookup table covers " + std::to_string(table.size()) +
                           " products but the snapshot covers " +
                           std::to_string(snapshot.sv.size()));
  }
  FeatureSnapshot out = snapshot;
  out.sv_subs.emplace();
  BoostReport report;
  report.strategy = strategy;
  report.rows.reserve(snapshot.sv.size());
  for (const auto& [id, sv] : snapshot.sv) {
    auto it = table.find(id);
    if (it == table.end()) {
      throw ConsistencyError("lookup table has no entry for " + id.str());
    }
    const auto agg = aggregate_substitutes(id, snapshot, it->second, strategy, embeddings);
    const double boosted = agg ? std::max(*agg, sv) : sv;
    out.sv_subs->emplace(id, boosted);
    report.rows.push_back({id, sv, agg, boosted});
    if (boosted > sv) {
      ++report.boosted_count;
    } else {
      ++report.unchanged_count;
    }
  }
  return {std::move(out), std::move(report)};
}

Json boost_report_to_json(const BoostReport& report) {
  Json rows = Json::array();
  for (const BoostRow& r : report.rows) {
    rows.push_back(Json{{"product", r.product},
                        {"sv", r.sv},
                        {"aggregate", r.aggregate ? Json(*r.aggregate) : Json(nullptr)},
                        {"sv_subs", r.sv_subs}});
  }
  return Json{{"strategy", report.strategy.name()},
              {"boosted_count", report.boosted_count},
              {"unchanged_count", report.unchanged_count},
              {"rows", std::move(rows)}};
}

}  // namespace bfs
