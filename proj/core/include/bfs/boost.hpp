#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bfs/embedding.hpp"
#include "bfs/feature_store.hpp"
#include "bfs/substitutes.hpp"

namespace bfs {

struct AggregationStrategy {
  enum class Kind { Mean, Max, Percentile, Attention };

  Kind kind = Kind::Mean;
  double q = 0.75;  // Percentile only, in (0, 1]

  static AggregationStrategy mean() { return {Kind::Mean, 0.75}; }
  static AggregationStrategy max() { return {Kind::Max, 0.75}; }
  static AggregationStrategy percentile(double q);
  static AggregationStrategy attention() { return {Kind::Attention, 0.75}; }

  // "mean", "max", "p75" (any "pNN"), "attention".
  static AggregationStrategy parse(std::string_view name);
  std::string name() const;

  friend bool operator==(const AggregationStrategy&, const AggregationStrategy&) = default;
};

// g(values). Attention weights are max(0, <p, s_i>) normalized to sum 1,
// falling back to Mean when every weight is 0 (or all weights are equal).
// Throws InputError on empty values or embeddings misaligned with values.
double aggregate(std::span<const double> values, const AggregationStrategy& strategy,
                 std::span<const double> seed_embedding = {},
                 std::span<const std::span<const double>> substitute_embeddings = {});

// Linear-interpolation quantile at position q * (n - 1) of the sorted values.
double percentile(std::span<const double> values, double q);

// max(aggregate(sv over subs), sv[p]); sv[p] itself when subs is empty.
// Throws ConsistencyError naming any product missing from the snapshot.
double boost_product(const ProductId& product, const FeatureSnapshot& snapshot,
                     const SubstituteSet& subs, const AggregationStrategy& strategy,
                     const EmbeddingTable* embeddings = nullptr);

struct BoostRow {
  ProductId product;
  double sv = 0.0;
  std::optional<double> aggregate;  // absent for an empty substitute set
  double sv_subs = 0.0;
};

struct BoostReport {
  AggregationStrategy strategy;
  std::size_t boosted_count = 0;  // sv_subs > sv
  std::size_t unchanged_count = 0;
  std::vector<BoostRow> rows;  // sorted by product
};

Json boost_report_to_json(const BoostReport& report);

// Returns the snapshot with sv_subs filled for every product. Throws
// ConsistencyError when the table and snapshot cover different products.
std::pair<FeatureSnapshot, BoostReport> boost_all(const FeatureSnapshot& snapshot,
                                                  const LookupTable& table,
                                                  const AggregationStrategy& strategy,
                                                  const EmbeddingTable* embeddings = nullptr);

}  // namespace bfs
