#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <unordered_map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace bfs {

using Timestamp = std::int64_t;  // seconds since Unix epoch

inline constexpr double kSecondsPerDay = 86400.0;

// Opaque product token. Ordering is plain lexicographic byte order and is the
// tie-breaker for every ranked list in the library.
class ProductId {
 public:
  ProductId() = default;
  explicit ProductId(std::string value);

  const std::string& str() const { return value_; }
  bool empty() const { return value_.empty(); }

  friend auto operator<=>(const ProductId&, const ProductId&) = default;
  friend bool operator==(const ProductId&, const ProductId&) = default;

 private:
  std::string value_;
};

struct Product {
  ProductId id;
  std::string title;
  std::string category;
  std::string brand;
  std::map<std::string, std::string> attributes;  // includes "color", "size"
  Timestamp launch_time = 0;
  bool is_cold_start = false;

  friend bool operator==(const Product&, const Product&) = default;
};

enum class Action { View, Click, AddToCart, Purchase };

std::string_view to_string(Action action);
Action parse_action(std::string_view name);

struct InteractionEvent {
  std::string user;
  ProductId product;
  Action action = Action::View;
  Timestamp timestamp = 0;
  std::uint32_t quantity = 0;  // units; nonzero only for Purchase

  friend bool operator==(const InteractionEvent&, const InteractionEvent&) = default;
};

struct QueryJudgment {
  std::string query;
  std::vector<ProductId> candidates;
  std::vector<int> labels;       // grades in [0, 4], aligned with candidates
  std::vector<int> logged_rank;  // 1-based position in the logged ranking

  friend bool operator==(const QueryJudgment&, const QueryJudgment&) = default;
};

inline constexpr int kMaxGrade = 4;

// Fixed-order feature values for one (query, product) pair.
struct FeatureVector {
  std::vector<std::string> schema;
  std::vector<double> values;

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

struct ValidationIssue {
  std::size_t index = 0;  // position in the input list
  std::string product;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;

  std::size_t error_count() const { return issues.size(); }
  bool ok() const { return issues.empty(); }
};

// Reports every catalog invariant violation: empty or duplicate ids, empty
// categories and negative launch times.
ValidationReport validate_catalog(const std::vector<Product>& products);

// Structural checks for a single event / judgment; throw InputError.
void validate_event(const InteractionEvent& event);
void validate_judgment(const QueryJudgment& judgment);
void validate_feature_vector(const FeatureVector& features);

}  // namespace bfs

template <>
struct std::hash<bfs::ProductId> {
  std::size_t operator()(const bfs::ProductId& id) const noexcept {
    return std::hash<std::string>{}(id.str());
  }
};

namespace bfs {

// Feature vectors for every judged (query, product) pair under one shared
// schema. This is the ranker's training/scoring input.
class FeatureTable {
 public:
  using Key = std::pair<std::string, ProductId>;

  FeatureTable() = default;
  explicit FeatureTable(std::vector<std::string> schema);

  const std::vector<std::string>& schema() const { return schema_; }
  std::size_t size() const { return rows_.size(); }

  // Throws InputError on length mismatch or non-finite values.
  void set(const std::string& query, const ProductId& product, std::vector<double> values);
  bool contains(const std::string& query, const ProductId& product) const;
  // Throws LookupError when the pair is absent.
  const std::vector<double>& values(const std::string& query, const ProductId& product) const;
  FeatureVector vector(const std::string& query, const ProductId& product) const;

  // Index of a named column; throws LookupError when absent.
  std::size_t column(std::string_view name) const;

  const std::map<Key, std::vector<double>>& rows() const { return rows_; }

 private:
  std::vector<std::string> schema_;
  std::map<Key, std::vector<double>> rows_;
};

}  // namespace bfs

namespace bfs {

// Read-only id -> Product view over a catalog that outlives it.
class CatalogIndex {
 public:
  CatalogIndex() = default;
  // Throws InputError on duplicate ids.
  explicit CatalogIndex(std::span<const Product> catalog);

  bool contains(const ProductId& id) const { return by_id_.contains(id); }
  // Throws LookupError.
  const Product& at(const ProductId& id) const;
  std::size_t size() const { return by_id_.size(); }

 private:
  std::unordered_map<ProductId, const Product*> by_id_;
};

}  // namespace bfs
