#include "bfs/types.hpp"

#include <cmath>
#include <set>
#include <utility>

#include "bfs/error.hpp"

namespace bfs {

ProductId::ProductId(std::string value) : value_(std::move(value)) {
  if (value_.empty()) throw InputError("empty product id");
}

std::string_view to_string(Action action) {
  switch (action) {
    case Action::View: return "view";
    case Action::Click: return "click";
    case Action::AddToCart: return "add_to_cart";
    case Action::Purchase: return "purchase";
  }
  return "view";
}

Action parse_action(std::string_view name) {
  if (name == "view") return Action::View;
  if (name == "click") return Action::Click;
  if (name == "add_to_cart") return Action::AddToCart;
  if (name == "purchase") return Action::Purchase;
  throw InputError("unknown action '" + std::string(name) + "'");
}

ValidationReport validate_catalog(const std::vector<Product>& products) {
  ValidationReport report;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < products.size(); ++i) {
    const Product& p = products[i];
    const std::string& id = p.id.str();
    auto add = [&](std::string message) {
      report.issues.push_back({i, id, std::move(message)});
    };
    if (id.empty()) {
      add("empty product id");
    } else if (!seen.insert(id).second) {
      add("duplicate product id");
    }
    if (p.category.empty()) add("empty category");
    if (p.launch_time < 0) add("negative launch_time");
  }
  return report;
}

void validate_event(const InteractionEvent& event) {
  if (event.product.empty()) throw InputError("event without product");
  if (event.timestamp < 0) throw InputError("event with negative timestamp");
  if (event.action != Action::Purchase && event.quantity != 0) {
    throw InputError("non-purchase event for " + event.product.str() + " carries a quantity");
  }
}

void validate_judgment(const QueryJudgment& j) {
  if (j.candidates.size() < 2) {
    throw InputError("judgment '" + j.query + "' has fewer than 2 candidates");
  }
  if (j.labels.size() != j.candidates.size() || j.logged_rank.size() != j.candidates.size()) {
    throw InputError("judgment '" + j.query + "' has misaligned labels");
  }
  for (int label : j.labels) {
    if (label < 0 || label > kMaxGrade) {
      throw InputError("judgment '" + j.query + "' has a label outside [0, 4]");
    }
  }
}

void validate_feature_vector(const FeatureVector& features) {
  if (features.values.size() != features.schema.size()) {
    throw InputError("feature vector length does not match its schema");
  }
  for (double v : features.values) {
    if (!std::isfinite(v)) throw InputError("non-finite feature value");
  }
}

}  // namespace bfs

namespace bfs {

FeatureTable::FeatureTable(std::vector<std::string> schema) : schema_(std::move(schema)) {}

void FeatureTable::set(const std::string& query, const ProductId& product,
                       std::vector<double> values) {
  if (values.size() != schema_.size()) {
    throw InputError("feature row for (" + query + ", " + product.str() +
                     ") does not match the schema length");
  }
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw InputError("non-finite feature for (" + query + ", " + product.str() + ")");
    }
  }
  rows_[{query, product}] = std::move(values);
}

bool FeatureTable::contains(const std::string& query, const ProductId& product) const {
  return rows_.contains({query, product});
}

const std::vector<double>& FeatureTable::values(const std::string& query,
                                                const ProductId& product) const {
  auto it = rows_.find({query, product});
  if (it == rows_.end()) {
    throw LookupError("no features for (" + query + ", " + product.str() + ")");
  }
  return it->second;
}

FeatureVector FeatureTable::vector(const std::string& query, const ProductId& product) const {
  return FeatureVector{schema_, values(query, product)};
}

std::size_t FeatureTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < schema_.size(); ++i) {
    if (schema_[i] == name) return i;
  }
  throw LookupError("feature '" + std::string(name) + "' is not in the schema");
}

}  // namespace bfs

namespace bfs {

CatalogIndex::CatalogIndex(std::span<const Product> catalog) {
  by_id_.reserve(catalog.size());
  for (const Product& p : catalog) {
    if (!by_id_.emplace(p.id, &p).second) throw InputError("duplicate product id " + p.id.str());
  }
}

const Product& CatalogIndex::at(const ProductId& id) const {
  auto it = by_id_.find(id);
  if (it == by_id_.end()) throw LookupError("unknown product " + id.str());
  return *it->second;
}

}  // namespace bfs
