#include "bfs/embedding.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "bfs/error.hpp"
#include "bfs/hash.hpp"

namespace bfs {

namespace {

constexpr std::uint64_t kBucketSeed = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kSignSeed = 0x84222325cbf29ce4ULL;

std::string lowercase(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

ProductEmbedding embed_product(const Product& product, std::size_t dim) {
  if (dim < 8) throw InputError("embedding dimension must be at least 8");
  if (product.title.empty() && product.category.empty()) {
    throw InputError("product " + product.id.str() + " has neither title nor category");
  }
  std::vector<double> v(dim, 0.0);
  if (!product.title.empty()) {
    const std::string padded = " " + lowercase(product.title) + " ";
    for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
      const std::string_view gram(padded.data() + i, 3);
      const std::size_t bucket = fnv1a64(gram, kBucketSeed) % dim;
      const double sign = (fnv1a64(gram, kSignSeed) & 1U) ? 1.0 : -1.0;
      v[bucket] += sign;
    }
  }
  if (!product.category.empty()) {
    v[fnv1a64("category:" + product.category, kBucketSeed) % dim] += kCategoryWeight;
  }
  double norm = 0.0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  if (norm == 0.0) throw InputError("product " + product.id.str() + " embeds to the zero vector");
  for (double& x : v) x /= norm;
  return {product.id, std::move(v)};
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

EmbeddingTable EmbeddingTable::build(std::span<const Product> catalog, std::size_t dim) {
  EmbeddingTable table(dim);
  for (const Product& p : catalog) table.add(embed_product(p, dim));
  return table;
}

void EmbeddingTable::add(const ProductEmbedding& embedding) {
  if (embedding.vector.size() != dim_) {
    throw InputError("embedding for " + embedding.product.str() + " has the wrong dimension");
  }
  if (!index_.emplace(embedding.product, ids_.size()).second) {
    throw InputError("duplicate embedding for " + embedding.product.str());
  }
  ids_.push_back(embedding.product);
  data_.insert(data_.end(), embedding.vector.begin(), embedding.vector.end());
}

std::size_t EmbeddingTable::index_of(const ProductId& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw LookupError("no embedding for " + id.str());
  return it->second;
}

double EmbeddingTable::cosine(const ProductId& a, const ProductId& b) const {
  return std::clamp(dot(vector(a), vector(b)), -1.0, 1.0);
}

}  // namespace bfs
