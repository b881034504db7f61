#pragma once

#include <cstddef>
#include <span>
#include <unordered_map>
#include <vector>

#include "bfs/types.hpp"

namespace bfs {

inline constexpr std::size_t kDefaultEmbeddingDim = 256;
inline constexpr double kCategoryWeight = 2.0;

struct ProductEmbedding {
  ProductId product;
  std::vector<double> vector;  // unit L2 norm
};

// Hashed character trigrams of the lowercased, space-padded title, each
// added with a +-1 sign into one of `dim` buckets, plus the category token
// added with weight 2 into its own hashed bucket; then L2-normalized.
// Throws InputError when title and category are both empty or dim < 8.
ProductEmbedding embed_product(const Product& product, std::size_t dim = kDefaultEmbeddingDim);

double dot(std::span<const double> a, std::span<const double> b);

// Row-major store of one embedding per catalog product, all the same
// dimension.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(std::size_t dim) : dim_(dim) {}

  static EmbeddingTable build(std::span<const Product> catalog,
                              std::size_t dim = kDefaultEmbeddingDim);

  // Throws InputError on a dimension mismatch or duplicate id.
  void add(const ProductEmbedding& embedding);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return ids_.size(); }
  const ProductId& id(std::size_t row) const { return ids_[row]; }
  std::span<const double> row(std::size_t row) const {
    return {data_.data() + row * dim_, dim_};
  }
  bool contains(const ProductId& id) const { return index_.contains(id); }
  // Throws LookupError.
  std::size_t index_of(const ProductId& id) const;
  std::span<const double> vector(const ProductId& id) const { return row(index_of(id)); }

  double cosine(const ProductId& a, const ProductId& b) const;

 private:
  std::size_t dim_ = 0;
  std::vector<ProductId> ids_;
  std::vector<double> data_;
  std::unordered_map<ProductId, std::size_t> index_;
};

}  // namespace bfs
