#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace bfs {

inline constexpr std::size_t kDefaultNdcgK = 10;

// Gain 2^label - 1, discount 1 / log2(position + 1) with 1-based positions.
double gain(int label);
double discount(std::size_t position);

double dcg_at_k(std::span<const int> labels_in_rank_order, std::size_t k);

// DCG@k / ideal DCG@k; 1.0 when the ideal DCG is 0.
double ndcg_at_k(std::span<const int> labels_in_rank_order, std::size_t k);

// Pearson correlation of average ranks (ties share their mean rank).
double spearman(std::span<const double> x, std::span<const double> y);

std::vector<double> average_ranks(std::span<const double> values);

double median(std::vector<double> values);

}  // namespace bfs
