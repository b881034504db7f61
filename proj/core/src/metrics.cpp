#include "bfs/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bfs/error.hpp"

namespace bfs {

double gain(int label) { return std::exp2(static_cast<double>(label)) - 1.0; }

double discount(std::size_t position) {
  return 1.0 / std::log2(static_cast<double>(position) + 1.0);
}

double dcg_at_k(std::span<const int> labels, std::size_t k) {
  double dcg = 0.0;
  const std::size_t n = std::min(k, labels.size());
  for (std::size_t i = 0; i < n; ++i) dcg += gain(labels[i]) * discount(i + 1);
  return dcg;
}

double ndcg_at_k(std::span<const int> labels, std::size_t k) {
  if (k == 0) throw InputError("ndcg cutoff must be at least 1");
  std::vector<int> ideal(labels.begin(), labels.end());
  std::sort(ideal.begin(), ideal.end(), std::greater<>());
  const double idcg = dcg_at_k(ideal, k);
  if (idcg == 0.0) return 1.0;
  return dcg_at_k(labels, k) / idcg;
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && values[order[j]] == values[order[i]]) ++j;
    const double avg = (static_cast<double>(i + j - 1)) / 2.0 + 1.0;
    for (std::size_t t = i; t < j; ++t) ranks[order[t]] = avg;
    i = j;
  }
  return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw InputError("spearman needs two aligned series of length >= 2");
  }
  const std::vector<double> rx = average_ranks(x);
  const std::vector<double> ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

double median(std::vector<double> values) {
  if (values.empty()) throw InputError("median of an empty list");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace bfs
