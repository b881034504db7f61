#pragma once

// Brute-force reference implementations. They share no code with the
// library so that agreement means something.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

struct Event {
  std::string product;
  bool purchase = false;
  std::int64_t timestamp = 0;
  unsigned quantity = 0;
};

// One event at a time, straight from the definition.
inline double decayed_sum(const std::vector<Event>& events, const std::string& product,
                          std::int64_t as_of, const std::vector<double>& half_lives,
                          const std::vector<double>& weights, double window_days,
                          bool count_quantity = true) {
  double total = 0.0;
  for (const Event& e : events) {
    if (e.product != product || !e.purchase) continue;
    const double age = static_cast<double>(as_of - e.timestamp) / 86400.0;
    if (age < 0.0 || age > window_days) continue;
    double f = 0.0;
    for (std::size_t j = 0; j < half_lives.size(); ++j) {
      f += weights[j] * std::exp2(-age / half_lives[j]);
    }
    total += (count_quantity ? static_cast<double>(e.quantity) : 1.0) * f;
  }
  return total;
}

// Exact for dyadic inputs whose sums stay below 2^53 (the property tests
// draw values that way), so results can be compared bit for bit.
inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double max(const std::vector<double>& v) {
  double m = v[0];
  for (double x : v) m = x > m ? x : m;
  return m;
}

// Linear interpolation at position q*(n-1) over the ascending values,
// found by counting rather than sorting.
inline double percentile(const std::vector<double>& v, double q) {
  const std::size_t n = v.size();
  auto kth = [&](std::size_t k) {
    for (double x : v) {
      std::size_t less = 0;
      std::size_t equal = 0;
      for (double y : v) {
        less += y < x;
        equal += y == x;
      }
      if (less <= k && k < less + equal) return x;
    }
    return v[0];
  };
  const double pos = q * static_cast<double>(n - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(lo);
  if (lo + 1 >= n) return kth(n - 1);
  if (frac == 0.0) return kth(lo);
  return kth(lo) + frac * (kth(lo + 1) - kth(lo));
}

inline double attention(const std::vector<double>& values, const std::vector<double>& seed,
                        const std::vector<std::vector<double>>& subs) {
  std::vector<double> w(values.size());
  double total = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    double d = 0.0;
    for (std::size_t t = 0; t < seed.size(); ++t) d += seed[t] * subs[i][t];
    w[i] = d > 0.0 ? d : 0.0;
    total += w[i];
  }
  if (total == 0.0) return mean(values);
  double acc = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) acc += w[i] / total * values[i];
  return acc;
}

struct Neighbor {
  std::string id;
  double cosine = 0.0;
};

// Full sort of every other row by (cosine desc, id asc); keep the first k.
inline std::vector<Neighbor> knn(const std::vector<std::string>& ids,
                                 const std::vector<std::vector<double>>& rows, std::size_t seed,
                                 std::size_t k) {
  std::vector<Neighbor> all;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i == seed) continue;
    double d = 0.0;
    for (std::size_t t = 0; t < rows[i].size(); ++t) d += rows[seed][t] * rows[i][t];
    all.push_back({ids[i], std::clamp(d, -1.0, 1.0)});
  }
  std::sort(all.begin(), all.end(), [](const Neighbor& a, const Neighbor& b) {
    if (a.cosine != b.cosine) return a.cosine > b.cosine;
    return a.id < b.id;
  });
  if (all.size() > k) all.resize(k);
  return all;
}

inline double dcg(const std::vector<int>& labels, std::size_t k) {
  double s = 0.0;
  for (std::size_t i = 0; i < labels.size() && i < k; ++i) {
    s += (std::pow(2.0, labels[i]) - 1.0) / std::log2(static_cast<double>(i) + 2.0);
  }
  return s;
}

inline double ndcg(const std::vector<int>& labels, std::size_t k) {
  std::vector<int> ideal = labels;
  std::sort(ideal.rbegin(), ideal.rend());
  const double best = dcg(ideal, k);
  return best == 0.0 ? 1.0 : dcg(labels, k) / best;
}

// |NDCG change| when items i and j swap places in the ranking given by
// scores (ties by index).
inline std::vector<std::vector<double>> swap_deltas(const std::vector<double>& scores,
                                                    const std::vector<int>& labels,
                                                    std::size_t k) {
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<int> ranked(n);
  for (std::size_t p = 0; p < n; ++p) ranked[p] = labels[order[p]];
  const double base = ndcg(ranked, k);
  std::vector<std::size_t> pos(n);
  for (std::size_t p = 0; p < n; ++p) pos[order[p]] = p;
  std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      std::vector<int> swapped = ranked;
      std::swap(swapped[pos[i]], swapped[pos[j]]);
      d[i][j] = std::abs(ndcg(swapped, k) - base);
    }
  }
  return d;
}

// Smooth pairwise cost with the swap weights held fixed:
// sum over label_i > label_j of delta_ij * log(1 + exp(-(s_i - s_j))).
inline double pairwise_cost(const std::vector<double>& scores, const std::vector<int>& labels,
                            const std::vector<std::vector<double>>& deltas) {
  double c = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[i] > labels[j]) c += deltas[i][j] * std::log1p(std::exp(-(scores[i] - scores[j])));
    }
  }
  return c;
}

// Ascent direction (-dC/ds) by central differences.
inline std::vector<double> pairwise_gradient_fd(std::vector<double> scores,
                                                const std::vector<int>& labels,
                                                const std::vector<std::vector<double>>& deltas,
                                                double h = 1e-6) {
  std::vector<double> g(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double s = scores[i];
    scores[i] = s + h;
    const double up = pairwise_cost(scores, labels, deltas);
    scores[i] = s - h;
    const double down = pairwise_cost(scores, labels, deltas);
    scores[i] = s;
    g[i] = -(up - down) / (2.0 * h);
  }
  return g;
}

inline double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  auto ranks = [](const std::vector<double>& v) {
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      double less = 0.0;
      double equal = 0.0;
      for (double w : v) {
        less += w < v[i];
        equal += w == v[i];
      }
      r[i] = less + (equal + 1.0) / 2.0;
    }
    return r;
  };
  const std::vector<double> rx = ranks(x);
  const std::vector<double> ry = ranks(y);
  const double mx = mean(rx);
  const double my = mean(ry);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxx == 0.0 || syy == 0.0 ? 0.0 : sxy / std::sqrt(sxx * syy);
}

}  // namespace oracle
