#include "bfs/substitutes.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bfs/error.hpp"

namespace bfs {

namespace {

bool by_score_then_id(double sa, const ProductId& a, double sb, const ProductId& b) {
  if (sa != sb) return sa > sb;
  return a < b;
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

void pair_features(std::span<const double> seed, std::span<const double> cand, double* out) {
  const std::size_t d = seed.size();
  for (std::size_t i = 0; i < d; ++i) {
    out[i] = seed[i];
    out[d + i] = cand[i];
    out[2 * d + i] = std::abs(seed[i] - cand[i]);
  }
}

}  // namespace

std::vector<CandidatePair> knn_candidates(const ProductId& seed, const EmbeddingTable& embeddings,
                                          std::size_t k) {
  if (k == 0) throw InputError("k must be at least 1");
  const std::size_t seed_row = embeddings.index_of(seed);
  const auto query = embeddings.row(seed_row);

  struct Hit {
    double cosine;
    std::size_t row;
  };
  std::vector<Hit> hits;
  hits.reserve(embeddings.size());
  for (std::size_t r = 0; r < embeddings.size(); ++r) {
    if (r == seed_row) continue;
    hits.push_back({std::clamp(dot(query, embeddings.row(r)), -1.0, 1.0), r});
  }
  const std::size_t take = std::min(k, hits.size());
  std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(take), hits.end(),
                    [&](const Hit& a, const Hit& b) {
                      return by_score_then_id(a.cosine, embeddings.id(a.row), b.cosine,
                                              embeddings.id(b.row));
                    });
  std::vector<CandidatePair> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) {
    out.push_back({seed, embeddings.id(hits[i].row), hits[i].cosine, std::nullopt});
  }
  return out;
}

double PairClassifier::score(std::span<const double> seed, std::span<const double> candidate) const {
  const std::size_t d = embedding_dim();
  if (seed.size() != d || candidate.size() != d) {
    throw InputError("classifier dimension does not match the embeddings");
  }
  double z = bias;
  for (std::size_t i = 0; i < d; ++i) {
    z += weights[i] * seed[i] + weights[d + i] * candidate[i] +
         weights[2 * d + i] * std::abs(seed[i] - candidate[i]);
  }
  return sigmoid(z);
}

void to_json(Json& j, const PairClassifier& c) {
  j = Json{{"weights", c.weights}, {"bias", c.bias}, {"threshold", c.threshold}};
}

void from_json(const Json& j, PairClassifier& c) {
  j.at("weights").get_to(c.weights);
  j.at("bias").get_to(c.bias);
  j.at("threshold").get_to(c.threshold);
  if (c.weights.empty() || c.weights.size() % 3 != 0) {
    throw InputError("classifier weight length must be a positive multiple of 3");
  }
  if (!(c.threshold > 0.0 && c.threshold < 1.0)) {
    throw InputError("classifier threshold must lie in (0, 1)");
  }
}

TrainedClassifier train_pair_classifier(std::span<const LabeledPair> pairs,
                                        const EmbeddingTable& embeddings, int epochs,
                                        double learning_rate, double target_precision) {
  if (epochs < 0) throw ConfigError("epochs must be nonnegative");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (!(target_precision > 0.0 && target_precision < 1.0)) {
    throw ConfigError("target_precision must lie in (0, 1)");
  }
  std::size_t positives = 0;
  for (const LabeledPair& lp : pairs) {
    if (lp.label != 0 && lp.label != 1) throw TrainingError("pair labels must be 0 or 1");
    positives += static_cast<std::size_t>(lp.label);
  }
  if (positives == 0 || positives == pairs.size()) {
    throw TrainingError("pair classifier needs both substitute and non-substitute pairs");
  }

  const std::size_t dim = embeddings.dim();
  const std::size_t width = 3 * dim;
  std::vector<std::size_t> train_idx;
  std::vector<std::size_t> hold_idx;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    (i % 5 == 4 ? hold_idx : train_idx).push_back(i);
  }

  auto features_of = [&](std::size_t i, double* out) {
    pair_features(embeddings.vector(pairs[i].pair.seed),
                  embeddings.vector(pairs[i].pair.candidate), out);
  };

  // Standardized training design matrix.
  const std::size_t n = train_idx.size();
  std::vector<double> x(n * width);
  std::vector<double> y(n);
  for (std::size_t r = 0; r < n; ++r) {
    features_of(train_idx[r], x.data() + r * width);
    y[r] = pairs[train_idx[r]].label;
  }
  std::vector<double> mean(width, 0.0);
  std::vector<double> scale(width, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < width; ++c) mean[c] += x[r * width + c];
  }
  for (double& m : mean) m /= static_cast<double>(n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      const double d = x[r * width + c] - mean[c];
      scale[c] += d * d;
    }
  }
  for (double& s : scale) {
    s = std::sqrt(s / static_cast<double>(n));
    if (!(s > 1e-12)) s = 1.0;
  }
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      x[r * width + c] = (x[r * width + c] - mean[c]) / scale[c];
    }
  }

  std::vector<double> w(width, 0.0);
  double b = 0.0;
  std::vector<double> margin(n);
  auto loss_at = [&](const std::vector<double>& wv, double bv) {
    double total = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double z = bv + dot({wv.data(), width}, {x.data() + r * width, width});
      margin[r] = z;
      total += softplus(z) - y[r] * z;
    }
    return total / static_cast<double>(n);
  };

  TrainedClassifier result;
  ClassifierReport& report = result.report;
  report.train_size = n;
  report.holdout_size = hold_idx.size();

  double loss = loss_at(w, b);
  std::vector<double> grad(width);
  std::vector<double> trial(width);
  double step = learning_rate;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    report.loss_history.push_back(loss);
    std::fill(grad.begin(), grad.end(), 0.0);
    double grad_b = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      const double resid = sigmoid(margin[r]) - y[r];
      grad_b += resid;
      const double* row = x.data() + r * width;
      for (std::size_t c = 0; c < width; ++c) grad[c] += resid * row[c];
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    double grad_sq = grad_b * grad_b * inv_n * inv_n;
    for (double& g : grad) {
      g *= inv_n;
      grad_sq += g * g;
    }
    grad_b *= inv_n;
    if (grad_sq < 1e-20) break;

    // Armijo backtracking; the margins cached by loss_at follow the accepted point.
    bool accepted = false;
    for (int halving = 0; halving < 40; ++halving) {
      for (std::size_t c = 0; c < width; ++c) trial[c] = w[c] - step * grad[c];
      const double trial_b = b - step * grad_b;
      const double trial_loss = loss_at(trial, trial_b);
      if (trial_loss <= loss - 1e-4 * step * grad_sq) {
        w.swap(trial);
        b = trial_b;
        loss = trial_loss;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      loss_at(w, b);
      break;
    }
    step = std::min(learning_rate, step * 2.0);
  }
  report.loss_history.push_back(loss);

  // Fold the standardization back into raw-layout weights.
  PairClassifier& clf = result.classifier;
  clf.weights.assign(width, 0.0);
  clf.bias = b;
  for (std::size_t c = 0; c < width; ++c) {
    clf.weights[c] = w[c] / scale[c];
    clf.bias -= w[c] * mean[c] / scale[c];
  }

  // Threshold calibration on the held-out split.
  std::vector<std::pair<double, int>> scored;
  scored.reserve(hold_idx.size());
  for (std::size_t i : hold_idx) {
    scored.emplace_back(clf.score(embeddings.vector(pairs[i].pair.seed),
                                  embeddings.vector(pairs[i].pair.candidate)),
                        pairs[i].label);
  }
  std::sort(scored.begin(), scored.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  std::size_t hold_pos = 0;
  for (const auto& s : scored) hold_pos += static_cast<std::size_t>(s.second);

  std::optional<double> threshold;
  std::size_t tp = 0;
  std::size_t taken = 0;
  for (std::size_t i = 0; i < scored.size();) {
    // Consume every score equal to this one: "score >= t" admits the whole group.
    std::size_t j = i;
    while (j < scored.size() && scored[j].first == scored[i].first) {
      tp += static_cast<std::size_t>(scored[j].second);
      ++taken;
      ++j;
    }
    const double precision = static_cast<double>(tp) / static_cast<double>(taken);
    if (precision >= target_precision && scored[i].first > 0.0 && scored[i].first < 1.0) {
      threshold = scored[i].first;
    }
    i = j;
  }
  if (threshold) {
    clf.threshold = *threshold;
  } else {
    clf.threshold = 0.5;
    report.threshold_fallback = true;
  }

  std::size_t correct = 0;
  std::size_t predicted = 0;
  std::size_t hits = 0;
  for (const auto& [s, label] : scored) {
    const bool positive = clf.accepts(s);
    correct += static_cast<std::size_t>(positive == (label == 1));
    predicted += static_cast<std::size_t>(positive);
    hits += static_cast<std::size_t>(positive && label == 1);
  }
  if (!scored.empty()) {
    report.holdout_accuracy = static_cast<double>(correct) / static_cast<double>(scored.size());
  }
  report.holdout_precision =
      predicted == 0 ? 1.0 : static_cast<double>(hits) / static_cast<double>(predicted);
  report.holdout_recall =
      hold_pos == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(hold_pos);
  return result;
}

std::vector<CandidatePair> attribute_post_filter(std::span<const CandidatePair> pairs,
                                                 const CatalogIndex& catalog,
                                                 std::span<const std::string> required_attrs) {
  std::vector<CandidatePair> out;
  for (const CandidatePair& pair : pairs) {
    const Product& seed = catalog.at(pair.seed);
    const Product& cand = catalog.at(pair.candidate);
    if (seed.category != cand.category) continue;
    bool keep = true;
    for (const std::string& attr : required_attrs) {
      auto a = seed.attributes.find(attr);
      auto b = cand.attributes.find(attr);
      if (a == seed.attributes.end() || b == cand.attributes.end() || a->second != b->second) {
        keep = false;
        break;
      }
    }
    if (keep) out.push_back(pair);
  }
  return out;
}

namespace {

SubstituteSet to_set(const ProductId& seed, const std::vector<CandidatePair>& pairs,
                     bool use_classifier_score, std::size_t cap) {
  SubstituteSet set{seed, {}};
  for (const CandidatePair& p : pairs) {
    set.substitutes.push_back({p.candidate, use_classifier_score ? *p.classifier_score : p.cosine});
  }
  std::sort(set.substitutes.begin(), set.substitutes.end(),
            [](const Substitute& a, const Substitute& b) {
              return by_score_then_id(a.score, a.id, b.score, b.id);
            });
  if (set.substitutes.size() > cap) set.substitutes.resize(cap);
  return set;
}

}  // namespace

StagedLookup build_lookup_table_staged(std::span<const Product> catalog,
                                       const EmbeddingTable& embeddings,
                                       const PairClassifier& classifier,
                                       const SubstituteParams& params) {
  if (params.max_substitutes == 0) throw ConfigError("max_substitutes must be at least 1");
  if (classifier.embedding_dim() != embeddings.dim()) {
    throw ConsistencyError("classifier dimension does not match the embeddings");
  }
  const CatalogIndex index(catalog);
  StagedLookup staged;
  for (const Product& p : catalog) {
    std::vector<CandidatePair> knn = knn_candidates(p.id, embeddings, params.k);
    staged.counts.knn += knn.size();
    staged.knn.emplace(p.id, to_set(p.id, knn, false, knn.size()));

    const auto seed_vec = embeddings.vector(p.id);
    std::vector<CandidatePair> kept;
    for (CandidatePair& pair : knn) {
      pair.classifier_score = classifier.score(seed_vec, embeddings.vector(pair.candidate));
      if (classifier.accepts(*pair.classifier_score)) kept.push_back(pair);
    }
    staged.counts.classified += kept.size();
    staged.classified.emplace(p.id, to_set(p.id, kept, true, kept.size()));

    std::vector<CandidatePair> filtered = attribute_post_filter(kept, index, params.required_attrs);
    staged.counts.post_filtered += filtered.size();
    SubstituteSet final_set = to_set(p.id, filtered, true, params.max_substitutes);
    staged.counts.final += final_set.substitutes.size();
    staged.final.emplace(p.id, std::move(final_set));
  }
  return staged;
}

LookupTable build_lookup_table(std::span<const Product> catalog, const EmbeddingTable& embeddings,
                               const PairClassifier& classifier, const SubstituteParams& params) {
  return build_lookup_table_staged(catalog, embeddings, classifier, params).final;
}

void to_json(Json& j, const SubstituteParams& p) {
  j = Json{{"k", p.k},
           {"max_substitutes", p.max_substitutes},
           {"target_precision", p.target_precision},
           {"required_attrs", p.required_attrs}};
}

void from_json(const Json& j, SubstituteParams& p) {
  p = SubstituteParams{};
  if (j.contains("k")) j.at("k").get_to(p.k);
  if (j.contains("max_substitutes")) j.at("max_substitutes").get_to(p.max_substitutes);
  if (j.contains("target_precision")) j.at("target_precision").get_to(p.target_precision);
  if (j.contains("required_attrs")) j.at("required_attrs").get_to(p.required_attrs);
}

void write_lookup_table(const std::filesystem::path& path, const LookupTable& table) {
  std::vector<Json> rows;
  rows.reserve(table.size());
  for (const auto& [seed, set] : table) {
    Json subs = Json::array();
    for (const Substitute& s : set.substitutes) subs.push_back(Json::array({s.id, s.score}));
    rows.push_back(Json{{"seed", seed}, {"substitutes", std::move(subs)}});
  }
  write_jsonl(path, rows);
}

LookupTable read_lookup_table(const std::filesystem::path& path) {
  LookupTable table;
  for (const Json& row : read_jsonl(path)) {
    SubstituteSet set;
    row.at("seed").get_to(set.seed);
    for (const Json& s : row.at("substitutes")) {
      set.substitutes.push_back({s.at(0).get<ProductId>(), s.at(1).get<double>()});
    }
    ProductId seed = set.seed;
    if (!table.emplace(std::move(seed), std::move(set)).second) {
      throw InputError(path.string() + ": duplicate seed");
    }
  }
  return table;
}

double mean_substitute_count(const LookupTable& table, std::span<const Product> catalog,
                             bool cold_start_only) {
  std::size_t products = 0;
  std::size_t members = 0;
  for (const Product& p : catalog) {
    if (cold_start_only && !p.is_cold_start) continue;
    ++products;
    auto it = table.find(p.id);
    if (it != table.end()) members += it->second.substitutes.size();
  }
  return products == 0 ? 0.0 : static_cast<double>(members) / static_cast<double>(products);
}

}  // namespace bfs
