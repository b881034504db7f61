#include "bfs/ranker.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "bfs/error.hpp"

namespace bfs {

RegressionTree::RegressionTree(std::vector<TreeNode> nodes, int max_depth)
    : nodes_(std::move(nodes)), max_depth_(max_depth) {
  if (nodes_.empty()) throw InputError("regression tree without nodes");
}

RegressionTree RegressionTree::leaf(double value) {
  TreeNode node;
  node.value = value;
  return RegressionTree({node}, 0);
}

double RegressionTree::predict(std::span<const double> x) const {
  std::size_t i = 0;
  while (!nodes_[i].is_leaf()) {
    const TreeNode& n = nodes_[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left
                                                                                       : n.right);
  }
  return nodes_[i].value;
}

int RegressionTree::depth() const {
  std::function<int(std::size_t)> walk = [&](std::size_t i) -> int {
    const TreeNode& n = nodes_[i];
    if (n.is_leaf()) return 0;
    return 1 + std::max(walk(static_cast<std::size_t>(n.left)),
                        walk(static_cast<std::size_t>(n.right)));
  };
  return nodes_.empty() ? 0 : walk(0);
}

void RegressionTree::validate(std::size_t schema_size) const {
  if (nodes_.empty()) throw InputError("regression tree without nodes");
  std::vector<int> seen(nodes_.size(), 0);
  std::function<void(std::size_t, int)> walk = [&](std::size_t i, int depth) {
    if (i >= nodes_.size()) throw InputError("tree child index out of range");
    if (seen[i]++) throw InputError("tree node reached twice");
    if (depth > max_depth_) throw InputError("tree deeper than its max_depth");
    const TreeNode& n = nodes_[i];
    if (n.is_leaf()) {
      if (!std::isfinite(n.value)) throw InputError("non-finite leaf value");
      return;
    }
    if (static_cast<std::size_t>(n.feature) >= schema_size) {
      throw InputError("tree references a feature outside the schema");
    }
    if (!std::isfinite(n.threshold)) throw InputError("non-finite split threshold");
    if (n.left < 0 || n.right < 0) throw InputError("internal node without children");
    walk(static_cast<std::size_t>(n.left), depth + 1);
    walk(static_cast<std::size_t>(n.right), depth + 1);
  };
  walk(0, 0);
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
    throw InputError("unreachable tree node");
  }
}

void TrainConfig::validate() const {
  if (num_trees < 0) throw ConfigError("num_trees must be nonnegative");
  if (max_depth < 1) throw ConfigError("max_depth must be positive");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning_rate must be positive");
  }
  if (min_leaf_samples < 1) throw ConfigError("min_leaf_samples must be positive");
}

void to_json(Json& j, const TrainConfig& cfg) {
  j = Json{{"num_trees", cfg.num_trees},
           {"max_depth", cfg.max_depth},
           {"learning_rate", cfg.learning_rate},
           {"min_leaf_samples", cfg.min_leaf_samples},
           {"seed", cfg.seed}};
}

void from_json(const Json& j, TrainConfig& cfg) {
  cfg = TrainConfig{};
  if (j.contains("num_trees")) j.at("num_trees").get_to(cfg.num_trees);
  if (j.contains("max_depth")) j.at("max_depth").get_to(cfg.max_depth);
  if (j.contains("learning_rate")) j.at("learning_rate").get_to(cfg.learning_rate);
  if (j.contains("min_leaf_samples")) j.at("min_leaf_samples").get_to(cfg.min_leaf_samples);
  if (j.contains("seed")) j.at("seed").get_to(cfg.seed);
}

double RankerModel::score(std::span<const double> x) const {
  double s = 0.0;
  for (const RegressionTree& t : trees) s += learning_rate * t.predict(x);
  return s;
}

Json model_to_json(const RankerModel& model) {
  Json trees = Json::array();
  for (const RegressionTree& t : model.trees) {
    Json nodes = Json::array();
    for (const TreeNode& n : t.nodes()) {
      nodes.push_back(Json::array({n.feature, n.threshold, n.left, n.right, n.value}));
    }
    trees.push_back(Json{{"max_depth", t.max_depth()}, {"nodes", std::move(nodes)}});
  }
  return Json{{"format", "bfs-ranker"},
              {"version", 1},
              {"node_layout", {"feature", "threshold", "left", "right", "value"}},
              {"feature_schema", model.feature_schema},
              {"learning_rate", model.learning_rate},
              {"k_for_ndcg", model.k_for_ndcg},
              {"config", model.config},
              {"trees", std::move(trees)}};
}

RankerModel model_from_json(const Json& j) {
  if (j.value("format", std::string()) != "bfs-ranker" || j.value("version", 0) != 1) {
    throw InputError("not a bfs-ranker v1 model");
  }
  RankerModel model;
  j.at("feature_schema").get_to(model.feature_schema);
  j.at("learning_rate").get_to(model.learning_rate);
  j.at("k_for_ndcg").get_to(model.k_for_ndcg);
  j.at("config").get_to(model.config);
  for (const Json& t : j.at("trees")) {
    std::vector<TreeNode> nodes;
    for (const Json& n : t.at("nodes")) {
      nodes.push_back({n.at(0).get<int>(), n.at(1).get<double>(), n.at(2).get<int>(),
                       n.at(3).get<int>(), n.at(4).get<double>()});
    }
    RegressionTree tree(std::move(nodes), t.at("max_depth").get<int>());
    tree.validate(model.feature_schema.size());
    model.trees.push_back(std::move(tree));
  }
  return model;
}

void write_model(const std::filesystem::path& path, const RankerModel& model) {
  write_json(path, model_to_json(model));
}

RankerModel read_model(const std::filesystem::path& path) {
  return model_from_json(read_json(path));
}

LambdaTerms lambda_terms(std::span<const double> scores, std::span<const int> labels,
                         std::size_t k) {
  if (scores.size() != labels.size()) throw InputError("scores and labels are misaligned");
  const std::size_t n = scores.size();
  LambdaTerms out{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
  if (n < 2) return out;

  std::vector<int> ideal(labels.begin(), labels.end());
  std::sort(ideal.begin(), ideal.end(), std::greater<>());
  const double idcg = dcg_at_k(ideal, k);
  if (idcg == 0.0) return out;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<double> disc(n, 0.0);
  for (std::size_t pos = 0; pos < n; ++pos) {
    if (pos < k) disc[order[pos]] = discount(pos + 1);
  }

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (labels[i] <= labels[j]) continue;
      const double delta =
          std::abs((gain(labels[i]) - gain(labels[j])) * (disc[i] - disc[j])) / idcg;
      if (delta == 0.0) continue;
      const double rho = 1.0 / (1.0 + std::exp(scores[i] - scores[j]));
      out.lambdas[i] += rho * delta;
      out.lambdas[j] -= rho * delta;
      const double w = rho * (1.0 - rho) * delta;
      out.weights[i] += w;
      out.weights[j] += w;
    }
  }
  return out;
}

std::vector<double> lambda_gradients(std::span<const double> scores, std::span<const int> labels,
                                     std::size_t k) {
  return lambda_terms(scores, labels, k).lambdas;
}

namespace {

struct QueryRows {
  std::size_t begin = 0;
  std::size_t end = 0;
};

struct Dataset {
  std::size_t width = 0;
  std::vector<double> x;  // row-major
  std::vector<int> labels;
  std::vector<QueryRows> queries;

  std::size_t rows() const { return labels.size(); }
  double at(std::size_t row, std::size_t f) const { return x[row * width + f]; }
};

class TreeBuilder {
 public:
  TreeBuilder(const Dataset& data, std::span<const double> grad, std::span<const double> hess,
              const TrainConfig& cfg)
      : data_(data), grad_(grad), hess_(hess), cfg_(cfg) {}

  RegressionTree build() {
    std::vector<std::size_t> rows(data_.rows());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    grow(std::move(rows), 0);
    return RegressionTree(std::move(nodes_), cfg_.max_depth);
  }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
  };

  double leaf_value(const std::vector<std::size_t>& rows) const {
    double g = 0.0;
    double h = 0.0;
    for (std::size_t r : rows) {
      g += grad_[r];
      h += hess_[r];
    }
    return h > 1e-12 ? g / h : 0.0;
  }

  Split best_split(const std::vector<std::size_t>& rows) const {
    const std::size_t n = rows.size();
    const auto min_leaf = static_cast<std::size_t>(cfg_.min_leaf_samples);
    Split best;
    if (n < 2 * min_leaf) return best;
    double total = 0.0;
    for (std::size_t r : rows) total += grad_[r];
    const double parent = total * total / static_cast<double>(n);

    std::vector<std::size_t> sorted = rows;
    for (std::size_t f = 0; f < data_.width; ++f) {
      std::stable_sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) {
        return data_.at(a, f) < data_.at(b, f);
      });
      double left = 0.0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        left += grad_[sorted[i]];
        const double lo = data_.at(sorted[i], f);
        const double hi = data_.at(sorted[i + 1], f);
        if (lo == hi) continue;
        const std::size_t nl = i + 1;
        const std::size_t nr = n - nl;
        if (nl < min_leaf || nr < min_leaf) continue;
        const double right = total - left;
        const double gain = left * left / static_cast<double>(nl) +
                            right * right / static_cast<double>(nr) - parent;
        if (gain > best.gain + 1e-12) {
          double mid = lo + (hi - lo) / 2.0;
          if (!(mid < hi)) mid = lo;  // adjacent doubles
          best = {static_cast<int>(f), mid, gain};
        }
      }
    }
    return best;
  }

  int grow(std::vector<std::size_t> rows, int depth) {
    const int index = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    Split split;
    if (depth < cfg_.max_depth) split = best_split(rows);
    if (split.feature < 0) {
      nodes_[static_cast<std::size_t>(index)].value = leaf_value(rows);
      return index;
    }
    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (std::size_t r : rows) {
      (data_.at(r, static_cast<std::size_t>(split.feature)) <= split.threshold ? left : right)
          .push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();
    const int l = grow(std::move(left), depth + 1);
    const int r = grow(std::move(right), depth + 1);
    TreeNode& node = nodes_[static_cast<std::size_t>(index)];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = l;
    node.right = r;
    return index;
  }

  const Dataset& data_;
  std::span<const double> grad_;
  std::span<const double> hess_;
  const TrainConfig& cfg_;
  std::vector<TreeNode> nodes_;
};

std::vector<std::size_t> id_order(std::span<const ProductId> candidates) {
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return candidates[a] < candidates[b]; });
  return order;
}

}  // namespace

RankerModel train(std::span<const QueryJudgment> judgments, const FeatureTable& features,
                  const TrainConfig& cfg, TrainReport* report) {
  cfg.validate();
  TrainReport local;
  TrainReport& rep = report ? *report : local;
  rep = TrainReport{};

  Dataset data;
  data.width = features.schema().size();
  std::vector<std::string> gaps;
  std::size_t gap_count = 0;
  for (const QueryJudgment& q : judgments) {
    if (q.candidates.size() < 2) {
      ++rep.skipped_queries;
      continue;
    }
    if (q.labels.size() != q.candidates.size()) {
      throw TrainingError("judgment '" + q.query + "' has misaligned labels");
    }
    if (std::all_of(q.labels.begin(), q.labels.end(), [](int l) { return l == 0; })) {
      ++rep.all_zero_queries;
      continue;
    }
    QueryRows qr{data.rows(), data.rows()};
    for (std::size_t i : id_order(q.candidates)) {
      if (!features.contains(q.query, q.candidates[i])) {
        if (gaps.size() < 10) gaps.push_back("(" + q.query + ", " + q.candidates[i].str() + ")");
        ++gap_count;
        continue;
      }
      const auto& v = features.values(q.query, q.candidates[i]);
      data.x.insert(data.x.end(), v.begin(), v.end());
      data.labels.push_back(q.labels[i]);
    }
    qr.end = data.rows();
    data.queries.push_back(qr);
  }
  if (gap_count > 0) {
    std::string msg = std::to_string(gap_count) + " judged pairs lack feature vectors:";
    for (const std::string& g : gaps) msg += " " + g;
    throw TrainingError(msg);
  }
  rep.trainable_queries = data.queries.size();
  if (data.queries.empty()) throw TrainingError("no trainable query in the judgments");

  RankerModel model;
  model.learning_rate = cfg.learning_rate;
  model.feature_schema = features.schema();
  model.config = cfg;
  const std::size_t k = model.k_for_ndcg;

  std::vector<double> scores(data.rows(), 0.0);
  std::vector<double> grad(data.rows(), 0.0);
  std::vector<double> hess(data.rows(), 0.0);
  for (int t = 0; t < cfg.num_trees; ++t) {
    for (const QueryRows& q : data.queries) {
      const std::size_t len = q.end - q.begin;
      LambdaTerms terms = lambda_terms({scores.data() + q.begin, len},
                                       {data.labels.data() + q.begin, len}, k);
      std::copy(terms.lambdas.begin(), terms.lambdas.end(), grad.begin() + q.begin);
      std::copy(terms.weights.begin(), terms.weights.end(), hess.begin() + q.begin);
    }
    RegressionTree tree = TreeBuilder(data, grad, hess, cfg).build();
    for (std::size_t r = 0; r < data.rows(); ++r) {
      scores[r] += cfg.learning_rate * tree.predict({data.x.data() + r * data.width, data.width});
    }
    model.trees.push_back(std::move(tree));

    double ndcg_sum = 0.0;
    for (const QueryRows& q : data.queries) {
      std::vector<std::size_t> order(q.end - q.begin);
      std::iota(order.begin(), order.end(), q.begin);
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
      std::vector<int> ranked;
      for (std::size_t r : order) ranked.push_back(data.labels[r]);
      ndcg_sum += ndcg_at_k(ranked, k);
    }
    rep.train_ndcg.push_back(ndcg_sum / static_cast<double>(data.queries.size()));
  }
  return model;
}

namespace {

std::vector<std::size_t> projection(const std::vector<std::string>& model_schema,
                                    const std::vector<std::string>& input_schema) {
  std::vector<std::size_t> cols;
  cols.reserve(model_schema.size());
  for (const std::string& name : model_schema) {
    auto it = std::find(input_schema.begin(), input_schema.end(), name);
    if (it == input_schema.end()) {
      throw InputError("feature '" + name + "' required by the model is missing");
    }
    cols.push_back(static_cast<std::size_t>(it - input_schema.begin()));
  }
  return cols;
}

std::vector<double> project(const std::vector<std::size_t>& cols, std::span<const double> values) {
  std::vector<double> x;
  x.reserve(cols.size());
  for (std::size_t c : cols) x.push_back(values[c]);
  return x;
}

}  // namespace

ScoredList score(const RankerModel& model, std::span<const ProductId> candidates,
                 std::span<const FeatureVector> features) {
  if (candidates.size() != features.size()) {
    throw InputError("one feature vector per candidate is required");
  }
  ScoredList out;
  out.scores.reserve(candidates.size());
  std::vector<std::size_t> cols;
  const std::vector<std::string>* cached_schema = nullptr;
  for (const FeatureVector& fv : features) {
    validate_feature_vector(fv);
    if (cached_schema == nullptr || *cached_schema != fv.schema) {
      cols = projection(model.feature_schema, fv.schema);
      cached_schema = &fv.schema;
    }
    out.scores.push_back(model.score(project(cols, fv.values)));
  }
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (out.scores[a] != out.scores[b]) return out.scores[a] > out.scores[b];
    return candidates[a] < candidates[b];
  });
  for (std::size_t i : order) out.ranked.push_back(candidates[i]);
  return out;
}

ScoredList score_query(const RankerModel& model, const QueryJudgment& judgment,
                       const FeatureTable& features) {
  std::vector<FeatureVector> vectors;
  vectors.reserve(judgment.candidates.size());
  for (const ProductId& id : judgment.candidates) {
    vectors.push_back(features.vector(judgment.query, id));
  }
  return score(model, judgment.candidates, vectors);
}

std::vector<int> ranked_labels(const RankerModel& model, const QueryJudgment& judgment,
                               const FeatureTable& features) {
  const ScoredList scored = score_query(model, judgment, features);
  std::vector<int> labels;
  labels.reserve(scored.ranked.size());
  for (const ProductId& id : scored.ranked) {
    const auto it = std::find(judgment.candidates.begin(), judgment.candidates.end(), id);
    labels.push_back(judgment.labels[static_cast<std::size_t>(it - judgment.candidates.begin())]);
  }
  return labels;
}

double mean_ndcg(const RankerModel& model, std::span<const QueryJudgment> judgments,
                 const FeatureTable& features, std::size_t k) {
  if (judgments.empty()) return 0.0;
  double sum = 0.0;
  for (const QueryJudgment& q : judgments) sum += ndcg_at_k(ranked_labels(model, q, features), k);
  return sum / static_cast<double>(judgments.size());
}

std::vector<std::pair<double, double>> partial_dependence(const RankerModel& model,
                                                          const std::string& feature_name,
                                                          std::span<const double> grid,
                                                          std::span<const FeatureVector> background) {
  const auto it = std::find(model.feature_schema.begin(), model.feature_schema.end(), feature_name);
  if (it == model.feature_schema.end()) {
    throw LookupError("feature '" + feature_name + "' is not in the model schema");
  }
  if (background.empty()) throw InputError("partial dependence needs background vectors");
  const auto probe = static_cast<std::size_t>(it - model.feature_schema.begin());

  std::vector<std::vector<double>> rows;
  rows.reserve(background.size());
  for (const FeatureVector& fv : background) {
    validate_feature_vector(fv);
    rows.push_back(project(projection(model.feature_schema, fv.schema), fv.values));
  }
  std::vector<std::pair<double, double>> curve;
  curve.reserve(grid.size());
  for (double v : grid) {
    double sum = 0.0;
    for (std::vector<double>& x : rows) {
      x[probe] = v;
      sum += model.score(x);
    }
    curve.emplace_back(v, sum / static_cast<double>(rows.size()));
  }
  return curve;
}

}  // namespace bfs
