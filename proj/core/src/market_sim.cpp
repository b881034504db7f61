#include "bfs/market_sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>

#include "bfs/error.hpp"

namespace bfs {

namespace {

constexpr std::size_t kDisplayDepth = 10;
constexpr std::size_t kUserPool = 5000;
constexpr double kSameCategoryAffinity = 0.7;

// Distributions are written out by hand: the standard library ones are
// implementation-defined and would break byte-identical output across
// toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::size_t index(std::size_t n) {
    return std::min(n - 1, static_cast<std::size_t>(uniform() * static_cast<double>(n)));
  }
  bool chance(double p) { return uniform() < p; }
  double normal(double sd) {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return sd * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[index(i)]);
  }

 private:
  std::mt19937_64 engine_;
};

const std::vector<std::string> kColors = {"black", "white", "pink",  "blue",
                                          "red",   "green", "silver", "navy"};
const std::vector<std::string> kSizes = {"xs", "s", "m", "l", "xl", "xxl"};

class WordMaker {
 public:
  explicit WordMaker(Rng& rng) : rng_(rng) {}

  std::string fresh(std::size_t syllables) {
    static const std::string consonants = "bcdfghklmnprstvz";
    static const std::string vowels = "aeiou";
    for (;;) {
      std::string w;
      for (std::size_t s = 0; s < syllables; ++s) {
        w.push_back(consonants[rng_.index(consonants.size())]);
        w.push_back(vowels[rng_.index(vowels.size())]);
      }
      if (used_.insert(w).second) return w;
    }
  }

 private:
  Rng& rng_;
  std::set<std::string> used_;
};

struct Cluster {
  std::size_t category = 0;
  std::string descriptor_a;
  std::string descriptor_b;
  std::string base_size;
  double zipf_weight = 0.0;
  double appeal = 0.0;
  std::vector<std::size_t> members;  // product indices
};

struct Category {
  std::string noun;
  std::vector<std::string> brands;
  std::vector<std::size_t> members;
};

struct ProductState {
  std::size_t cluster = 0;
  double appeal = 0.0;
  double price_score = 0.0;
  double rating = 0.0;
  std::set<std::string> title_tokens;
};

struct QuerySpec {
  std::string text;
  std::size_t category = 0;
  std::size_t focus = 0;
  std::set<std::string> tokens;
};

std::set<std::string> tokenize(const std::string& text) {
  std::set<std::string> out;
  std::string cur;
  for (char c : text) {
    if (c == ' ') {
      if (!cur.empty()) out.insert(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.insert(cur);
  return out;
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  std::size_t inter = 0;
  for (const std::string& t : a) inter += b.count(t);
  const std::size_t uni = a.size() + b.size() - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

std::string product_id(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "P%05zu", i);
  return buf;
}

std::vector<std::size_t> cluster_sizes(std::size_t total, double mean, Rng& rng) {
  const auto center = static_cast<std::size_t>(std::lround(mean));
  const std::size_t lo = center > 2 ? center - 2 : 2;
  const std::size_t hi = center + 2;
  std::vector<std::size_t> sizes;
  std::size_t left = total;
  while (left > 0) {
    const std::size_t s = lo + rng.index(hi - lo + 1);
    if (s >= left) {
      if (left >= 2 || sizes.empty()) {
        sizes.push_back(left);
      } else {
        sizes.back() += left;
      }
      break;
    }
    sizes.push_back(s);
    left -= s;
  }
  return sizes;
}

}  // namespace

void SimConfig::validate() const {
  if (num_products == 0 || num_categories == 0) throw ConfigError("sim: counts must be positive");
  if (num_categories > num_products) throw ConfigError("sim: more categories than products");
  if (!(cluster_size_mean >= 2.0)) throw ConfigError("sim: cluster_size_mean must be >= 2");
  if (cluster_size_mean > static_cast<double>(num_products / num_categories)) {
    throw ConfigError("sim: cluster size exceeds category size");
  }
  if (!(cold_start_fraction >= 0.0 && cold_start_fraction <= 1.0)) {
    throw ConfigError("sim: cold_start_fraction must lie in [0, 1]");
  }
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("sim: train_fraction must lie in (0, 1)");
  }
  if (!(horizon_days > 0.0)) throw ConfigError("sim: horizon_days must be positive");
  if (!(cold_start_window_days > 0.0 && cold_start_window_days < horizon_days)) {
    throw ConfigError("sim: cold_start_window_days must lie in (0, horizon_days)");
  }
  if (events_per_day == 0) throw ConfigError("sim: events_per_day must be positive");
  if (!(zipf_exponent > 0.0)) throw ConfigError("sim: zipf_exponent must be positive");
  if (!(position_bias_exponent >= 0.0)) {
    throw ConfigError("sim: position_bias_exponent must be nonnegative");
  }
  if (!(relevance_noise >= 0.0)) throw ConfigError("sim: relevance_noise must be nonnegative");
  if (num_queries < 2) throw ConfigError("sim: need at least 2 queries");
  if (candidates_per_query < 2) throw ConfigError("sim: need at least 2 candidates per query");
  if (start_time < 0) throw ConfigError("sim: start_time must be nonnegative");
}

Timestamp SimConfig::horizon_end() const {
  return start_time + static_cast<Timestamp>(std::llround(horizon_days * kSecondsPerDay));
}

Timestamp SimConfig::cold_start_begin() const {
  return horizon_end() - static_cast<Timestamp>(std::llround(cold_start_window_days * kSecondsPerDay));
}

void to_json(Json& j, const SimConfig& c) {
  j = Json{{"seed", c.seed},
           {"num_products", c.num_products},
           {"num_categories", c.num_categories},
           {"cluster_size_mean", c.cluster_size_mean},
           {"cold_start_fraction", c.cold_start_fraction},
           {"horizon_days", c.horizon_days},
           {"cold_start_window_days", c.cold_start_window_days},
           {"events_per_day", c.events_per_day},
           {"zipf_exponent", c.zipf_exponent},
           {"position_bias_exponent", c.position_bias_exponent},
           {"relevance_noise", c.relevance_noise},
           {"num_queries", c.num_queries},
           {"candidates_per_query", c.candidates_per_query},
           {"train_fraction", c.train_fraction},
           {"start_time", c.start_time}};
}

void from_json(const Json& j, SimConfig& c) {
  c = SimConfig{};
  auto opt = [&](const char* key, auto& field) {
    if (j.contains(key)) j.at(key).get_to(field);
  };
  opt("seed", c.seed);
  opt("num_products", c.num_products);
  opt("num_categories", c.num_categories);
  opt("cluster_size_mean", c.cluster_size_mean);
  opt("cold_start_fraction", c.cold_start_fraction);
  opt("horizon_days", c.horizon_days);
  opt("cold_start_window_days", c.cold_start_window_days);
  opt("events_per_day", c.events_per_day);
  opt("zipf_exponent", c.zipf_exponent);
  opt("position_bias_exponent", c.position_bias_exponent);
  opt("relevance_noise", c.relevance_noise);
  opt("num_queries", c.num_queries);
  opt("candidates_per_query", c.candidates_per_query);
  opt("train_fraction", c.train_fraction);
  opt("start_time", c.start_time);
}

bool GroundTruth::same_cluster(const ProductId& a, const ProductId& b) const {
  auto ia = cluster_of.find(a);
  auto ib = cluster_of.find(b);
  return ia != cluster_of.end() && ib != cluster_of.end() && ia->second == ib->second;
}

int GroundTruth::grade(const std::string& query, const ProductId& product) const {
  auto it = true_relevance.find({query, product});
  if (it == true_relevance.end()) {
    throw LookupError("no true relevance for (" + query + ", " + product.str() + ")");
  }
  return it->second;
}

Json truth_to_json(const GroundTruth& truth) {
  Json relevance = Json::array();
  for (const auto& [key, grade] : truth.true_relevance) {
    relevance.push_back(Json{{"query", key.first}, {"product", key.second}, {"grade", grade}});
  }
  return Json{{"clusters", truth.clusters},
              {"cold_start", truth.cold_start_set},
              {"relevance", std::move(relevance)}};
}

GroundTruth truth_from_json(const Json& j) {
  GroundTruth truth;
  j.at("clusters").get_to(truth.clusters);
  for (std::size_t c = 0; c < truth.clusters.size(); ++c) {
    for (const ProductId& id : truth.clusters[c]) {
      if (!truth.cluster_of.emplace(id, c).second) {
        throw InputError("product " + id.str() + " belongs to two clusters");
      }
    }
  }
  for (const Json& id : j.at("cold_start")) truth.cold_start_set.insert(id.get<ProductId>());
  for (const Json& r : j.at("relevance")) {
    truth.true_relevance[{r.at("query").get<std::string>(), r.at("product").get<ProductId>()}] =
        r.at("grade").get<int>();
  }
  return truth;
}

SimOutput generate(const SimConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  WordMaker words(rng);
  SimOutput out;
  const Timestamp horizon_end = cfg.horizon_end();
  out.as_of = horizon_end;

  // Categories, clusters, products.
  std::vector<Category> categories(cfg.num_categories);
  std::vector<Cluster> clusters;
  std::vector<ProductState> state;
  for (std::size_t c = 0; c < cfg.num_categories; ++c) {
    Category& cat = categories[c];
    cat.noun = words.fresh(2);
    for (int b = 0; b < 6; ++b) cat.brands.push_back(words.fresh(3));
    const std::size_t count =
        cfg.num_products / cfg.num_categories + (c < cfg.num_products % cfg.num_categories ? 1 : 0);
    for (std::size_t size : cluster_sizes(count, cfg.cluster_size_mean, rng)) {
      Cluster cl;
      cl.category = c;
      cl.descriptor_a = words.fresh(2);
      cl.descriptor_b = words.fresh(3);
      cl.base_size = kSizes[rng.index(kSizes.size())];
      for (std::size_t m = 0; m < size; ++m) {
        const std::size_t pi = out.catalog.size();
        Product p;
        p.id = ProductId(product_id(pi));
        p.category = cat.noun;
        p.brand = cat.brands[rng.index(cat.brands.size())];
        const std::string color = kColors[rng.index(kColors.size())];
        const std::string size_token =
            rng.chance(0.8) ? cl.base_size : kSizes[rng.index(kSizes.size())];
        p.attributes = {{"color", color}, {"size", size_token}};
        std::string noun = cat.noun;
        if (rng.chance(0.2)) noun += "s";
        std::string title = p.brand + " " + cl.descriptor_a;
        if (!rng.chance(0.15)) title += " " + cl.descriptor_b;
        char model[16];
        std::snprintf(model, sizeof model, "%c%zu", "xkvz"[rng.index(4)], 10 + rng.index(90));
        title += " " + noun + " " + color + " " + model;
        p.title = title;
        p.launch_time = cfg.start_time - static_cast<Timestamp>(
                                             rng.uniform(30.0, 365.0) * kSecondsPerDay);
        ProductState ps;
        ps.cluster = clusters.size();
        ps.price_score = rng.uniform();
        ps.title_tokens = tokenize(title);
        state.push_back(std::move(ps));
        cl.members.push_back(pi);
        cat.members.push_back(pi);
        out.catalog.push_back(std::move(p));
      }
      clusters.push_back(std::move(cl));
    }
  }

  // Cluster-level Zipf popularity; appeal is the popularity rank mapped to [0, 1].
  std::vector<std::size_t> by_rank(clusters.size());
  std::iota(by_rank.begin(), by_rank.end(), std::size_t{0});
  rng.shuffle(by_rank);
  const double rank_span = static_cast<double>(std::max<std::size_t>(clusters.size(), 2) - 1);
  for (std::size_t r = 0; r < by_rank.size(); ++r) {
    Cluster& cl = clusters[by_rank[r]];
    cl.zipf_weight = 1.0 / std::pow(static_cast<double>(r + 1), cfg.zipf_exponent);
    cl.appeal = 1.0 - static_cast<double>(r) / rank_span;
  }
  const double zipf_max = 1.0;

  // Cold-start launches; every cluster keeps at least two established members.
  const auto cold_target =
      static_cast<std::size_t>(std::llround(cfg.cold_start_fraction * cfg.num_products));
  std::vector<std::size_t> established(clusters.size());
  for (std::size_t c = 0; c < clusters.size(); ++c) established[c] = clusters[c].members.size();
  std::vector<std::size_t> order(out.catalog.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(order);
  std::size_t cold_count = 0;
  for (std::size_t pi : order) {
    if (cold_count >= cold_target) break;
    std::size_t& left = established[state[pi].cluster];
    if (left <= 2) continue;
    --left;
    ++cold_count;
    Product& p = out.catalog[pi];
    p.is_cold_start = true;
    p.launch_time = horizon_end - static_cast<Timestamp>(
                                      rng.uniform() * cfg.cold_start_window_days * kSecondsPerDay);
    out.truth.cold_start_set.insert(p.id);
  }

  for (std::size_t pi = 0; pi < out.catalog.size(); ++pi) {
    ProductState& ps = state[pi];
    ps.appeal = std::clamp(clusters[ps.cluster].appeal + rng.normal(0.05), 0.0, 1.0);
    // New launches have few reviews, so their rating barely tracks appeal.
    const double signal = out.catalog[pi].is_cold_start ? 0.25 * ps.appeal + 0.375 : ps.appeal;
    const double noise = out.catalog[pi].is_cold_start ? 0.3 : 0.25;
    ps.rating = std::clamp(1.0 + 4.0 * (signal + rng.normal(noise)), 1.0, 5.0);
  }

  for (const Cluster& cl : clusters) {
    std::vector<ProductId> ids;
    for (std::size_t pi : cl.members) ids.push_back(out.catalog[pi].id);
    for (const ProductId& id : ids) out.truth.cluster_of.emplace(id, out.truth.clusters.size());
    out.truth.clusters.push_back(std::move(ids));
  }

  auto popularity = [&](std::size_t pi) {
    if (out.catalog[pi].is_cold_start) return 0.0;
    return std::pow(clusters[state[pi].cluster].zipf_weight / zipf_max, 0.25);
  };

  // Queries and judgments.
  std::vector<QuerySpec> queries;
  std::set<std::string> query_texts;
  std::vector<std::vector<std::size_t>> query_candidates;
  std::vector<std::vector<int>> query_grades;
  for (std::size_t qi = 0; qi < cfg.num_queries; ++qi) {
    QuerySpec q;
    q.focus = rng.index(clusters.size());
    const Cluster& focus = clusters[q.focus];
    q.category = focus.category;
    std::string text = focus.descriptor_a + " " + focus.descriptor_b + " " +
                       categories[q.category].noun;
    if (!query_texts.insert(text).second) {
      text = kColors[rng.index(kColors.size())] + " " + text;
      if (!query_texts.insert(text).second) {
        text += " " + std::to_string(qi);
        query_texts.insert(text);
      }
    }
    q.text = text;
    q.tokens = tokenize(text);

    std::vector<std::size_t> cands(focus.members.begin(), focus.members.end());
    if (cands.size() > cfg.candidates_per_query / 2) {
      rng.shuffle(cands);
      cands.resize(cfg.candidates_per_query / 2);
    }
    const std::size_t off_category = std::max<std::size_t>(1, cfg.candidates_per_query / 5);
    std::vector<std::size_t> same;
    for (std::size_t pi : categories[q.category].members) {
      if (state[pi].cluster != q.focus) same.push_back(pi);
    }
    rng.shuffle(same);
    std::size_t next_same = 0;
    while (next_same < same.size() && cands.size() + off_category < cfg.candidates_per_query) {
      cands.push_back(same[next_same++]);
    }
    std::set<std::size_t> chosen(cands.begin(), cands.end());
    for (std::size_t attempt = 0;
         attempt < 100 * cfg.candidates_per_query && cands.size() < cfg.candidates_per_query;
         ++attempt) {
      const std::size_t pi = rng.index(out.catalog.size());
      if (clusters[state[pi].cluster].category == q.category) continue;
      if (chosen.insert(pi).second) cands.push_back(pi);
    }
    while (next_same < same.size() && cands.size() < cfg.candidates_per_query) {
      cands.push_back(same[next_same++]);
    }

    std::vector<int> grades;
    for (std::size_t pi : cands) {
      const ProductState& ps = state[pi];
      double affinity = 0.0;
      if (ps.cluster == q.focus) {
        affinity = 1.0;
      } else if (clusters[ps.cluster].category == q.category) {
        affinity = kSameCategoryAffinity;
      }
      int grade = 0;
      if (affinity > 0.0) {
        const double raw = 4.0 * affinity * (0.15 + 0.85 * ps.appeal) + rng.normal(cfg.relevance_noise);
        grade = static_cast<int>(std::clamp(std::lround(raw), 0L, static_cast<long>(kMaxGrade)));
      }
      grades.push_back(grade);
    }
    if (std::all_of(grades.begin(), grades.end(), [](int g) { return g == 0; })) grades[0] = 1;
    queries.push_back(std::move(q));
    query_candidates.push_back(std::move(cands));
    query_grades.push_back(std::move(grades));
  }

  auto attract = [&](int grade, std::size_t pi) {
    return (0.05 + 0.95 * grade / static_cast<double>(kMaxGrade)) * (0.25 + 0.75 * popularity(pi));
  };
  // Logged (production) order: descending attractiveness, ties by id.
  auto logged_order = [&](std::size_t qi, Timestamp t) {
    std::vector<std::size_t> slots;
    for (std::size_t s = 0; s < query_candidates[qi].size(); ++s) {
      if (out.catalog[query_candidates[qi][s]].launch_time <= t) slots.push_back(s);
    }
    std::sort(slots.begin(), slots.end(), [&](std::size_t a, std::size_t b) {
      const double xa = attract(query_grades[qi][a], query_candidates[qi][a]);
      const double xb = attract(query_grades[qi][b], query_candidates[qi][b]);
      if (xa != xb) return xa > xb;
      return out.catalog[query_candidates[qi][a]].id < out.catalog[query_candidates[qi][b]].id;
    });
    return slots;
  };

  out.base_features = FeatureTable(kBaseFeatureSchema);
  std::vector<std::size_t> query_order(queries.size());
  std::iota(query_order.begin(), query_order.end(), std::size_t{0});
  rng.shuffle(query_order);
  const auto train_count =
      static_cast<std::size_t>(std::llround(cfg.train_fraction * static_cast<double>(queries.size())));
  std::vector<bool> is_train(queries.size(), false);
  for (std::size_t i = 0; i < train_count; ++i) is_train[query_order[i]] = true;

  for (std::size_t qi = 0; qi < queries.size(); ++qi) {
    const QuerySpec& q = queries[qi];
    QueryJudgment j;
    j.query = q.text;
    const std::vector<std::size_t> logged = logged_order(qi, horizon_end);
    std::vector<int> rank_of(query_candidates[qi].size(), 0);
    for (std::size_t pos = 0; pos < logged.size(); ++pos) {
      rank_of[logged[pos]] = static_cast<int>(pos + 1);
    }
    for (std::size_t s = 0; s < query_candidates[qi].size(); ++s) {
      const std::size_t pi = query_candidates[qi][s];
      const Product& p = out.catalog[pi];
      const ProductState& ps = state[pi];
      j.candidates.push_back(p.id);
      j.labels.push_back(query_grades[qi][s]);
      j.logged_rank.push_back(rank_of[s]);
      out.truth.true_relevance[{q.text, p.id}] = query_grades[qi][s];
      out.base_features.set(q.text, p.id,
                            {jaccard(q.tokens, ps.title_tokens),
                             clusters[ps.cluster].category == q.category ? 1.0 : 0.0,
                             ps.price_score, ps.rating});
    }
    (is_train[qi] ? out.train_judgments : out.test_judgments).push_back(std::move(j));
  }

  // Interaction log.
  const auto days = static_cast<std::size_t>(std::ceil(cfg.horizon_days));
  const std::size_t sessions_per_day = std::max<std::size_t>(1, cfg.events_per_day * 3 / 46);
  const std::size_t browse_per_day = std::max<std::size_t>(1, cfg.events_per_day / 16);
  out.engagement.resize(kDisplayDepth);
  for (std::size_t r = 0; r < kDisplayDepth; ++r) out.engagement[r].rank = r + 1;
  auto user = [&]() { return "U" + std::to_string(rng.index(kUserPool)); };
  auto emit = [&](const std::string& u, std::size_t pi, Action a, Timestamp t, std::uint32_t qty) {
    if (t > horizon_end) t = horizon_end;
    out.events.push_back({u, out.catalog[pi].id, a, t, qty});
  };
  auto purchase_quantity = [&]() -> std::uint32_t {
    const double x = rng.uniform();
    return x < 0.8 ? 1 : (x < 0.95 ? 2 : 3);
  };

  for (std::size_t d = 0; d < days; ++d) {
    const Timestamp day_start = cfg.start_time + static_cast<Timestamp>(d) * 86400;
    if (day_start >= horizon_end) break;
    const double day_len = std::min<double>(86400.0, static_cast<double>(horizon_end - day_start));

    for (std::size_t s = 0; s < sessions_per_day; ++s) {
      const Timestamp t = day_start + static_cast<Timestamp>(rng.uniform() * day_len);
      const std::size_t qi = rng.index(queries.size());
      const std::string u = user();
      const std::vector<std::size_t> shown = logged_order(qi, t);
      const double patience = rng.uniform();
      const std::size_t depth = std::min(kDisplayDepth, shown.size());
      for (std::size_t r = 0; r < depth; ++r) {
        const std::size_t slot = shown[r];
        const std::size_t pi = query_candidates[qi][slot];
        const double examine =
            std::pow(1.0 / std::log2(static_cast<double>(r) + 2.0), cfg.position_bias_exponent);
        const bool clicked = patience < examine * attract(query_grades[qi][slot], pi);
        ++out.engagement[r].impressions;
        emit(u, pi, Action::View, t, 0);
        if (!clicked) continue;
        ++out.engagement[r].clicks;
        emit(u, pi, Action::Click, t + 5, 0);
        if (rng.chance(0.2 + 0.5 * state[pi].appeal)) {
          emit(u, pi, Action::AddToCart, t + 30, 0);
          if (rng.chance(0.6)) emit(u, pi, Action::Purchase, t + 60, purchase_quantity());
        }
      }
    }

    // Browse traffic follows cluster popularity among launched products.
    std::vector<double> cumulative;
    std::vector<std::size_t> pool;
    double total = 0.0;
    for (std::size_t pi = 0; pi < out.catalog.size(); ++pi) {
      if (out.catalog[pi].launch_time > day_start + static_cast<Timestamp>(day_len)) continue;
      double w = clusters[state[pi].cluster].zipf_weight * (0.5 + state[pi].appeal);
      if (out.catalog[pi].is_cold_start) w *= 0.05;
      total += w;
      cumulative.push_back(total);
      pool.push_back(pi);
    }
    for (std::size_t b = 0; b < browse_per_day && !pool.empty(); ++b) {
      const double x = rng.uniform() * total;
      const auto at = static_cast<std::size_t>(
          std::upper_bound(cumulative.begin(), cumulative.end(), x) - cumulative.begin());
      const std::size_t pi = pool[std::min(at, pool.size() - 1)];
      Timestamp t = day_start + static_cast<Timestamp>(rng.uniform() * day_len);
      t = std::max(t, out.catalog[pi].launch_time);
      const std::string u = user();
      emit(u, pi, Action::View, t, 0);
      emit(u, pi, Action::Click, t + 5, 0);
      emit(u, pi, Action::AddToCart, t + 30, 0);
      emit(u, pi, Action::Purchase, t + 60, purchase_quantity());
    }
  }
  std::stable_sort(out.events.begin(), out.events.end(),
                   [](const InteractionEvent& a, const InteractionEvent& b) {
                     if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
                     if (a.product != b.product) return a.product < b.product;
                     if (a.action != b.action) return a.action < b.action;
                     return a.user < b.user;
                   });
  return out;
}

void write_sim_output(const std::filesystem::path& dir, const SimOutput& out, const SimConfig& cfg) {
  std::filesystem::create_directories(dir);
  write_catalog(dir / "catalog.jsonl", out.catalog);
  write_events(dir / "events.jsonl", out.events);
  write_judgments(dir / "judgments_train.jsonl", out.train_judgments);
  write_judgments(dir / "judgments_test.jsonl", out.test_judgments);
  write_features(dir / "base_features.jsonl", out.base_features);
  Json truth = truth_to_json(out.truth);
  Json engagement = Json::array();
  for (const RankEngagement& e : out.engagement) {
    engagement.push_back(Json{{"rank", e.rank}, {"impressions", e.impressions}, {"clicks", e.clicks}});
  }
  truth["engagement"] = std::move(engagement);
  truth["as_of"] = out.as_of;
  write_json(dir / "truth.json", truth);
  write_json(dir / "sim_config.json", Json(cfg));
}

SubstituteQuality evaluate_substitutes(const LookupTable& table, const GroundTruth& truth,
                                       std::size_t max_substitutes) {
  SubstituteQuality q;
  for (const auto& [seed, set] : table) {
    for (const Substitute& s : set.substitutes) {
      ++q.predicted_pairs;
      q.correct_pairs += static_cast<std::size_t>(truth.same_cluster(seed, s.id));
    }
  }
  for (const auto& [id, cluster] : truth.cluster_of) {
    const std::size_t mates = truth.clusters[cluster].size() - 1;
    q.reachable_pairs += std::min(mates, max_substitutes);
  }
  q.precision = q.predicted_pairs == 0
                    ? 1.0
                    : static_cast<double>(q.correct_pairs) / static_cast<double>(q.predicted_pairs);
  q.recall = q.reachable_pairs == 0
                 ? 0.0
                 : static_cast<double>(q.correct_pairs) / static_cast<double>(q.reachable_pairs);
  return q;
}

std::vector<LabeledPair> labeled_training_pairs(std::span<const Product> catalog,
                                                const EmbeddingTable& embeddings,
                                                const GroundTruth& truth, std::size_t k,
                                                std::size_t max_seeds) {
  std::vector<LabeledPair> pairs;
  if (catalog.empty() || max_seeds == 0) return pairs;
  const std::size_t stride = std::max<std::size_t>(1, catalog.size() / max_seeds);
  for (std::size_t i = 0; i < catalog.size(); i += stride) {
    for (CandidatePair& c : knn_candidates(catalog[i].id, embeddings, k)) {
      const int label = truth.same_cluster(c.seed, c.candidate) ? 1 : 0;
      pairs.push_back({std::move(c), label});
    }
  }
  return pairs;
}

double cold_start_share(std::span<const ProductId> ranking, const std::set<ProductId>& cold,
                        std::size_t depth) {
  if (depth == 0) throw InputError("share depth must be at least 1");
  const std::size_t n = std::min(depth, ranking.size());
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) hits += cold.count(ranking[i]);
  return static_cast<double>(hits) / static_cast<double>(depth);
}

SegmentMetrics segment_metrics(const Rankings& rankings, const GroundTruth& truth, std::size_t k) {
  SegmentMetrics m;
  double cold_sum = 0.0;
  for (const auto& [query, ranking] : rankings) {
    std::vector<int> labels;
    bool cold_relevant = false;
    for (const ProductId& id : ranking) {
      const int g = truth.grade(query, id);
      labels.push_back(g);
      if (g > 0 && truth.cold_start_set.contains(id)) cold_relevant = true;
    }
    const double ndcg = ndcg_at_k(labels, k);
    m.ndcg_all += ndcg;
    m.cold_share_top10 += cold_start_share(ranking, truth.cold_start_set, kDefaultNdcgK);
    ++m.queries;
    if (cold_relevant) {
      cold_sum += ndcg;
      ++m.cold_queries;
    }
  }
  if (m.queries > 0) {
    m.ndcg_all /= static_cast<double>(m.queries);
    m.cold_share_top10 /= static_cast<double>(m.queries);
  }
  m.ndcg_cold = m.cold_queries > 0 ? cold_sum / static_cast<double>(m.cold_queries) : 0.0;
  return m;
}

DiscoverabilityReport discoverability_report(const Rankings& before, const Rankings& after,
                                             const GroundTruth& truth) {
  if (before.size() != after.size() ||
      !std::equal(before.begin(), before.end(), after.begin(),
                  [](const auto& a, const auto& b) { return a.first == b.first; })) {
    throw InputError("rankings cover different query sets");
  }
  DiscoverabilityReport r;
  r.before = segment_metrics(before, truth);
  r.after = segment_metrics(after, truth);
  auto rel = [](double b, double a) { return b == 0.0 ? 0.0 : (a - b) / b; };
  r.ndcg_all_rel_delta = rel(r.before.ndcg_all, r.after.ndcg_all);
  r.ndcg_cold_rel_delta = rel(r.before.ndcg_cold, r.after.ndcg_cold);
  r.cold_share_delta = r.after.cold_share_top10 - r.before.cold_share_top10;
  return r;
}

}  // namespace bfs
