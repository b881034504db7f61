#include "bfs/io.hpp"

#include <fstream>
#include <sstream>

#include "bfs/error.hpp"

namespace bfs {

void to_json(Json& j, const ProductId& id) { j = id.str(); }

void from_json(const Json& j, ProductId& id) { id = ProductId(j.get<std::string>()); }

void to_json(Json& j, const Product& p) {
  j = Json{{"id", p.id},
           {"title", p.title},
           {"category", p.category},
           {"brand", p.brand},
           {"attributes", p.attributes},
           {"launch_time", p.launch_time},
           {"is_cold_start", p.is_cold_start}};
}

void from_json(const Json& j, Product& p) {
  j.at("id").get_to(p.id);
  j.at("title").get_to(p.title);
  j.at("category").get_to(p.category);
  j.at("brand").get_to(p.brand);
  j.at("attributes").get_to(p.attributes);
  j.at("launch_time").get_to(p.launch_time);
  j.at("is_cold_start").get_to(p.is_cold_start);
}

void to_json(Json& j, const InteractionEvent& e) {
  j = Json{{"user", e.user},
           {"product", e.product},
           {"action", std::string(to_string(e.action))},
           {"timestamp", e.timestamp},
           {"quantity", e.quantity}};
}

void from_json(const Json& j, InteractionEvent& e) {
  j.at("user").get_to(e.user);
  j.at("product").get_to(e.product);
  e.action = parse_action(j.at("action").get<std::string>());
  j.at("timestamp").get_to(e.timestamp);
  j.at("quantity").get_to(e.quantity);
}

void to_json(Json& j, const QueryJudgment& q) {
  j = Json{{"query", q.query},
           {"candidates", q.candidates},
           {"labels", q.labels},
           {"logged_rank", q.logged_rank}};
}

void from_json(const Json& j, QueryJudgment& q) {
  j.at("query").get_to(q.query);
  j.at("candidates").get_to(q.candidates);
  j.at("labels").get_to(q.labels);
  j.at("logged_rank").get_to(q.logged_rank);
}

void to_json(Json& j, const FeatureVector& f) {
  j = Json{{"schema", f.schema}, {"values", f.values}};
}

void from_json(const Json& j, FeatureVector& f) {
  j.at("schema").get_to(f.schema);
  j.at("values").get_to(f.values);
}

namespace {

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  return out;
}

template <typename T>
std::vector<T> read_typed(const std::filesystem::path& path) {
  std::vector<T> out;
  std::size_t line = 0;
  for (const Json& row : read_jsonl(path)) {
    ++line;
    try {
      out.push_back(row.get<T>());
    } catch (const Json::exception& e) {
      throw InputError(path.string() + ": record " + std::to_string(line) + ": " + e.what());
    }
  }
  return out;
}

template <typename T>
void write_typed(const std::filesystem::path& path, const std::vector<T>& items) {
  std::ofstream out = open_out(path);
  for (const T& item : items) out << Json(item).dump() << '\n';
}

}  // namespace

std::vector<Json> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  std::vector<Json> rows;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    try {
      rows.push_back(Json::parse(line));
    } catch (const Json::parse_error& e) {
      throw InputError(path.string() + ":" + std::to_string(number) + ": " + e.what());
    }
  }
  return rows;
}

void write_jsonl(const std::filesystem::path& path, const std::vector<Json>& rows) {
  std::ofstream out = open_out(path);
  for (const Json& row : rows) out << row.dump() << '\n';
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const Json& value) {
  std::ofstream out = open_out(path);
  out << value.dump(2) << '\n';
}

std::vector<Product> read_catalog(const std::filesystem::path& path) {
  return read_typed<Product>(path);
}

void write_catalog(const std::filesystem::path& path, const std::vector<Product>& products) {
  write_typed(path, products);
}

std::vector<InteractionEvent> read_events(const std::filesystem::path& path) {
  return read_typed<InteractionEvent>(path);
}

void write_events(const std::filesystem::path& path, const std::vector<InteractionEvent>& events) {
  write_typed(path, events);
}

std::vector<QueryJudgment> read_judgments(const std::filesystem::path& path) {
  return read_typed<QueryJudgment>(path);
}

void write_judgments(const std::filesystem::path& path,
                     const std::vector<QueryJudgment>& judgments) {
  write_typed(path, judgments);
}

FeatureTable read_features(const std::filesystem::path& path) {
  std::vector<Json> rows = read_jsonl(path);
  if (rows.empty() || !rows.front().contains("schema")) {
    throw InputError(path.string() + ": missing schema header");
  }
  FeatureTable table(rows.front().at("schema").get<std::vector<std::string>>());
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const Json& r = rows[i];
    table.set(r.at("query").get<std::string>(), r.at("product").get<ProductId>(),
              r.at("values").get<std::vector<double>>());
  }
  return table;
}

void write_features(const std::filesystem::path& path, const FeatureTable& table) {
  std::ofstream out = open_out(path);
  out << Json{{"schema", table.schema()}}.dump() << '\n';
  for (const auto& [key, values] : table.rows()) {
    out << Json{{"query", key.first}, {"product", key.second}, {"values", values}}.dump() << '\n';
  }
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in = open_in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out = open_out(path);
  out << text;
}

}  // namespace bfs
