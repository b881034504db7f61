#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bfs/types.hpp"

namespace bfs {

using Json = nlohmann::json;

void to_json(Json& j, const ProductId& id);
void from_json(const Json& j, ProductId& id);
void to_json(Json& j, const Product& p);
void from_json(const Json& j, Product& p);
void to_json(Json& j, const InteractionEvent& e);
void from_json(const Json& j, InteractionEvent& e);
void to_json(Json& j, const QueryJudgment& q);
void from_json(const Json& j, QueryJudgment& q);
void to_json(Json& j, const FeatureVector& f);
void from_json(const Json& j, FeatureVector& f);

// Line-delimited JSON. Blank lines are skipped on read; parse errors carry
// the file name and line number.
std::vector<Json> read_jsonl(const std::filesystem::path& path);
void write_jsonl(const std::filesystem::path& path, const std::vector<Json>& rows);

Json read_json(const std::filesystem::path& path);
// Pretty-printed with a trailing newline.
void write_json(const std::filesystem::path& path, const Json& value);

std::vector<Product> read_catalog(const std::filesystem::path& path);
void write_catalog(const std::filesystem::path& path, const std::vector<Product>& products);

std::vector<InteractionEvent> read_events(const std::filesystem::path& path);
void write_events(const std::filesystem::path& path, const std::vector<InteractionEvent>& events);

std::vector<QueryJudgment> read_judgments(const std::filesystem::path& path);
void write_judgments(const std::filesystem::path& path,
                     const std::vector<QueryJudgment>& judgments);

// First line {"schema": [...]}, then one {"query", "product", "values"}
// record per row in key order.
FeatureTable read_features(const std::filesystem::path& path);
void write_features(const std::filesystem::path& path, const FeatureTable& table);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace bfs
