#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace bfs {

// 64-bit FNV-1a. Stable across platforms and runs, unlike std::hash.
std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);

// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

}  // namespace bfs
