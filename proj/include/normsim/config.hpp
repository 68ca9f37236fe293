#pragma once

#include <filesystem>
#include <initializer_list>
#include <string>

#include "json.hpp"

#include "normsim/norms.hpp"

namespace normsim {

struct NormConfig {
  CommunityParams params;
  int h = 1;
  SocialNorm norm() const { return SocialNorm(params, h); }
};

// Reads a JSON document; syntax errors become ConfigError with line and column.
nlohmann::json read_json_file(const std::filesystem::path& path);

// Throws ConfigError naming the first key of obj not in allowed.
void reject_unknown_keys(const nlohmann::json& obj, std::initializer_list<const char*> allowed,
                         const std::string& where);

// Typed field access with key-level diagnostics.
template <typename T>
T read_field(const nlohmann::json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw ConfigError(where + ": missing required key '" + key + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(where + ": key '" + key + "' has the wrong type (" + e.what() + ")");
  }
}

template <typename T>
T read_field(const nlohmann::json& obj, const char* key, const std::string& where, T fallback) {
  if (!obj.contains(key)) return fallback;
  return read_field<T>(obj, key, where);
}

// Keys: N, L, b, c, delta, h (required); epsilon (default 0), gamma (default 1).
NormConfig parse_norm_config(const nlohmann::json& j, const std::string& where = "config");
NormConfig load_norm_config(const std::filesystem::path& path);

nlohmann::json to_json(const CommunityParams& params, int h);

}  // namespace normsim
