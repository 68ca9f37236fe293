#include "normsim/config.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>

namespace normsim {

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const std::size_t upto = std::min(e.byte == 0 ? 0 : e.byte - 1, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
    const std::size_t last_nl = text.rfind('\n', upto == 0 ? 0 : upto - 1);
    const std::size_t column = last_nl == std::string::npos ? upto + 1 : upto - last_nl;
    throw ConfigError(path.string() + ":" + std::to_string(line) + ":" + std::to_string(column) +
                      ": invalid JSON (" + e.what() + ")");
  }
}

void reject_unknown_keys(const nlohmann::json& obj, std::initializer_list<const char*> allowed,
                         const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected a JSON object");
  for (const auto& item : obj.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* k) { return item.key() == k; });
    if (!known) throw ConfigError(where + ": unknown key '" + item.key() + "'");
  }
}

NormConfig parse_norm_config(const nlohmann::json& j, const std::string& where) {
  reject_unknown_keys(j, {"N", "L", "b", "c", "delta", "epsilon", "gamma", "h"}, where);
  NormConfig cfg;
  cfg.params.N = read_field<int>(j, "N", where);
  cfg.params.L = read_field<int>(j, "L", where);
  cfg.params.b = read_field<double>(j, "b", where);
  cfg.params.c = read_field<double>(j, "c", where);
  cfg.params.delta = read_field<double>(j, "delta", where);
  cfg.params.epsilon = read_field<double>(j, "epsilon", where, 0.0);
  cfg.params.gamma = read_field<double>(j, "gamma", where, 1.0);
  cfg.h = read_field<int>(j, "h", where);
  try {
    cfg.params.validate();
    (void)cfg.norm();
  } catch (const ConfigError& e) {
    throw ConfigError(where + ": " + e.what());
  }
  return cfg;
}

NormConfig load_norm_config(const std::filesystem::path& path) {
  return parse_norm_config(read_json_file(path), path.string());
}

nlohmann::json to_json(const CommunityParams& p, int h) {
  return {{"N", p.N}, {"L", p.L}, {"b", p.b}, {"c", p.c}, {"delta", p.delta},
          {"epsilon", p.epsilon}, {"gamma", p.gamma}, {"h", h}};
}

}  // namespace normsim
