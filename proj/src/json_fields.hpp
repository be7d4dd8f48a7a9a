#pragma once

// Small helpers for config parsing: every failure names the JSON path.

#include <string>

#include <nlohmann/json.hpp>

#include "ncentre/errors.hpp"

namespace ncentre::detail {

[[noreturn]] inline void fail(const std::string& field, const std::string& message) {
  throw Error(ErrorCode::invalid_config, field + ": " + message);
}

inline void require(bool ok, const std::string& field, const std::string& message) {
  if (!ok) fail(field, message);
}

inline double field_number(const nlohmann::json& obj, const char* key, const std::string& at) {
  const std::string path = at.empty() ? std::string(key) : at + "." + key;
  if (!obj.is_object() || !obj.contains(key)) fail(path, "missing field");
  const auto& v = obj.at(key);
  if (!v.is_number()) fail(path, "expected a number");
  return v.get<double>();
}

inline double field_number_or(const nlohmann::json& obj, const char* key, const std::string& at,
                              double fallback) {
  if (!obj.is_object() || !obj.contains(key)) return fallback;
  return field_number(obj, key, at);
}

}  // namespace ncentre::detail
