#pragma once

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>

#include "sqnlab/core/errors.hpp"

namespace sqnlab {

using Json = nlohmann::json;

/**
 * Read-only view of a JSON object that rejects keys outside an allowed set.
 *
 * Every config and problem file goes through this, so a misspelled key fails
 * loudly instead of silently falling back to a default.
 */
class StrictObject {
 public:
  StrictObject(const Json& j, std::string context, std::initializer_list<std::string_view> allowed)
      : j_(j), context_(std::move(context)) {
    if (!j_.is_object()) throw InvalidConfig(context_ + ": expected an object");
    for (const auto& [key, value] : j_.items()) {
      bool known = false;
      for (auto a : allowed) known = known || key == a;
      if (!known) throw InvalidConfig(context_ + ": unknown key '" + key + "'");
    }
  }

  bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }
  const Json& at(const std::string& key) const {
    if (!j_.contains(key)) throw InvalidConfig(context_ + ": missing key '" + key + "'");
    return j_.at(key);
  }
  std::string path(const std::string& key) const { return context_ + "." + key; }

  template <class T>
  T get(const std::string& key) const {
    try {
      return at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw InvalidConfig(path(key) + ": " + e.what());
    }
  }

  template <class T>
  void read(const std::string& key, T& out) const {
    if (has(key)) out = get<T>(key);
  }

 private:
  const Json& j_;
  std::string context_;
};

/// NaN and infinities are not representable in JSON; they travel as null.
inline Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline double number_or_nan(const Json& j) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (!j.is_number()) throw InvalidConfig("expected a number or null");
  return j.get<double>();
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidConfig(path + ": " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
  if (!out) throw IoError("write failed for '" + path + "'");
}

}  // namespace sqnlab
