#pragma once

// Helpers shared by the JSON readers. Internal header.

#include "canondual/error.hpp"
#include "canondual/linalg.hpp"

#include <json.hpp>

#include <initializer_list>
#include <string>
#include <string_view>

namespace canondual::json_util {

using Json = nlohmann::json;

[[noreturn]] inline void schema_error(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::SchemaError, path + ": " + what);
}

inline Json parse(std::string_view text) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::SchemaError, std::string("$: invalid JSON: ") + e.what());
  }
}

inline void require_object(const Json& j, const std::string& path) {
  if (!j.is_object()) schema_error(path, "expected an object");
}

inline void reject_unknown(const Json& j, const std::string& path,
                           std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, _] : j.items()) {
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) schema_error(path + "." + key, "unknown field");
  }
}

inline const Json& field(const Json& j, const std::string& path, const char* name) {
  auto it = j.find(name);
  if (it == j.end()) schema_error(path + "." + name, "missing required field");
  return *it;
}

inline double number(const Json& j, const std::string& path) {
  if (!j.is_number()) schema_error(path, "expected a number");
  return j.get<double>();
}

inline long long integer(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) schema_error(path, "expected an integer");
  return j.get<long long>();
}

inline Vector vector(const Json& j, const std::string& path) {
  if (!j.is_array()) schema_error(path, "expected an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = number(j[i], path + "[" + std::to_string(i) + "]");
  }
  return v;
}

/// Array of equal-length rows.
inline Matrix matrix(const Json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) schema_error(path, "expected a non-empty array of rows");
  const std::string row0 = path + "[0]";
  if (!j[0].is_array()) schema_error(row0, "expected an array of numbers");
  const auto cols = j[0].size();
  Matrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    const std::string rp = path + "[" + std::to_string(r) + "]";
    const Vector row = vector(j[r], rp);
    if (static_cast<std::size_t>(row.size()) != cols) {
      throw Error(ErrorCode::DimensionMismatch, rp + ": ragged matrix row");
    }
    m.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  return m;
}

inline Json to_json(const Vector& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(x);
  return a;
}

inline Json to_json(const Matrix& m) {
  Json a = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) a.push_back(to_json(Vector(m.row(r).transpose())));
  return a;
}

}  // namespace canondual::json_util
