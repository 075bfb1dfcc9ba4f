#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <string_view>

#include "json.hpp"
#include "nirfuse/camera.hpp"
#include "nirfuse/error.hpp"

namespace nirfuse::detail {

using nlohmann::json;

inline json parse_json(const std::string& text, std::string_view what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string(what) + ": " + e.what());
  }
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void require_object(const json& j, std::string_view what) {
  if (!j.is_object()) throw ParseError(std::string(what) + " must be a JSON object");
}

inline void reject_unknown_keys(const json& j, std::initializer_list<std::string_view> allowed,
                                std::string_view what) {
  for (const auto& item : j.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || item.key() == a;
    if (!ok) throw ParseError(std::string(what) + ": unknown key '" + item.key() + "'");
  }
}

inline double get_number(const json& j, const char* key, std::string_view what) {
  if (!j.contains(key)) throw ParseError(std::string(what) + ": missing key '" + key + "'");
  const json& v = j.at(key);
  if (!v.is_number()) throw ParseError(std::string(what) + ": '" + key + "' must be a number");
  return v.get<double>();
}

inline double get_number(const json& j, const char* key, double fallback, std::string_view what) {
  return j.contains(key) ? get_number(j, key, what) : fallback;
}

inline int get_int(const json& j, const char* key, std::string_view what) {
  if (!j.contains(key)) throw ParseError(std::string(what) + ": missing key '" + key + "'");
  const json& v = j.at(key);
  if (!v.is_number_integer()) throw ParseError(std::string(what) + ": '" + key + "' must be an integer");
  return v.get<int>();
}

inline std::string get_string(const json& j, const char* key, std::string_view what) {
  if (!j.contains(key)) throw ParseError(std::string(what) + ": missing key '" + key + "'");
  const json& v = j.at(key);
  if (!v.is_string()) throw ParseError(std::string(what) + ": '" + key + "' must be a string");
  return v.get<std::string>();
}

inline void check_version(const json& j, std::string_view what, bool required) {
  if (!j.contains("version")) {
    if (required) throw ParseError(std::string(what) + ": missing key 'version'");
    return;
  }
  if (!j.at("version").is_number_integer() || j.at("version").get<int>() != 1) {
    throw ParseError(std::string(what) + ": unsupported version (expected 1)");
  }
}

/// Camera object as accepted by parse_camera_json.
CameraModel camera_from_json(const json& j);

}  // namespace nirfuse::detail
