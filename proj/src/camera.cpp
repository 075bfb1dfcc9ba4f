#include "nirfuse/camera.hpp"

#include <cmath>

#include "json_util.hpp"

namespace nirfuse {

void CameraModel::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0) || !std::isfinite(fx) || !std::isfinite(fy)) {
    throw ArgumentError("camera focal lengths must be positive and finite");
  }
  if (!std::isfinite(cx) || !std::isfinite(cy)) throw ArgumentError("camera principal point must be finite");
  if (width <= 0 || height <= 0) throw ArgumentError("camera extent must be positive");
  if (!(baseline >= 0.0) || !std::isfinite(baseline)) throw ArgumentError("baseline must be finite and >= 0");
  for (double v : extrinsic) {
    if (!std::isfinite(v)) throw ArgumentError("extrinsic must be finite");
  }
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double dot = 0.0;
      for (int k = 0; k < 3; ++k) dot += extrinsic[4 * i + k] * extrinsic[4 * j + k];
      if (std::abs(dot - (i == j ? 1.0 : 0.0)) > 1e-6) {
        throw ArgumentError("extrinsic rotation is not orthonormal");
      }
    }
  }
}

Vec3 CameraModel::transform(const Vec3& p) const {
  Vec3 out{};
  for (int i = 0; i < 3; ++i) {
    const double* r = extrinsic.data() + 4 * i;
    out[i] = r[0] * p[0] + r[1] * p[1] + r[2] * p[2] + r[3];
  }
  return out;
}

namespace {

CameraModel camera_from(const detail::json& j, bool version_required) {
  constexpr std::string_view what = "camera";
  detail::require_object(j, what);
  detail::reject_unknown_keys(j, {"version", "fx", "fy", "cx", "cy", "width", "height", "extrinsic", "baseline"},
                              what);
  detail::check_version(j, what, version_required);
  CameraModel cam;
  cam.fx = detail::get_number(j, "fx", what);
  cam.fy = detail::get_number(j, "fy", what);
  cam.cx = detail::get_number(j, "cx", what);
  cam.cy = detail::get_number(j, "cy", what);
  cam.width = detail::get_int(j, "width", what);
  cam.height = detail::get_int(j, "height", what);
  cam.baseline = detail::get_number(j, "baseline", cam.baseline, what);
  if (j.contains("extrinsic")) {
    const auto& e = j.at("extrinsic");
    if (!e.is_array() || e.size() != 12) throw ParseError("camera: extrinsic must hold 12 numbers");
    for (std::size_t i = 0; i < 12; ++i) {
      if (!e[i].is_number()) throw ParseError("camera: extrinsic must hold 12 numbers");
      cam.extrinsic[i] = e[i].get<double>();
    }
  }
  try {
    cam.validate();
  } catch (const ArgumentError& e) {
    throw ParseError(std::string("camera: ") + e.what());
  }
  return cam;
}

}  // namespace

namespace detail {
CameraModel camera_from_json(const json& j) { return camera_from(j, false); }
}  // namespace detail

CameraModel parse_camera_json(const std::string& text) {
  return camera_from(detail::parse_json(text, "camera"), true);
}

CameraModel load_camera(const std::filesystem::path& path) {
  return parse_camera_json(detail::read_text_file(path));
}

std::string camera_to_json(const CameraModel& cam) {
  detail::json j;
  j["version"] = 1;
  j["fx"] = cam.fx;
  j["fy"] = cam.fy;
  j["cx"] = cam.cx;
  j["cy"] = cam.cy;
  j["width"] = cam.width;
  j["height"] = cam.height;
  j["extrinsic"] = cam.extrinsic;
  j["baseline"] = cam.baseline;
  return j.dump(2);
}

}  // namespace nirfuse
