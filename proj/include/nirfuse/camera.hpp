#pragma once

#include <array>
#include <filesystem>
#include <string>

namespace nirfuse {

using Vec3 = std::array<double, 3>;

/// Pinhole intrinsics plus the rigid LiDAR-to-camera transform.
struct CameraModel {
  double fx = 0.0;
  double fy = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 0;
  int height = 0;
  /// Row-major 3x4 [R | t] mapping LiDAR coordinates to the camera frame.
  std::array<double, 12> extrinsic{1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0};
  double baseline = 0.133;  // meters

  /// Throws ArgumentError unless fx, fy > 0, the extent is positive, the
  /// baseline is finite and non-negative, and R is orthonormal to 1e-6.
  void validate() const;

  Vec3 transform(const Vec3& p) const;
};

/// JSON object {version: 1, fx, fy, cx, cy, width, height, extrinsic: [12],
/// baseline}. extrinsic and baseline are optional; unknown keys are rejected.
/// The version key is required in a standalone camera file and optional when
/// the object is embedded in a scene.
CameraModel parse_camera_json(const std::string& text);
CameraModel load_camera(const std::filesystem::path& path);
std::string camera_to_json(const CameraModel& cam);

}  // namespace nirfuse
