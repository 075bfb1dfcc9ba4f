#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "nirfuse/camera.hpp"
#include "nirfuse/image.hpp"

namespace nirfuse {

// Scene geometry lives in a camera frame with x right, y up and the camera
// looking down -z: the pixel (u, v) at depth z back-projects to
// ((u - cx) z / fx, -(v - cy) z / fy, -z). Surfaces facing the camera have
// normals with positive z, and light positions use the same frame.

enum class LightKind { AMBIENT, ACTIVE_NIR };

struct LightSource {
  Vec3 position{};
  double phi = 0.0;
  LightKind kind = LightKind::AMBIENT;
};

enum class SpectralChannel { R, G, B, NIR };

enum class ChannelGroup { RGB, NIR };

struct SensorConfig {
  double t_rgb = 1.0;
  double t_nir = 1.0;
  double g_rgb = 1.0;
  double g_nir = 1.0;
  double sigma_pre = 0.0;   // eta_2, scaled by the gain
  double sigma_post = 0.0;  // eta_1
  std::uint64_t seed = 0;

  void validate() const;
};

struct SceneMaps {
  Image depth;       // DEPTH, meters; <= 0 or non-finite marks invalid pixels
  Image rgb_albedo;  // RGB
  Image nir_albedo;  // 1 channel
  CameraModel camera;
};

struct SurfaceGeometry {
  Image points;   // 3 channels, camera-frame coordinates
  Image normals;  // NORMAL, unit length, zero where invalid
  Image valid;    // MASK
};

/// Back-projection plus normals from the cross product of the central
/// difference tangents (one-sided at borders and next to invalid pixels).
SurfaceGeometry surface_geometry(const Image& depth, const CameraModel& cam);
Image normal_from_depth(const Image& depth, const CameraModel& cam);

struct LightingOptions {
  bool inverse_square = false;  // divide each contribution by distance^2
};

/// sum_j phi_j * max(0, N . L_j); zero at invalid pixels. All lights must
/// be AMBIENT.
Image ambient_irradiance(const SurfaceGeometry& geo, std::span<const LightSource> lights,
                         const LightingOptions& opt = {});

/// phi * max(0, N . L) for NIR, identically zero for R, G and B. The light
/// must be ACTIVE_NIR.
Image active_irradiance(const SurfaceGeometry& geo, const LightSource& light, SpectralChannel channel,
                        const LightingOptions& opt = {});

/// I = eta_1 + g * (eta_2 + t * R * (E + L)), clamped to [0, 1]. Noise is a
/// pure function of (seed, channel, pixel index), so the result does not
/// depend on thread count or evaluation order.
Image render_channel(const Image& albedo, const Image& e, const Image& l, const SensorConfig& s,
                     SpectralChannel channel);

/// Applies the sensor model to a precomputed R * (E + L) radiance plane.
Image apply_sensor(const Image& radiance, const SensorConfig& s, SpectralChannel channel);

/// Standard normal sample for (seed, stream, index); exposed for tests.
double gaussian_noise(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

struct PseudoNirParams {
  double c0 = 0.1;
  double c_r = 0.4;
  double c_g = 0.4;
  double c_b = 0.1;
};

/// clamp01(c0 + c_r R + c_g G + c_b B).
Image pseudo_nir_albedo(const Image& rgb_albedo, const PseudoNirParams& p = {});

struct StereoRender {
  Image rgb_left;
  Image rgb_right;
  Image nir_left;
  Image nir_right;
  Image disparity;        // left view, fx * B / z, 0 where invalid
  Image disparity_right;  // forward-warped, 0 in holes
  Image valid_left;       // MASK: valid depth and visible in the right view
  Image holes_right;      // MASK: right pixels nothing warped into
};

/// Renders the left view, then forward-warps its noiseless radiance to the
/// right view with x_r = round(x - d) and larger-disparity-wins z-buffering.
/// Sensor noise is keyed by pixel position, so both views share one noise
/// field and a zero baseline gives identical views.
StereoRender render_stereo_scene(const SceneMaps& scene, std::span<const LightSource> lights,
                                 const SensorConfig& s, const LightingOptions& opt = {});

struct SceneConfig {
  SceneMaps maps;
  std::vector<LightSource> lights;
  SensorConfig sensor;
  LightingOptions lighting;
};

/// JSON scene description, version 1:
///   {version, depth: PFM path, albedo: image path, nir_albedo?: image path,
///    nir_params?: {c0, c_r, c_g, c_b}, falloff?: "none" | "inverse_square",
///    lights: [{pos: [x, y, z], phi, kind: "ambient" | "active_nir"}],
///    sensor: {t_rgb, t_nir, g_rgb, g_nir, sigma_pre, sigma_post, seed},
///    camera: {fx, fy, cx, cy, width, height, extrinsic?, baseline?}}
/// Paths are relative to the file. Exactly one active_nir light is
/// required; unknown keys are rejected.
SceneConfig load_scene_config(const std::filesystem::path& path);

}  // namespace nirfuse
