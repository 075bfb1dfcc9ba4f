#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "nirfuse/camera.hpp"
#include "nirfuse/image.hpp"

namespace nirfuse {

struct SparsePoint {
  double u = 0.0;  // pixels
  double v = 0.0;
  double d = 0.0;  // disparity, pixels
};

using SparseDisparityPoints = std::vector<SparsePoint>;

struct ProjectedPoints {
  SparseDisparityPoints points;
  std::vector<double> depth;         // camera-frame z of each point
  std::vector<std::size_t> source;  // index into the input cloud
};

/// Transforms, drops z <= 0 and anything outside [0, width) x [0, height),
/// and converts depth to disparity with the camera's baseline. A zero
/// baseline yields zero disparities.
ProjectedPoints project_points(std::span<const Vec3> points, const CameraModel& cam);

/// The same cloud seen from the right camera of the rig, i.e. with the
/// camera frame translated by +baseline along x.
CameraModel right_camera(const CameraModel& left);

/// d = fx * B / z and its inverse. Non-positive input throws DomainError.
double depth_to_disparity(double z, const CameraModel& cam);
double disparity_to_depth(double d, const CameraModel& cam);

/// Per-pixel conversion; pixels that are not positive and finite become 0.
Image depth_to_disparity(const Image& depth, const CameraModel& cam);
Image disparity_to_depth(const Image& disparity, const CameraModel& cam);

struct RefineParams {
  double alpha = 0.75;  // neighbour radius scale
  double beta = 0.85;   // disparity ratio gate

  void validate() const;
};

/// Drops point i when another point j has dist(i, j) <= alpha * d_i and
/// d_j < beta * d_i. Every predicate is evaluated against the input set, so
/// the result does not depend on point order. Survivors keep input order.
SparseDisparityPoints refine_disparity_points(const SparseDisparityPoints& pts, const RefineParams& p = {});

/// Indices of the points kept by refine_disparity_points.
std::vector<std::size_t> refine_disparity_indices(const SparseDisparityPoints& pts, const RefineParams& p = {});

/// Rounds (u, v) to the nearest pixel; on collisions the larger disparity
/// (nearer surface) wins. Empty pixels get `fill`.
Image rasterize_points(const SparseDisparityPoints& pts, int width, int height, double fill = 0.0);

enum class ReprojectionMode {
  PIXEL,    // u_left = u_right + d_right
  LITERAL,  // u_left = u_right + d_right * baseline / fx
};

struct ConsistencyParams {
  double threshold = 1.0;  // pixels
  ReprojectionMode mode = ReprojectionMode::PIXEL;
};

/// Forward-maps every finite, non-negative right disparity into the left
/// frame (rounded, larger disparity wins) and returns a MASK image with 1
/// where |d_left - d_right->left| > threshold, where nothing mapped, or where
/// d_left is not finite.
Image left_right_consistency_mask(const Image& d_left, const Image& d_right, const CameraModel& cam,
                                  const ConsistencyParams& p = {});

/// The reprojected right map used by the mask; NaN where nothing mapped.
Image reproject_right_to_left(const Image& d_right, const CameraModel& cam, ReprojectionMode mode);

enum class WarpDirection {
  MINUS,  // sample at x - d
  PLUS,   // sample at x + d
};

struct WarpResult {
  Image image;
  Image mask;  // 1 where the sample fell inside the source
};

/// Bilinear resampling along rows. Samples outside [0, width - 1] are 0 with
/// mask 0.
WarpResult warp_by_disparity(const Image& img, const Image& disparity, WarpDirection dir = WarpDirection::MINUS);

/// "x y z" text lines (blank lines and '#' comments skipped), or binary:
/// "NFPC", u32 version = 1, u64 count, then count float32 triples, all
/// little-endian.
std::vector<Vec3> load_point_cloud(const std::filesystem::path& path);
void save_point_cloud_binary(std::span<const Vec3> points, const std::filesystem::path& path);

/// "u v d" lines with 9 significant digits.
void save_sparse_points(const SparseDisparityPoints& pts, const std::filesystem::path& path);

}  // namespace nirfuse
