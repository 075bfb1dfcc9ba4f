#pragma once

#include <span>
#include <vector>

#include "nirfuse/image.hpp"

namespace nirfuse {

struct MetricConfig {
  double delta_base = 1.25;
  std::vector<double> bad_pixel_thresholds{1.0, 3.0, 5.0};
  double gamma_l1 = 0.85;
  double gamma_ssim = 0.15;
  int lidar_radius = 5;
  int ssim_window = 11;
  double ssim_sigma = 1.5;
  double ssim_c1 = 0.01 * 0.01;
  double ssim_c2 = 0.03 * 0.03;
  /// Adds gamma_ssim * SSIM instead of gamma_ssim * (1 - SSIM).
  bool literal_photometric = false;
};

// A mask is a one-channel image with the extent of the inputs; nonzero
// marks a valid pixel and applies to every channel. A null mask selects
// every pixel. All sums are pairwise in row-major order.

/// Throws DomainError when the mask selects nothing.
double mae(const Image& pred, const Image& gt, const Image* mask = nullptr);
double rmse(const Image& pred, const Image& gt, const Image* mask = nullptr);

struct DeltaAccuracy {
  double delta1 = 0.0;
  double delta2 = 0.0;
  double delta3 = 0.0;
};

/// Fraction of pixels with max(pred/gt, gt/pred) <= base^k. Non-positive
/// depth on the mask throws DomainError.
DeltaAccuracy delta_accuracy(const Image& pred, const Image& gt, const Image* mask = nullptr,
                             const MetricConfig& cfg = {});

/// Fraction of pixels with |pred - gt| < t for each configured threshold.
std::vector<double> bad_pixel_rates(const Image& pred, const Image& gt, const Image* mask = nullptr,
                                    const MetricConfig& cfg = {});

/// Local SSIM per pixel (mean over channels) with a truncated Gaussian
/// window renormalised at the borders.
Image ssim_map(const Image& a, const Image& b, const MetricConfig& cfg = {});
double ssim(const Image& a, const Image& b, const MetricConfig& cfg = {});

/// Peak signal-to-noise ratio for peak 1; +infinity for identical inputs.
double psnr(const Image& a, const Image& b, const Image* mask = nullptr);

/// gamma_l1 * mean|a - b| + gamma_ssim * (1 - SSIM(a, b)).
double photometric_loss(const Image& fused, const Image& original, const MetricConfig& cfg = {});

struct LidarSample {
  double u = 0.0;
  double v = 0.0;
  double z = 0.0;
};

struct LidarError {
  double sum = 0.0;
  double mean = 0.0;
  std::size_t count = 0;  // box samples that landed inside the frame
};

/// sum over samples and over the (2r+1)^2 box around the rounded (u, v) of
/// |pred - z|; out-of-frame and non-finite prediction pixels are skipped.
LidarError lidar_neighborhood_error(const Image& pred, std::span<const LidarSample> lidar,
                                    const MetricConfig& cfg = {});

/// Pairwise (cascade) summation.
double pairwise_sum(std::span<const double> v);

}  // namespace nirfuse
