#pragma once

#include <vector>

#include "nirfuse/image.hpp"

namespace nirfuse {

// Single-plane neighbourhood filters shared by the fusion and stereo code.
// Each one processes every channel of its input independently.

/// Mean over the (2r+1)^2 window clipped to the image, via integral images.
Image box_mean(const Image& img, int radius);

/// Normalized 1-D Gaussian taps of odd length `size`. sigma <= 0 picks
/// 0.3 * ((size - 1) / 2 - 1) + 0.8.
std::vector<double> gaussian_kernel(int size, double sigma);

/// Separable Gaussian blur with reflect-101 borders.
Image gaussian_blur(const Image& img, int size, double sigma);

/// 3x3 Sobel derivatives with reflect-101 borders.
Image sobel_x(const Image& img);
Image sobel_y(const Image& img);

/// Windowed max / min over the clipped (2r+1)^2 neighbourhood.
Image window_max(const Image& img, int radius);
Image window_min(const Image& img, int radius);

/// Reflect-101 index mapping (…, 2, 1, 0, 1, 2, …).
int reflect101(int i, int n);

}  // namespace nirfuse
