#pragma once

#include <array>

#include "nirfuse/image.hpp"

namespace nirfuse {

// Hexcone HSV with hue normalized to [0, 1); hue is 0 for achromatic pixels.
// YCbCr uses BT.601 full-range coefficients with chroma centered at 0.5.

using Pixel3 = std::array<double, 3>;

Pixel3 rgb_to_hsv(const Pixel3& rgb);
Pixel3 hsv_to_rgb(const Pixel3& hsv);
Pixel3 rgb_to_ycbcr(const Pixel3& rgb);
Pixel3 ycbcr_to_rgb(const Pixel3& ycc);

inline constexpr double kLumaR = 0.299;
inline constexpr double kLumaG = 0.587;
inline constexpr double kLumaB = 0.114;

inline double luma(double r, double g, double b) { return kLumaR * r + kLumaG * g + kLumaB * b; }

/// Requires 3 channels with samples in [0, 1].
Image rgb_to_hsv(const Image& rgb);
/// Requires H in [0, 1) and S, V in [0, 1]; out-of-range samples are rejected.
Image hsv_to_rgb(const Image& hsv);
Image rgb_to_ycbcr(const Image& rgb);
/// Exact linear inverse; no clamping, so fused chroma can be inspected.
Image ycbcr_to_rgb(const Image& ycc);
/// Luma (Y) of an RGB image as a GRAY image.
Image rgb_to_gray(const Image& rgb);

}  // namespace nirfuse
