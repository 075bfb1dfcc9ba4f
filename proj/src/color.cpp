#include "nirfuse/color.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace nirfuse {

namespace {

constexpr double kCbScale = 2.0 * (1.0 - kLumaB);  // 1.772
constexpr double kCrScale = 2.0 * (1.0 - kLumaR);  // 1.402

void require_unit_range(const Image& img, std::string_view what) {
  for (double v : img.data()) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw ArgumentError(std::string(what) + ": sample outside [0, 1]");
    }
  }
}

template <typename Fn>
Image map_pixels(const Image& in, ImageKind kind, Fn&& fn) {
  Image out(in.width(), in.height(), 3, kind);
  const std::size_t n = in.plane_size();
  auto a = in.plane(0), b = in.plane(1), c = in.plane(2);
  auto oa = out.plane(0), ob = out.plane(1), oc = out.plane(2);
  for (std::size_t i = 0; i < n; ++i) {
    const Pixel3 p = fn(Pixel3{a[i], b[i], c[i]});
    oa[i] = p[0];
    ob[i] = p[1];
    oc[i] = p[2];
  }
  return out;
}

}  // namespace

Pixel3 rgb_to_hsv(const Pixel3& rgb) {
  const auto [r, g, b] = rgb;
  const double v = std::max({r, g, b});
  const double chroma = v - std::min({r, g, b});
  const double s = v > 0.0 ? chroma / v : 0.0;
  double h = 0.0;
  if (chroma > 0.0) {
    if (v == r) {
      h = (g - b) / chroma;
    } else if (v == g) {
      h = (b - r) / chroma + 2.0;
    } else {
      h = (r - g) / chroma + 4.0;
    }
    h /= 6.0;
    if (h < 0.0) h += 1.0;
    if (h >= 1.0) h -= 1.0;
    if (h >= 1.0 || h < 0.0) h = 0.0;
  }
  return {h, s, v};
}

Pixel3 hsv_to_rgb(const Pixel3& hsv) {
  const auto [h, s, v] = hsv;
  if (s <= 0.0) return {v, v, v};
  const double h6 = h * 6.0;
  const double sector = std::floor(h6);
  const double f = h6 - sector;
  const double p = v * (1.0 - s);
  const double q = v * (1.0 - s * f);
  const double t = v * (1.0 - s * (1.0 - f));
  switch (static_cast<int>(sector) % 6) {
    case 0: return {v, t, p};
    case 1: return {q, v, p};
    case 2: return {p, v, t};
    case 3: return {p, q, v};
    case 4: return {t, p, v};
    default: return {v, p, q};
  }
}

Pixel3 rgb_to_ycbcr(const Pixel3& rgb) {
  const auto [r, g, b] = rgb;
  const double y = luma(r, g, b);
  return {y, 0.5 + (b - y) / kCbScale, 0.5 + (r - y) / kCrScale};
}

Pixel3 ycbcr_to_rgb(const Pixel3& ycc) {
  const auto [y, cb, cr] = ycc;
  const double r = y + kCrScale * (cr - 0.5);
  const double b = y + kCbScale * (cb - 0.5);
  const double g = (y - kLumaR * r - kLumaB * b) / kLumaG;
  return {r, g, b};
}

Image rgb_to_hsv(const Image& rgb) {
  require_channels(rgb, 3, "rgb_to_hsv");
  require_unit_range(rgb, "rgb_to_hsv");
  return map_pixels(rgb, ImageKind::HSV, [](const Pixel3& p) { return rgb_to_hsv(p); });
}

Image hsv_to_rgb(const Image& hsv) {
  require_channels(hsv, 3, "hsv_to_rgb");
  for (double h : hsv.plane(0)) {
    if (!(h >= 0.0 && h < 1.0)) throw ArgumentError("hsv_to_rgb: hue outside [0, 1)");
  }
  for (int c = 1; c < 3; ++c) {
    for (double v : hsv.plane(c)) {
      if (!(v >= 0.0 && v <= 1.0)) throw ArgumentError("hsv_to_rgb: S or V outside [0, 1]");
    }
  }
  return map_pixels(hsv, ImageKind::RGB, [](const Pixel3& p) { return hsv_to_rgb(p); });
}

Image rgb_to_ycbcr(const Image& rgb) {
  require_channels(rgb, 3, "rgb_to_ycbcr");
  require_unit_range(rgb, "rgb_to_ycbcr");
  return map_pixels(rgb, ImageKind::YCbCr, [](const Pixel3& p) { return rgb_to_ycbcr(p); });
}

Image ycbcr_to_rgb(const Image& ycc) {
  require_channels(ycc, 3, "ycbcr_to_rgb");
  return map_pixels(ycc, ImageKind::RGB, [](const Pixel3& p) { return ycbcr_to_rgb(p); });
}

Image rgb_to_gray(const Image& rgb) {
  require_channels(rgb, 3, "rgb_to_gray");
  Image out(rgb.width(), rgb.height(), 1, ImageKind::GRAY);
  auto r = rgb.plane(0), g = rgb.plane(1), b = rgb.plane(2);
  auto o = out.plane(0);
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = luma(r[i], g[i], b[i]);
  return out;
}

}  // namespace nirfuse
