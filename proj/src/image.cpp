#include "nirfuse/image.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace nirfuse {

std::string_view to_string(ImageKind kind) {
  switch (kind) {
    case ImageKind::RGB: return "RGB";
    case ImageKind::NIR: return "NIR";
    case ImageKind::HSV: return "HSV";
    case ImageKind::YCbCr: return "YCbCr";
    case ImageKind::GRAY: return "GRAY";
    case ImageKind::DISPARITY: return "DISPARITY";
    case ImageKind::DEPTH: return "DEPTH";
    case ImageKind::NORMAL: return "NORMAL";
    case ImageKind::WEIGHT: return "WEIGHT";
    case ImageKind::FEATURE: return "FEATURE";
    case ImageKind::MASK: return "MASK";
  }
  return "UNKNOWN";
}

namespace {
// Keeps width * height * channels well inside size_t and PFM/PNG limits.
constexpr std::size_t kMaxSamples = std::size_t{1} << 32;
}  // namespace

Image::Image(int width, int height, int channels, ImageKind kind, double fill)
    : width_(width), height_(height), channels_(channels), kind_(kind) {
  if (width < 0 || height < 0 || channels < 1) {
    throw ArgumentError("image dimensions must be non-negative with at least one channel");
  }
  const auto samples = static_cast<std::size_t>(width) * static_cast<std::size_t>(height) *
                       static_cast<std::size_t>(channels);
  if (samples > kMaxSamples) {
    throw ArgumentError("image dimensions overflow the sample limit");
  }
  data_.assign(samples, fill);
}

Image Image::channel(int c, ImageKind kind) const {
  if (c < 0 || c >= channels_) {
    throw ArgumentError("channel index out of range");
  }
  Image out(width_, height_, 1, kind);
  auto src = plane(c);
  std::copy(src.begin(), src.end(), out.data().begin());
  return out;
}

Image stack_channels(std::span<const Image> planes, ImageKind kind) {
  if (planes.empty()) {
    throw ArgumentError("stack_channels needs at least one plane");
  }
  int total = 0;
  for (const auto& p : planes) {
    require_same_extent(planes.front(), p, "stack_channels");
    total += p.channels();
  }
  Image out(planes.front().width(), planes.front().height(), total, kind);
  int c = 0;
  for (const auto& p : planes) {
    for (int pc = 0; pc < p.channels(); ++pc, ++c) {
      auto src = p.plane(pc);
      std::copy(src.begin(), src.end(), out.plane(c).begin());
    }
  }
  return out;
}

void require_channels(const Image& img, int channels, std::string_view what) {
  if (img.channels() != channels) {
    throw ArgumentError(std::string(what) + ": expected " + std::to_string(channels) +
                        " channel(s), got " + std::to_string(img.channels()));
  }
}

void require_same_extent(const Image& a, const Image& b, std::string_view what) {
  if (!a.same_extent(b)) {
    throw ArgumentError(std::string(what) + ": dimension mismatch (" + std::to_string(a.width()) +
                        "x" + std::to_string(a.height()) + " vs " + std::to_string(b.width()) +
                        "x" + std::to_string(b.height()) + ")");
  }
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace nirfuse
