#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "nirfuse/error.hpp"

namespace nirfuse {

enum class ImageKind {
  RGB,
  NIR,
  HSV,
  YCbCr,
  GRAY,
  DISPARITY,
  DEPTH,
  NORMAL,
  WEIGHT,
  FEATURE,
  MASK,
};

std::string_view to_string(ImageKind kind);

/// Planar multi-channel raster of doubles. Sample (c, y, x) lives at
/// data[(c * height + y) * width + x].
class Image {
 public:
  Image() = default;
  Image(int width, int height, int channels, ImageKind kind, double fill = 0.0);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  ImageKind kind() const { return kind_; }
  void set_kind(ImageKind kind) { kind_ = kind; }

  std::size_t plane_size() const {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& at(int c, int y, int x) { return data_[index(c, y, x)]; }
  double at(int c, int y, int x) const { return data_[index(c, y, x)]; }

  std::span<double> plane(int c) {
    return {data_.data() + static_cast<std::size_t>(c) * plane_size(), plane_size()};
  }
  std::span<const double> plane(int c) const {
    return {data_.data() + static_cast<std::size_t>(c) * plane_size(), plane_size()};
  }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  /// Copy of channel c as a single-channel image of the given kind.
  Image channel(int c, ImageKind kind) const;

  bool same_shape(const Image& other) const {
    return width_ == other.width_ && height_ == other.height_ && channels_ == other.channels_;
  }
  bool same_extent(const Image& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const Image& a, const Image& b) {
    return a.width_ == b.width_ && a.height_ == b.height_ && a.channels_ == b.channels_ &&
           a.kind_ == b.kind_ && a.data_ == b.data_;
  }

 private:
  std::size_t index(int c, int y, int x) const {
    return (static_cast<std::size_t>(c) * static_cast<std::size_t>(height_) +
            static_cast<std::size_t>(y)) *
               static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  ImageKind kind_ = ImageKind::GRAY;
  std::vector<double> data_;
};

/// Stack single-channel images into one multi-channel image.
Image stack_channels(std::span<const Image> planes, ImageKind kind);

void require_channels(const Image& img, int channels, std::string_view what);
void require_same_extent(const Image& a, const Image& b, std::string_view what);

double clamp01(double v);

}  // namespace nirfuse
