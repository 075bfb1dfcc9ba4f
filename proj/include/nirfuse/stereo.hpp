#pragma once

#include <map>
#include <string>
#include <vector>

#include "nirfuse/attention.hpp"
#include "nirfuse/image.hpp"

namespace nirfuse {

enum class FeatureMode { INTENSITY, INTENSITY_GRAD, ENCODER };

/// INTENSITY copies the channels; INTENSITY_GRAD appends Sobel x and y of
/// every channel; ENCODER runs the attention encoder (needs `encoder`) and
/// resizes its stride-4 output back to full resolution.
FeatureMap image_to_features(const Image& img, FeatureMode mode, const EncoderParams* encoder = nullptr);

/// Per channel: subtract the windowed mean and divide by the windowed
/// standard deviation (plus 1e-6), then scale by 1/sqrt(C) so the inner
/// product of two pixels is a mean over channels. radius 0 returns a copy.
FeatureMap normalize_features(const FeatureMap& f, int radius);

enum class ShiftSign {
  MINUS,  // right feature at x - k
  PLUS,   // right feature at x + k
};

/// V(x, y, k) for k in [0, K); lookups outside the row are -infinity.
class CorrVolume {
 public:
  CorrVolume() = default;
  CorrVolume(int width, int height, int max_disparity);

  int width() const { return width_; }
  int height() const { return height_; }
  int max_disparity() const { return k_; }

  double& at(int y, int x, int k) { return v_[index(y, x, k)]; }
  double at(int y, int x, int k) const { return v_[index(y, x, k)]; }

  bool same_shape(const CorrVolume& o) const { return width_ == o.width_ && height_ == o.height_ && k_ == o.k_; }

 private:
  std::size_t index(int y, int x, int k) const {
    return (static_cast<std::size_t>(y) * width_ + x) * static_cast<std::size_t>(k_) + k;
  }
  int width_ = 0;
  int height_ = 0;
  int k_ = 0;
  std::vector<double> v_;
};

CorrVolume correlation_volume(const FeatureMap& f_left, const FeatureMap& f_right, int max_disparity,
                              ShiftSign sign = ShiftSign::MINUS);

enum class VolumeTag { FUSION, NIR, RGB };

using VolumeSchedule = std::vector<VolumeTag>;

/// Parses "fusion,nir" style lists.
VolumeSchedule parse_schedule(const std::string& text);
std::string to_string(const VolumeSchedule& s);

struct WTAParams {
  int aggregation_radius = 0;  // box mean over finite costs, 0 = off
  bool subpixel = true;        // parabola fit around the peak
};

/// Round r adds volumes[schedule[r % size]] to the running cost; the result
/// is the per-pixel argmax over k, ties toward smaller k.
Image wta_disparity(const std::map<VolumeTag, CorrVolume>& volumes, const VolumeSchedule& schedule, int rounds,
                    const WTAParams& p = {});

enum class FusionChoice { HSV, LEARNED };

struct DepthParams {
  FeatureMode features = FeatureMode::INTENSITY_GRAD;
  VolumeSchedule schedule{VolumeTag::FUSION, VolumeTag::NIR};
  int rounds = 0;  // 0 = one pass over the schedule
  int max_disparity = 32;
  int normalize_radius = 3;
  int aggregation_radius = 3;
  bool subpixel = true;
  ShiftSign sign = ShiftSign::MINUS;
  FusionChoice fusion = FusionChoice::HSV;
  double hsv_alpha = 0.5;
  double hsv_beta = 0.5;
  const FusionModel* model = nullptr;  // LEARNED fusion and ENCODER features
};

struct StereoInputs {
  Image rgb_left;
  Image nir_left;
  Image rgb_right;
  Image nir_right;
};

/// Fuses each view, builds the scheduled volumes from the fused luma, the
/// NIR image and the RGB luma, and runs wta_disparity.
Image estimate_disparity(const StereoInputs& in, const DepthParams& p = {});

}  // namespace nirfuse
