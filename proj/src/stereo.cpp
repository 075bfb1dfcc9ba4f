#include "nirfuse/stereo.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "nirfuse/color.hpp"
#include "nirfuse/filters.hpp"
#include "nirfuse/fusion.hpp"
#include "nirfuse/parallel.hpp"

namespace nirfuse {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

FeatureMap image_to_features(const Image& img, FeatureMode mode, const EncoderParams* encoder) {
  switch (mode) {
    case FeatureMode::INTENSITY: {
      FeatureMap f = img;
      f.set_kind(ImageKind::FEATURE);
      return f;
    }
    case FeatureMode::INTENSITY_GRAD: {
      const Image gx = sobel_x(img), gy = sobel_y(img);
      const int c = img.channels();
      FeatureMap f(img.width(), img.height(), 3 * c, ImageKind::FEATURE);
      for (int i = 0; i < c; ++i) {
        std::copy(img.plane(i).begin(), img.plane(i).end(), f.plane(i).begin());
        std::copy(gx.plane(i).begin(), gx.plane(i).end(), f.plane(c + 2 * i).begin());
        std::copy(gy.plane(i).begin(), gy.plane(i).end(), f.plane(c + 2 * i + 1).begin());
      }
      return f;
    }
    case FeatureMode::ENCODER: {
      if (encoder == nullptr) throw ArgumentError("encoder features need encoder weights");
      if (img.width() % kEncoderStride != 0 || img.height() % kEncoderStride != 0) {
        throw ArgumentError("encoder features need an extent divisible by 4");
      }
      return upsample_bilinear(encode_image(img, *encoder), kEncoderStride);
    }
  }
  throw ArgumentError("unknown feature mode");
}

FeatureMap normalize_features(const FeatureMap& f, int radius) {
  if (radius < 0) throw ArgumentError("normalize radius must be >= 0");
  if (radius == 0) return f;
  FeatureMap sq = f;
  for (double& v : sq.data()) v *= v;
  const Image mean = box_mean(f, radius);
  const Image mean_sq = box_mean(sq, radius);
  FeatureMap out(f.width(), f.height(), f.channels(), ImageKind::FEATURE);
  const double inv_c = 1.0 / std::sqrt(static_cast<double>(f.channels()));
  auto src = f.data(), m = mean.data(), m2 = mean_sq.data();
  auto o = out.data();
  for (std::size_t i = 0; i < o.size(); ++i) {
    const double var = std::max(0.0, m2[i] - m[i] * m[i]);
    o[i] = (src[i] - m[i]) / (std::sqrt(var) + 1e-6) * inv_c;
  }
  return out;
}

CorrVolume::CorrVolume(int width, int height, int max_disparity)
    : width_(width), height_(height), k_(max_disparity) {
  if (width <= 0 || height <= 0 || max_disparity <= 0) throw ArgumentError("bad correlation volume shape");
  v_.assign(static_cast<std::size_t>(width) * height * max_disparity, 0.0);
}

CorrVolume correlation_volume(const FeatureMap& f_left, const FeatureMap& f_right, int max_disparity,
                              ShiftSign sign) {
  if (!f_left.same_shape(f_right)) throw ArgumentError("correlation_volume: feature shapes differ");
  if (max_disparity < 1 || max_disparity >= f_left.width()) {
    throw ArgumentError("max disparity must lie in [1, width)");
  }
  const int w = f_left.width(), h = f_left.height(), c = f_left.channels();
  CorrVolume vol(w, h, max_disparity);
  const int step = sign == ShiftSign::MINUS ? -1 : 1;
  parallel_rows(h, [&](int y) {
    for (int x = 0; x < w; ++x) {
      for (int k = 0; k < max_disparity; ++k) {
        const int xr = x + step * k;
        if (xr < 0 || xr >= w) {
          vol.at(y, x, k) = kNegInf;
          continue;
        }
        double acc = 0.0;
        for (int ch = 0; ch < c; ++ch) acc += f_left.at(ch, y, x) * f_right.at(ch, y, xr);
        vol.at(y, x, k) = acc;
      }
    }
  });
  return vol;
}

VolumeSchedule parse_schedule(const std::string& text) {
  VolumeSchedule s;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "fusion") {
      s.push_back(VolumeTag::FUSION);
    } else if (item == "nir") {
      s.push_back(VolumeTag::NIR);
    } else if (item == "rgb") {
      s.push_back(VolumeTag::RGB);
    } else {
      throw ArgumentError("unknown volume '" + item + "' (expected fusion, nir or rgb)");
    }
  }
  if (s.empty()) throw ArgumentError("volume schedule is empty");
  return s;
}

std::string to_string(const VolumeSchedule& s) {
  std::string out;
  for (auto t : s) {
    if (!out.empty()) out += ',';
    out += t == VolumeTag::FUSION ? "fusion" : t == VolumeTag::NIR ? "nir" : "rgb";
  }
  return out;
}

namespace {

// Box mean over the finite entries of each disparity slice.
CorrVolume aggregate(const CorrVolume& v, int r) {
  const int w = v.width(), h = v.height(), kmax = v.max_disparity();
  CorrVolume out(w, h, kmax);
  const std::size_t iw = static_cast<std::size_t>(w) + 1;
  parallel_rows(kmax, [&](int k) {
    std::vector<double> sum(iw * (h + 1), 0.0);
    std::vector<long> cnt(iw * (h + 1), 0);
    for (int y = 0; y < h; ++y) {
      double rs = 0.0;
      long rc = 0;
      for (int x = 0; x < w; ++x) {
        const double c = v.at(y, x, k);
        if (std::isfinite(c)) {
          rs += c;
          ++rc;
        }
        sum[(y + 1) * iw + x + 1] = sum[y * iw + x + 1] + rs;
        cnt[(y + 1) * iw + x + 1] = cnt[y * iw + x + 1] + rc;
      }
    }
    for (int y = 0; y < h; ++y) {
      const int y0 = std::max(0, y - r), y1 = std::min(h, y + r + 1);
      for (int x = 0; x < w; ++x) {
        const int x0 = std::max(0, x - r), x1 = std::min(w, x + r + 1);
        const long n = cnt[y1 * iw + x1] - cnt[y0 * iw + x1] - cnt[y1 * iw + x0] + cnt[y0 * iw + x0];
        const double s = sum[y1 * iw + x1] - sum[y0 * iw + x1] - sum[y1 * iw + x0] + sum[y0 * iw + x0];
        out.at(y, x, k) = (n > 0 && std::isfinite(v.at(y, x, k))) ? s / static_cast<double>(n) : kNegInf;
      }
    }
  });
  return out;
}

}  // namespace

Image wta_disparity(const std::map<VolumeTag, CorrVolume>& volumes, const VolumeSchedule& schedule, int rounds,
                    const WTAParams& p) {
  if (schedule.empty()) throw ArgumentError("volume schedule is empty");
  if (rounds < 1) throw ArgumentError("rounds must be >= 1");
  if (p.aggregation_radius < 0) throw ArgumentError("aggregation radius must be >= 0");
  const CorrVolume* first = nullptr;
  for (auto tag : schedule) {
    auto it = volumes.find(tag);
    if (it == volumes.end()) throw ArgumentError("schedule references a volume that was not built");
    if (first == nullptr) first = &it->second;
    if (!it->second.same_shape(*first)) throw ArgumentError("scheduled volumes differ in shape");
  }
  CorrVolume cost = volumes.at(schedule[0]);
  for (int r = 1; r < rounds; ++r) {
    const CorrVolume& v = volumes.at(schedule[static_cast<std::size_t>(r) % schedule.size()]);
    for (int y = 0; y < cost.height(); ++y) {
      for (int x = 0; x < cost.width(); ++x) {
        for (int k = 0; k < cost.max_disparity(); ++k) cost.at(y, x, k) += v.at(y, x, k);
      }
    }
  }
  if (p.aggregation_radius > 0) cost = aggregate(cost, p.aggregation_radius);

  const int w = cost.width(), kmax = cost.max_disparity();
  Image disp(w, cost.height(), 1, ImageKind::DISPARITY);
  parallel_rows(cost.height(), [&](int y) {
    for (int x = 0; x < w; ++x) {
      int best = 0;
      double best_v = cost.at(y, x, 0);
      for (int k = 1; k < kmax; ++k) {
        if (cost.at(y, x, k) > best_v) {
          best_v = cost.at(y, x, k);
          best = k;
        }
      }
      double d = best;
      if (p.subpixel && best > 0 && best + 1 < kmax) {
        const double lo = cost.at(y, x, best - 1), hi = cost.at(y, x, best + 1);
        const double denom = lo - 2.0 * best_v + hi;
        if (std::isfinite(lo) && std::isfinite(hi) && denom < 0.0) {
          d += std::clamp(0.5 * (lo - hi) / denom, -0.5, 0.5);
        }
      }
      disp.at(0, y, x) = d;
    }
  });
  return disp;
}

Image estimate_disparity(const StereoInputs& in, const DepthParams& p) {
  require_channels(in.rgb_left, 3, "left RGB");
  require_channels(in.rgb_right, 3, "right RGB");
  require_channels(in.nir_left, 1, "left NIR");
  require_channels(in.nir_right, 1, "right NIR");
  for (const Image* im : {&in.rgb_right, &in.nir_left, &in.nir_right}) {
    require_same_extent(in.rgb_left, *im, "estimate_disparity");
  }
  if (p.max_disparity < 1 || p.max_disparity >= in.rgb_left.width()) {
    throw ArgumentError("max disparity must lie in [1, width)");
  }
  if ((p.fusion == FusionChoice::LEARNED || p.features == FeatureMode::ENCODER) && p.model == nullptr) {
    throw ArgumentError("learned fusion and encoder features need a weights file");
  }
  auto fuse = [&](const Image& rgb, const Image& nir) {
    return p.fusion == FusionChoice::LEARNED ? learned_image_fusion(rgb, nir, *p.model)
                                             : hsv_constant_fusion(rgb, nir, p.hsv_alpha, p.hsv_beta);
  };
  const EncoderParams* enc = p.model ? &p.model->encoder : nullptr;
  auto features = [&](const Image& gray) {
    return normalize_features(image_to_features(gray, p.features, enc), p.normalize_radius);
  };

  std::map<VolumeTag, CorrVolume> volumes;
  for (auto tag : p.schedule) {
    if (volumes.count(tag)) continue;
    Image left, right;
    switch (tag) {
      case VolumeTag::FUSION:
        left = rgb_to_gray(fuse(in.rgb_left, in.nir_left));
        right = rgb_to_gray(fuse(in.rgb_right, in.nir_right));
        break;
      case VolumeTag::NIR:
        left = in.nir_left;
        right = in.nir_right;
        break;
      case VolumeTag::RGB:
        left = rgb_to_gray(in.rgb_left);
        right = rgb_to_gray(in.rgb_right);
        break;
    }
    volumes.emplace(tag, correlation_volume(features(left), features(right), p.max_disparity, p.sign));
  }
  const int rounds = p.rounds > 0 ? p.rounds : static_cast<int>(p.schedule.size());
  return wta_disparity(volumes, p.schedule, rounds, WTAParams{p.aggregation_radius, p.subpixel});
}

}  // namespace nirfuse
