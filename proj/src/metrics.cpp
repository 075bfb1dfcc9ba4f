#include "nirfuse/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "nirfuse/filters.hpp"

namespace nirfuse {

double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

namespace {

void check_pair(const Image& pred, const Image& gt, const Image* mask, const char* what) {
  if (!pred.same_shape(gt)) throw ArgumentError(std::string(what) + ": prediction and reference differ in shape");
  if (mask != nullptr) {
    require_channels(*mask, 1, "mask");
    require_same_extent(pred, *mask, what);
  }
}

bool selected(const Image* mask, std::size_t pixel) { return mask == nullptr || mask->data()[pixel] != 0.0; }

// Collects f(pred, gt) over every masked sample.
template <class F>
std::vector<double> gather(const Image& pred, const Image& gt, const Image* mask, F f) {
  std::vector<double> out;
  const std::size_t n = pred.plane_size();
  for (int c = 0; c < pred.channels(); ++c) {
    auto p = pred.plane(c), g = gt.plane(c);
    for (std::size_t i = 0; i < n; ++i) {
      if (selected(mask, i)) out.push_back(f(p[i], g[i]));
    }
  }
  return out;
}

double mean_of(const std::vector<double>& v, const char* what) {
  if (v.empty()) throw DomainError(std::string(what) + ": mask selects no pixels");
  return pairwise_sum(v) / static_cast<double>(v.size());
}

}  // namespace

double mae(const Image& pred, const Image& gt, const Image* mask) {
  check_pair(pred, gt, mask, "mae");
  return mean_of(gather(pred, gt, mask, [](double p, double g) { return std::abs(p - g); }), "mae");
}

double rmse(const Image& pred, const Image& gt, const Image* mask) {
  check_pair(pred, gt, mask, "rmse");
  return std::sqrt(
      mean_of(gather(pred, gt, mask, [](double p, double g) { return (p - g) * (p - g); }), "rmse"));
}

DeltaAccuracy delta_accuracy(const Image& pred, const Image& gt, const Image* mask, const MetricConfig& cfg) {
  check_pair(pred, gt, mask, "delta_accuracy");
  if (!(cfg.delta_base > 1.0)) throw ArgumentError("delta base must exceed 1");
  const double t1 = cfg.delta_base, t2 = t1 * t1, t3 = t2 * t1;
  std::vector<double> in1, in2, in3;
  const auto ratios = gather(pred, gt, mask, [](double p, double g) {
    if (!(p > 0.0) || !(g > 0.0) || !std::isfinite(p) || !std::isfinite(g)) {
      throw DomainError("delta_accuracy needs positive finite depths on the mask");
    }
    return std::max(p / g, g / p);
  });
  for (double r : ratios) {
    in1.push_back(r <= t1 ? 1.0 : 0.0);
    in2.push_back(r <= t2 ? 1.0 : 0.0);
    in3.push_back(r <= t3 ? 1.0 : 0.0);
  }
  return {mean_of(in1, "delta_accuracy"), mean_of(in2, "delta_accuracy"), mean_of(in3, "delta_accuracy")};
}

std::vector<double> bad_pixel_rates(const Image& pred, const Image& gt, const Image* mask,
                                    const MetricConfig& cfg) {
  check_pair(pred, gt, mask, "bad_pixel_rates");
  const auto err = gather(pred, gt, mask, [](double p, double g) { return std::abs(p - g); });
  std::vector<double> rates;
  for (double t : cfg.bad_pixel_thresholds) {
    if (!(t > 0.0)) throw ArgumentError("bad-pixel thresholds must be positive");
    std::vector<double> hit;
    hit.reserve(err.size());
    for (double e : err) hit.push_back(e < t ? 1.0 : 0.0);
    rates.push_back(mean_of(hit, "bad_pixel_rates"));
  }
  return rates;
}

namespace {

// Separable Gaussian with taps outside the image dropped and the remaining
// ones renormalised, per channel.
Image truncated_blur(const Image& img, const std::vector<double>& k) {
  const int r = static_cast<int>(k.size()) / 2;
  const int w = img.width(), h = img.height();
  Image tmp(w, h, img.channels(), img.kind());
  Image out(w, h, img.channels(), img.kind());
  for (int c = 0; c < img.channels(); ++c) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double s = 0.0, n = 0.0;
        for (int i = -r; i <= r; ++i) {
          const int xx = x + i;
          if (xx < 0 || xx >= w) continue;
          s += k[i + r] * img.at(c, y, xx);
          n += k[i + r];
        }
        tmp.at(c, y, x) = s / n;
      }
    }
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double s = 0.0, n = 0.0;
        for (int i = -r; i <= r; ++i) {
          const int yy = y + i;
          if (yy < 0 || yy >= h) continue;
          s += k[i + r] * tmp.at(c, yy, x);
          n += k[i + r];
        }
        out.at(c, y, x) = s / n;
      }
    }
  }
  return out;
}

}  // namespace

Image ssim_map(const Image& a, const Image& b, const MetricConfig& cfg) {
  if (!a.same_shape(b)) throw ArgumentError("ssim: images differ in shape");
  if (a.empty()) throw ArgumentError("ssim: empty image");
  if (cfg.ssim_window < 1 || cfg.ssim_window % 2 == 0 || !(cfg.ssim_sigma > 0.0)) {
    throw ArgumentError("ssim window must be odd with positive sigma");
  }
  const auto k = gaussian_kernel(cfg.ssim_window, cfg.ssim_sigma);
  Image aa = a, bb = b, ab = a;
  for (std::size_t i = 0; i < a.size(); ++i) {
    aa.data()[i] = a.data()[i] * a.data()[i];
    bb.data()[i] = b.data()[i] * b.data()[i];
    ab.data()[i] = a.data()[i] * b.data()[i];
  }
  const Image mu_a = truncated_blur(a, k), mu_b = truncated_blur(b, k);
  const Image e_aa = truncated_blur(aa, k), e_bb = truncated_blur(bb, k), e_ab = truncated_blur(ab, k);
  Image out(a.width(), a.height(), 1, ImageKind::GRAY);
  const std::size_t n = a.plane_size();
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int c = 0; c < a.channels(); ++c) {
      const std::size_t j = static_cast<std::size_t>(c) * n + i;
      const double ma = mu_a.data()[j], mb = mu_b.data()[j];
      const double va = e_aa.data()[j] - ma * ma;
      const double vb = e_bb.data()[j] - mb * mb;
      const double cov = e_ab.data()[j] - ma * mb;
      acc += ((2.0 * ma * mb + cfg.ssim_c1) * (2.0 * cov + cfg.ssim_c2)) /
             ((ma * ma + mb * mb + cfg.ssim_c1) * (va + vb + cfg.ssim_c2));
    }
    out.data()[i] = acc / a.channels();
  }
  return out;
}

double ssim(const Image& a, const Image& b, const MetricConfig& cfg) {
  const Image m = ssim_map(a, b, cfg);
  return pairwise_sum(m.data()) / static_cast<double>(m.size());
}

double psnr(const Image& a, const Image& b, const Image* mask) {
  check_pair(a, b, mask, "psnr");
  const auto sq = gather(a, b, mask, [](double p, double g) { return (p - g) * (p - g); });
  const double mse = mean_of(sq, "psnr");
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return -10.0 * std::log10(mse);
}

double photometric_loss(const Image& fused, const Image& original, const MetricConfig& cfg) {
  check_pair(fused, original, nullptr, "photometric_loss");
  const double l1 = mae(fused, original);
  const double s = ssim(fused, original, cfg);
  return cfg.gamma_l1 * l1 + cfg.gamma_ssim * (cfg.literal_photometric ? s : 1.0 - s);
}

LidarError lidar_neighborhood_error(const Image& pred, std::span<const LidarSample> lidar,
                                    const MetricConfig& cfg) {
  require_channels(pred, 1, "lidar_neighborhood_error prediction");
  if (lidar.empty()) throw DomainError("lidar_neighborhood_error: no LiDAR samples");
  if (cfg.lidar_radius < 0) throw ArgumentError("lidar radius must be >= 0");
  const int r = cfg.lidar_radius;
  std::vector<double> terms;
  for (const auto& s : lidar) {
    if (!std::isfinite(s.u) || !std::isfinite(s.v) || !std::isfinite(s.z)) {
      throw ArgumentError("LiDAR samples must be finite");
    }
    const long u = std::lround(s.u), v = std::lround(s.v);
    for (long dy = -r; dy <= r; ++dy) {
      for (long dx = -r; dx <= r; ++dx) {
        const long x = u + dx, y = v + dy;
        if (x < 0 || y < 0 || x >= pred.width() || y >= pred.height()) continue;
        const double p = pred.at(0, static_cast<int>(y), static_cast<int>(x));
        if (!std::isfinite(p)) continue;
        terms.push_back(std::abs(p - s.z));
      }
    }
  }
  LidarError e;
  e.count = terms.size();
  e.sum = pairwise_sum(terms);
  e.mean = e.count > 0 ? e.sum / static_cast<double>(e.count) : 0.0;
  return e;
}

}  // namespace nirfuse
