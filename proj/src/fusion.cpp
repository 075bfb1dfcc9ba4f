#include "nirfuse/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "nirfuse/color.hpp"
#include "nirfuse/filters.hpp"

namespace nirfuse {

namespace {

void require_pair(const Image& rgb, const Image& nir, std::string_view what) {
  require_channels(rgb, 3, what);
  require_channels(nir, 1, what);
  require_same_extent(rgb, nir, what);
}

void require_unit(const Image& img, std::string_view what) {
  for (double v : img.data()) {
    if (!(v >= 0.0 && v <= 1.0)) throw ArgumentError(std::string(what) + ": sample outside [0, 1]");
  }
}

void require_unit_scalar(double v, std::string_view what) {
  if (!(v >= 0.0 && v <= 1.0)) throw ArgumentError(std::string(what) + " must lie in [0, 1]");
}

Pixel3 fuse_hsv_pixel(const Pixel3& rgb, double nir, double alpha, double beta) {
  Pixel3 hsv = rgb_to_hsv(rgb);
  hsv[2] = clamp01(alpha * hsv[2] + beta * nir);
  return hsv_to_rgb(hsv);
}

template <typename WeightAt>
Image hsv_fusion_impl(const Image& rgb, const Image& nir, WeightAt weight_at) {
  Image out(rgb.width(), rgb.height(), 3, ImageKind::RGB);
  auto r = rgb.plane(0), g = rgb.plane(1), b = rgb.plane(2), n = nir.plane(0);
  auto orr = out.plane(0), og = out.plane(1), ob = out.plane(2);
  for (std::size_t i = 0; i < n.size(); ++i) {
    const auto [alpha, beta] = weight_at(i);
    const Pixel3 p = fuse_hsv_pixel({r[i], g[i], b[i]}, n[i], alpha, beta);
    orr[i] = p[0];
    og[i] = p[1];
    ob[i] = p[2];
  }
  return out;
}

Image from_ycbcr_clamped(const Image& ycc) {
  Image out = ycbcr_to_rgb(ycc);
  for (double& v : out.data()) v = clamp01(v);
  return out;
}

}  // namespace

Image hsv_constant_fusion(const Image& rgb, const Image& nir, double alpha, double beta) {
  require_pair(rgb, nir, "hsv_constant_fusion");
  require_unit(rgb, "hsv_constant_fusion");
  require_unit(nir, "hsv_constant_fusion");
  require_unit_scalar(alpha, "alpha");
  require_unit_scalar(beta, "beta");
  return hsv_fusion_impl(rgb, nir, [=](std::size_t) { return std::pair{alpha, beta}; });
}

Image hsv_weighted_fusion(const Image& rgb, const Image& nir, const WeightMaps& weights) {
  require_pair(rgb, nir, "hsv_weighted_fusion");
  require_channels(weights.alpha, 1, "hsv_weighted_fusion alpha");
  require_channels(weights.beta, 1, "hsv_weighted_fusion beta");
  require_same_extent(rgb, weights.alpha, "hsv_weighted_fusion alpha");
  require_same_extent(rgb, weights.beta, "hsv_weighted_fusion beta");
  require_unit(rgb, "hsv_weighted_fusion");
  require_unit(nir, "hsv_weighted_fusion");
  require_unit(weights.alpha, "hsv_weighted_fusion alpha");
  require_unit(weights.beta, "hsv_weighted_fusion beta");
  auto a = weights.alpha.plane(0), b = weights.beta.plane(0);
  return hsv_fusion_impl(rgb, nir, [&](std::size_t i) { return std::pair{a[i], b[i]}; });
}

YCbCrFusionTerms ycbcr_fusion_terms(double l_rgb, double nir, double i_max) {
  YCbCrFusionTerms t{};
  t.l_v = (nir - l_rgb) / i_max;
  t.l_fused = l_rgb * t.l_v + nir * (1.0 - t.l_v);
  t.m = l_rgb == 0.0 ? 0.0 : (l_rgb - t.l_fused) / l_rgb;
  t.chroma_scale = 1.0 + t.m;
  return t;
}

Image ycbcr_fusion(const Image& rgb, const Image& nir, double i_max) {
  require_pair(rgb, nir, "ycbcr_fusion");
  require_unit(nir, "ycbcr_fusion");
  if (!(i_max > 0.0)) throw ArgumentError("ycbcr_fusion: i_max must be positive");
  Image ycc = rgb_to_ycbcr(rgb);
  auto y = ycc.plane(0), cb = ycc.plane(1), cr = ycc.plane(2);
  auto n = nir.plane(0);
  for (std::size_t i = 0; i < n.size(); ++i) {
    const auto t = ycbcr_fusion_terms(y[i], n[i], i_max);
    y[i] = t.l_fused;
    cb[i] = 0.5 + (cb[i] - 0.5) * t.chroma_scale;
    cr[i] = 0.5 + (cr[i] - 0.5) * t.chroma_scale;
  }
  return from_ycbcr_clamped(ycc);
}

// ---------------------------------------------------------------- adaptive

namespace {
void validate(const AdaptiveParams& p) {
  require_unit_scalar(p.contrast_alpha, "contrast_alpha");
  if (p.window_radius < 0) throw ArgumentError("window_radius must be >= 0");
  if (p.gaussian_kernel < 1 || p.gaussian_kernel % 2 == 0) {
    throw ArgumentError("gaussian_kernel must be odd and positive");
  }
  if (!(p.epsilon > 0.0)) throw ArgumentError("epsilon must be positive");
}
}  // namespace

Image local_contrast(const Image& gray, const AdaptiveParams& p) {
  require_channels(gray, 1, "local_contrast");
  validate(p);
  const Image hi = window_max(gray, p.window_radius);
  const Image lo = window_min(gray, p.window_radius);
  const Image gx = sobel_x(gray);
  const Image gy = sobel_y(gray);
  Image magnitude(gray.width(), gray.height(), 1, ImageKind::FEATURE);
  {
    auto m = magnitude.plane(0);
    auto a = gx.plane(0), b = gy.plane(0);
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = std::sqrt(a[i] * a[i] + b[i] * b[i]);
  }
  const Image amplitude = window_max(magnitude, p.window_radius);
  Image out(gray.width(), gray.height(), 1, ImageKind::FEATURE);
  auto o = out.plane(0);
  auto h = hi.plane(0), l = lo.plane(0), a = amplitude.plane(0);
  for (std::size_t i = 0; i < o.size(); ++i) {
    o[i] = p.contrast_alpha * (h[i] - l[i]) + (1.0 - p.contrast_alpha) * a[i];
  }
  return out;
}

Image adaptive_fusion_map(const Image& rgb, const Image& nir, const AdaptiveParams& p) {
  require_pair(rgb, nir, "adaptive_fusion");
  const Image lc_luma = local_contrast(rgb_to_gray(rgb), p);
  const Image lc_nir = local_contrast(nir, p);
  Image map(rgb.width(), rgb.height(), 1, ImageKind::WEIGHT);
  auto m = map.plane(0);
  auto ly = lc_luma.plane(0), ln = lc_nir.plane(0);
  for (std::size_t i = 0; i < m.size(); ++i) {
    m[i] = std::max(0.0, ln[i] - ly[i]) / std::max(ln[i], p.epsilon);
  }
  return map;
}

Image adaptive_fusion(const Image& rgb, const Image& nir, const AdaptiveParams& p) {
  require_pair(rgb, nir, "adaptive_fusion");
  require_unit(nir, "adaptive_fusion");
  const Image map = adaptive_fusion_map(rgb, nir, p);
  const Image blurred = gaussian_blur(nir, p.gaussian_kernel, p.gaussian_sigma);
  Image ycc = rgb_to_ycbcr(rgb);
  auto fm = map.plane(0), n = nir.plane(0), bl = blurred.plane(0);
  for (int c = 0; c < 3; ++c) {
    auto plane = ycc.plane(c);
    for (std::size_t i = 0; i < plane.size(); ++i) plane[i] += fm[i] * (n[i] - bl[i]);
  }
  return from_ycbcr_clamped(ycc);
}

// ---------------------------------------------------------------- guided filter

Image guided_filter(const Image& guide, const Image& input, const GuidedFilterParams& p) {
  require_channels(guide, 1, "guided_filter guide");
  require_same_extent(guide, input, "guided_filter");
  if (p.radius < 1) throw ArgumentError("guided_filter: radius must be >= 1");
  if (!(p.epsilon > 0.0)) throw ArgumentError("guided_filter: epsilon must be positive");

  const std::size_t n = guide.plane_size();
  const Image mean_i = box_mean(guide, p.radius);
  Image guide_sq(guide.width(), guide.height(), 1, ImageKind::FEATURE);
  for (std::size_t i = 0; i < n; ++i) guide_sq.data()[i] = guide.data()[i] * guide.data()[i];
  const Image corr_ii = box_mean(guide_sq, p.radius);

  Image out(input.width(), input.height(), input.channels(), input.kind());
  auto I = guide.plane(0), mI = mean_i.plane(0), cII = corr_ii.plane(0);
  for (int c = 0; c < input.channels(); ++c) {
    const Image src = input.channel(c, ImageKind::FEATURE);
    const Image mean_p = box_mean(src, p.radius);
    Image prod(guide.width(), guide.height(), 1, ImageKind::FEATURE);
    auto P = src.plane(0);
    for (std::size_t i = 0; i < n; ++i) prod.data()[i] = I[i] * P[i];
    const Image corr_ip = box_mean(prod, p.radius);

    Image a(guide.width(), guide.height(), 1, ImageKind::FEATURE);
    Image b(guide.width(), guide.height(), 1, ImageKind::FEATURE);
    auto mP = mean_p.plane(0), cIP = corr_ip.plane(0);
    for (std::size_t i = 0; i < n; ++i) {
      const double var = cII[i] - mI[i] * mI[i];
      const double cov = cIP[i] - mI[i] * mP[i];
      a.data()[i] = cov / (var + p.epsilon);
      b.data()[i] = mP[i] - a.data()[i] * mI[i];
    }
    const Image mean_a = box_mean(a, p.radius);
    const Image mean_b = box_mean(b, p.radius);
    auto o = out.plane(c);
    auto ma = mean_a.plane(0), mb = mean_b.plane(0);
    for (std::size_t i = 0; i < n; ++i) o[i] = clamp01(ma[i] * I[i] + mb[i]);
  }
  return out;
}

// ---------------------------------------------------------------- TV fusion

namespace {

struct Kernel {
  int size = 1;
  std::vector<double> taps{1.0};
  bool delta = true;
  double l1 = 1.0;
};

Kernel make_kernel(const std::vector<double>& raw, std::string_view name) {
  Kernel k;
  if (raw.empty()) return k;
  const auto size = static_cast<int>(std::lround(std::sqrt(static_cast<double>(raw.size()))));
  if (size * size != static_cast<int>(raw.size()) || size % 2 == 0) {
    throw ArgumentError(std::string(name) + ": kernel must be square with odd size");
  }
  double sum = 0.0;
  for (double v : raw) sum += v;
  if (!(std::abs(sum) > 0.0) || !std::isfinite(sum)) {
    throw ArgumentError(std::string(name) + ": kernel sum must be finite and non-zero");
  }
  k.size = size;
  k.taps = raw;
  k.l1 = 0.0;
  for (double& v : k.taps) {
    v /= sum;
    k.l1 += std::abs(v);
  }
  const int half = size / 2;
  k.delta = true;
  for (int i = 0; i < size * size; ++i) {
    const double expect = (i == half * size + half) ? 1.0 : 0.0;
    if (k.taps[static_cast<std::size_t>(i)] != expect) k.delta = false;
  }
  return k;
}

// Zero-padded correlation; `adjoint` applies the transpose operator.
Image apply_kernel(const Image& img, const Kernel& k, bool adjoint) {
  if (k.delta) return img;
  const int w = img.width(), h = img.height(), half = k.size / 2;
  Image out(w, h, 1, img.kind());
  const int sign = adjoint ? -1 : 1;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int i = 0; i < k.size; ++i) {
        const int yy = y + sign * (i - half);
        if (yy < 0 || yy >= h) continue;
        for (int j = 0; j < k.size; ++j) {
          const int xx = x + sign * (j - half);
          if (xx < 0 || xx >= w) continue;
          acc += k.taps[static_cast<std::size_t>(i * k.size + j)] * img.at(0, yy, xx);
        }
      }
      out.at(0, y, x) = acc;
    }
  }
  return out;
}

double squared_distance(const Image& a, const Image& b) {
  double s = 0.0;
  auto pa = a.data(), pb = b.data();
  for (std::size_t i = 0; i < pa.size(); ++i) {
    const double d = pa[i] - pb[i];
    s += d * d;
  }
  return s;
}

double energy_with(const Image& c, const Image& d1, const Image& d2, const Image& x,
                   const Kernel& k1, const Kernel& k2, double lambda) {
  double e = squared_distance(apply_kernel(c, k1, false), d1) +
             squared_distance(apply_kernel(c, k2, false), d2) + squared_distance(x, c);
  if (lambda != 0.0) e += lambda * total_variation(c);
  return e;
}

// Chambolle's dual projection for argmin_u 0.5|u - z|^2 + theta * TV(u).
// `px`, `py` hold the dual field and are warm-started across calls.
Image tv_prox(const Image& z, double theta, int iterations, std::vector<double>& px,
              std::vector<double>& py) {
  const int w = z.width(), h = z.height();
  const std::size_t n = z.plane_size();
  if (theta <= 0.0) return z;
  px.resize(n, 0.0);
  py.resize(n, 0.0);
  auto idx = [w](int y, int x) { return static_cast<std::size_t>(y) * w + x; };
  std::vector<double> div(n);
  auto compute_div = [&] {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const std::size_t i = idx(y, x);
        double d = 0.0;
        if (x < w - 1) d += px[i];
        if (x > 0) d -= px[idx(y, x - 1)];
        if (y < h - 1) d += py[i];
        if (y > 0) d -= py[idx(y - 1, x)];
        div[i] = d;
      }
    }
  };
  constexpr double step = 0.125;
  std::vector<double> term(n);
  auto zd = z.plane(0);
  for (int it = 0; it < iterations; ++it) {
    compute_div();
    for (std::size_t i = 0; i < n; ++i) term[i] = div[i] - zd[i] / theta;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const std::size_t i = idx(y, x);
        const double gx = x < w - 1 ? term[idx(y, x + 1)] - term[i] : 0.0;
        const double gy = y < h - 1 ? term[idx(y + 1, x)] - term[i] : 0.0;
        const double norm = 1.0 + step * std::sqrt(gx * gx + gy * gy);
        px[i] = (px[i] + step * gx) / norm;
        py[i] = (py[i] + step * gy) / norm;
      }
    }
  }
  compute_div();
  Image u(w, h, 1, z.kind());
  auto ud = u.plane(0);
  for (std::size_t i = 0; i < n; ++i) ud[i] = zd[i] - theta * div[i];
  return u;
}

void require_finite(const Image& img, std::string_view what) {
  for (double v : img.data()) {
    if (!std::isfinite(v)) throw NumericError(std::string(what) + ": non-finite value in solver state");
  }
}

}  // namespace

double total_variation(const Image& c) {
  const int w = c.width(), h = c.height();
  double tv = 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double v = c.at(0, y, x);
      const double dx = x < w - 1 ? c.at(0, y, x + 1) - v : 0.0;
      const double dy = y < h - 1 ? c.at(0, y + 1, x) - v : 0.0;
      tv += std::sqrt(dx * dx + dy * dy);
    }
  }
  return tv;
}

double tv_fusion_energy(const Image& c, const Image& d1, const Image& d2, const Image& x,
                        const TVFusionParams& p) {
  return energy_with(c, d1, d2, x, make_kernel(p.k1, "k1"), make_kernel(p.k2, "k2"), p.lambda);
}

TVFusionResult tv_bayesian_fusion(const Image& d1, const Image& d2, const TVFusionParams& p) {
  require_channels(d1, 1, "tv_bayesian_fusion d1");
  require_channels(d2, 1, "tv_bayesian_fusion d2");
  require_same_extent(d1, d2, "tv_bayesian_fusion");
  if (!(p.lambda >= 0.0)) throw ArgumentError("tv_bayesian_fusion: lambda must be >= 0");
  if (!(p.rho > 0.0)) throw ArgumentError("tv_bayesian_fusion: rho must be positive");
  if (p.iterations < 0 || p.inner_iterations < 1) {
    throw ArgumentError("tv_bayesian_fusion: iteration counts out of range");
  }
  require_finite(d1, "tv_bayesian_fusion d1");
  require_finite(d2, "tv_bayesian_fusion d2");

  const Kernel k1 = make_kernel(p.k1, "k1");
  const Kernel k2 = make_kernel(p.k2, "k2");
  const double lipschitz = 2.0 * (k1.l1 * k1.l1 + k2.l1 * k2.l1 + 1.0);
  const double step = p.rho / lipschitz;
  const std::size_t n = d1.plane_size();

  Image x(d1.width(), d1.height(), 1, ImageKind::GRAY);
  for (std::size_t i = 0; i < n; ++i) x.data()[i] = 0.5 * (d1.data()[i] + d2.data()[i]);

  TVFusionResult result;
  Image c = d1;
  c.set_kind(ImageKind::GRAY);
  double energy = energy_with(c, d1, d2, x, k1, k2, p.lambda);
  result.energy.push_back(energy);
  std::vector<double> px, py;

  for (int it = 0; it < p.iterations; ++it) {
    // Gradient of the quadratic terms.
    Image res1 = apply_kernel(c, k1, false);
    Image res2 = apply_kernel(c, k2, false);
    for (std::size_t i = 0; i < n; ++i) {
      res1.data()[i] -= d1.data()[i];
      res2.data()[i] -= d2.data()[i];
    }
    const Image g1 = apply_kernel(res1, k1, true);
    const Image g2 = apply_kernel(res2, k2, true);
    Image z(d1.width(), d1.height(), 1, ImageKind::GRAY);
    for (std::size_t i = 0; i < n; ++i) {
      const double grad = 2.0 * g1.data()[i] + 2.0 * g2.data()[i] + 2.0 * (c.data()[i] - x.data()[i]);
      z.data()[i] = c.data()[i] - step * grad;
    }

    Image candidate = tv_prox(z, step * p.lambda, p.inner_iterations, px, py);
    require_finite(candidate, "tv_bayesian_fusion");
    double cand_energy = energy_with(candidate, d1, d2, x, k1, k2, p.lambda);
    // An inexact proximal step can overshoot; refine the dual before giving up.
    for (int retry = 0; retry < 3 && cand_energy > energy; ++retry) {
      candidate = tv_prox(z, step * p.lambda, p.inner_iterations * (4 << retry), px, py);
      cand_energy = energy_with(candidate, d1, d2, x, k1, k2, p.lambda);
    }
    if (cand_energy <= energy) {
      c = std::move(candidate);
      energy = cand_energy;
    }
    result.energy.push_back(energy);
  }
  result.fused = std::move(c);
  return result;
}

Image tv_bayesian_fusion_rgb(const Image& rgb, const Image& nir, const TVFusionParams& p) {
  require_pair(rgb, nir, "tv_bayesian_fusion_rgb");
  Image out(rgb.width(), rgb.height(), 3, ImageKind::RGB);
  for (int c = 0; c < 3; ++c) {
    const Image fused = tv_bayesian_fusion(rgb.channel(c, ImageKind::GRAY), nir, p).fused;
    auto src = fused.plane(0);
    auto dst = out.plane(c);
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = clamp01(src[i]);
  }
  return out;
}

}  // namespace nirfuse
