#pragma once

#include <vector>

#include "nirfuse/image.hpp"

namespace nirfuse {

// Closed-form RGB-NIR fusion. Every method takes a 3-channel RGB image and a
// 1-channel NIR image of the same extent, both in [0, 1], and returns an RGB
// image clamped to [0, 1].

struct WeightMaps {
  Image alpha;  // 1 channel, [0, 1]
  Image beta;   // 1 channel, [0, 1]
};

/// V' = clamp01(alpha * V + beta * NIR) in HSV, H and S untouched.
Image hsv_constant_fusion(const Image& rgb, const Image& nir, double alpha, double beta);

/// Per-pixel version of hsv_constant_fusion. Constant maps reproduce it bit
/// for bit since both share one pixel kernel.
Image hsv_weighted_fusion(const Image& rgb, const Image& nir, const WeightMaps& weights);

struct YCbCrFusionTerms {
  double l_v;        // (NIR - l_rgb) / i_max
  double l_fused;    // l_rgb * l_v + NIR * (1 - l_v)
  double m;          // (l_rgb - l_fused) / l_rgb, 0 when l_rgb == 0
  double chroma_scale;  // 1 + m, applied to offset-centered chroma
};

YCbCrFusionTerms ycbcr_fusion_terms(double l_rgb, double nir, double i_max);

/// Luminance fusion in YCbCr. i_max normalizes the NIR-luma difference.
Image ycbcr_fusion(const Image& rgb, const Image& nir, double i_max = 1.0);

struct AdaptiveParams {
  double contrast_alpha = 0.5;  // weight of (I_max - I_min) against MaxAmplitude
  int window_radius = 3;
  int gaussian_kernel = 19;
  double gaussian_sigma = 0.0;  // <= 0: derived from the kernel size
  double epsilon = 1e-6;
};

/// alpha * (window max - window min) + (1 - alpha) * windowed max Sobel magnitude.
Image local_contrast(const Image& gray, const AdaptiveParams& p);

/// max(0, LC_nir - LC_luma) / max(LC_nir, eps); samples in [0, 1].
Image adaptive_fusion_map(const Image& rgb, const Image& nir, const AdaptiveParams& p);

/// Adds FusionMap * HPF(NIR) to the Y, Cb and Cr planes, converts back, clamps.
Image adaptive_fusion(const Image& rgb, const Image& nir, const AdaptiveParams& p = {});

struct GuidedFilterParams {
  int radius = 4;
  double epsilon = 1e-3;
};

/// Guided filter of every channel of `input` against a single-channel guide.
/// Box means use windows clipped to the image; the result is clamped to [0, 1].
Image guided_filter(const Image& guide, const Image& input, const GuidedFilterParams& p = {});

struct TVFusionParams {
  double lambda = 0.05;     // TV weight
  double rho = 1.0;         // gradient step scale; step = rho / L
  int iterations = 100;
  int inner_iterations = 10;  // dual projection steps per proximal evaluation
  // Odd-sized square kernels; normalized to unit sum on use. Empty = delta.
  std::vector<double> k1;
  std::vector<double> k2;
};

struct TVFusionResult {
  Image fused;
  /// Energy of the initial state followed by one value per accepted iteration.
  std::vector<double> energy;
};

/// Energy terms shared by the solver and its tests.
/// |k1*C - D1|^2 + |k2*C - D2|^2 + |X - C|^2 + lambda * TV(C), isotropic TV
/// with forward differences and Neumann borders.
double tv_fusion_energy(const Image& c, const Image& d1, const Image& d2, const Image& x,
                        const TVFusionParams& p);
double total_variation(const Image& c);

/// Proximal-gradient minimization of tv_fusion_energy with X held at the
/// per-pixel mean of D1 and D2. Steps that would raise the energy are
/// rejected, so the trace is monotone.
TVFusionResult tv_bayesian_fusion(const Image& d1, const Image& d2, const TVFusionParams& p = {});

/// Fuses each RGB channel against NIR and restacks them.
Image tv_bayesian_fusion_rgb(const Image& rgb, const Image& nir, const TVFusionParams& p = {});

}  // namespace nirfuse
