#include <cmath>

#include "doctest.h"
#include "nirfuse/color.hpp"
#include "nirfuse/filters.hpp"
#include "nirfuse/fusion.hpp"
#include "test_util.hpp"

using namespace nirfuse;

namespace {

Image constant(int w, int h, double v, ImageKind kind = ImageKind::WEIGHT) { return Image(w, h, 1, kind, v); }

bool all_unit(const Image& img) {
  for (double v : img.data())
    if (!(v >= 0.0 && v <= 1.0)) return false;
  return true;
}

}  // namespace

TEST_CASE("hsv fusion identity weights") {
  const Image rgb = nftest::random_rgb(16, 12, 11), nir = nftest::random_nir(16, 12, 12);
  const Image out = hsv_constant_fusion(rgb, nir, 1.0, 0.0);
  CHECK(nftest::max_abs_diff(out, rgb) <= 1e-5);
  CHECK(out.kind() == ImageKind::RGB);
}

TEST_CASE("hsv fusion blends V") {
  // V = 0.4 (pure red at 0.4), NIR 0.8: V' = 0.6, hue and saturation kept.
  Image rgb(1, 1, 3, ImageKind::RGB);
  rgb.at(0, 0, 0) = 0.4;
  const Image nir = constant(1, 1, 0.8, ImageKind::NIR);
  const Image out = hsv_constant_fusion(rgb, nir, 0.5, 0.5);
  CHECK(out.at(0, 0, 0) == doctest::Approx(0.6));
  CHECK(out.at(1, 0, 0) == doctest::Approx(0.0));
  CHECK(out.at(2, 0, 0) == doctest::Approx(0.0));
}

TEST_CASE("hsv fusion on gray input with alpha 0 beta 1 copies NIR") {
  Image rgb(5, 5, 3, ImageKind::RGB);
  const Image g = nftest::random_nir(5, 5, 13);
  for (int c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < 25; ++i) rgb.plane(c)[i] = g.data()[i];
  const Image nir = nftest::random_nir(5, 5, 14);
  const Image out = hsv_constant_fusion(rgb, nir, 0.0, 1.0);
  for (int c = 0; c < 3; ++c)
    for (std::size_t i = 0; i < 25; ++i) CHECK(out.plane(c)[i] == doctest::Approx(nir.data()[i]));
}

TEST_CASE("hsv fusion output stays in range") {
  const Image rgb = nftest::random_rgb(20, 20, 15), nir = nftest::random_nir(20, 20, 16);
  CHECK(all_unit(hsv_constant_fusion(rgb, nir, 1.0, 1.0)));
  CHECK(all_unit(hsv_constant_fusion(rgb, nir, 0.2, 0.3)));
}

TEST_CASE("weighted fusion with constant maps is bit exact") {
  const Image rgb = nftest::random_rgb(17, 9, 17), nir = nftest::random_nir(17, 9, 18);
  for (auto [a, b] : {std::pair{0.5, 0.5}, std::pair{1.0, 0.0}, std::pair{0.3, 0.9}}) {
    const WeightMaps maps{constant(17, 9, a), constant(17, 9, b)};
    CHECK(hsv_weighted_fusion(rgb, nir, maps) == hsv_constant_fusion(rgb, nir, a, b));
  }
}

TEST_CASE("weighted fusion matches a per-pixel loop") {
  const Image rgb = nftest::random_rgb(8, 6, 19), nir = nftest::random_nir(8, 6, 20);
  const WeightMaps maps{nftest::random_image(8, 6, 1, 21), nftest::random_image(8, 6, 1, 22)};
  const Image out = hsv_weighted_fusion(rgb, nir, maps);
  for (int y = 0; y < 6; ++y) {
    for (int x = 0; x < 8; ++x) {
      auto hsv = rgb_to_hsv(Pixel3{rgb.at(0, y, x), rgb.at(1, y, x), rgb.at(2, y, x)});
      hsv[2] = std::clamp(maps.alpha.at(0, y, x) * hsv[2] + maps.beta.at(0, y, x) * nir.at(0, y, x), 0.0, 1.0);
      const auto p = hsv_to_rgb(hsv);
      for (int c = 0; c < 3; ++c) CHECK(out.at(c, y, x) == p[static_cast<std::size_t>(c)]);
    }
  }
}

TEST_CASE("fusion argument checks") {
  const Image rgb = nftest::random_rgb(4, 4, 23), nir = nftest::random_nir(5, 4, 24);
  CHECK_THROWS_AS(hsv_constant_fusion(rgb, nir, 0.5, 0.5), ArgumentError);
  CHECK_THROWS_AS(hsv_constant_fusion(nir, nir, 0.5, 0.5), ArgumentError);
  Image bad = nftest::random_nir(4, 4, 25);
  bad.at(0, 1, 1) = 1.2;
  CHECK_THROWS_AS(hsv_constant_fusion(rgb, bad, 0.5, 0.5), ArgumentError);
  const WeightMaps wrong{constant(3, 4, 0.5), constant(4, 4, 0.5)};
  CHECK_THROWS_AS(hsv_weighted_fusion(rgb, nftest::random_nir(4, 4, 26), wrong), ArgumentError);
}

TEST_CASE("ycbcr fusion terms by hand") {
  const auto t = ycbcr_fusion_terms(0.2, 0.6, 1.0);
  CHECK(t.l_v == doctest::Approx(0.4));
  CHECK(t.l_fused == doctest::Approx(0.44));
  CHECK(t.m == doctest::Approx(-1.2));
  CHECK(t.chroma_scale == doctest::Approx(-0.2));
  const auto z = ycbcr_fusion_terms(0.0, 0.7, 1.0);
  CHECK(z.m == 0.0);
  CHECK(std::isfinite(z.chroma_scale));
}

TEST_CASE("ycbcr fusion fixed point") {
  const Image rgb = nftest::random_rgb(32, 32, 27);
  const Image nir = rgb_to_gray(rgb);
  CHECK(nftest::max_abs_diff(ycbcr_fusion(rgb, nir, 1.0), rgb) <= 1e-5);
}

TEST_CASE("ycbcr fusion on black pixels yields finite output") {
  Image rgb(3, 3, 3, ImageKind::RGB);
  const Image nir = nftest::random_nir(3, 3, 28);
  const Image out = ycbcr_fusion(rgb, nir);
  for (double v : out.data()) CHECK(std::isfinite(v));
  CHECK(all_unit(out));
  CHECK_THROWS_AS(ycbcr_fusion(rgb, nir, 0.0), ArgumentError);
}

TEST_CASE("adaptive fusion with constant NIR is identity") {
  const Image rgb = nftest::random_rgb(24, 24, 29);
  const Image nir = constant(24, 24, 0.6, ImageKind::NIR);
  CHECK(nftest::max_abs_diff(adaptive_fusion(rgb, nir), rgb) <= 1e-5);
}

TEST_CASE("adaptive fusion map responds to a NIR edge over flat RGB") {
  const Image rgb(16, 16, 3, ImageKind::RGB, 0.5);
  Image nir(16, 16, 1, ImageKind::NIR, 0.2);
  for (int y = 0; y < 16; ++y)
    for (int x = 8; x < 16; ++x) nir.at(0, y, x) = 0.8;
  AdaptiveParams p;
  p.window_radius = 1;
  const Image map = adaptive_fusion_map(rgb, nir, p);
  CHECK(map.at(0, 8, 8) > 0.0);
  CHECK(map.at(0, 8, 7) > 0.0);
  CHECK(map.at(0, 8, 0) == 0.0);
  CHECK(map.at(0, 8, 15) == 0.0);
  for (double v : map.data()) CHECK((v >= 0.0 && v <= 1.0));
}

TEST_CASE("adaptive fusion is identity when RGB contrast dominates") {
  const Image rgb = nftest::random_rgb(16, 16, 30);
  Image nir = nftest::random_image(16, 16, 1, 31, 0.5, 0.5001, ImageKind::NIR);
  const Image map = adaptive_fusion_map(rgb, nir, {});
  for (double v : map.data()) CHECK(v == 0.0);
  CHECK(nftest::max_abs_diff(adaptive_fusion(rgb, nir), rgb) <= 1e-5);
}

TEST_CASE("local contrast by hand") {
  // Step 0 | 1 with radius 1: window range 1, Sobel magnitude 4 next to the
  // edge, so the contrast there is 0.5 * 1 + 0.5 * 4.
  Image step(6, 6, 1, ImageKind::GRAY);
  for (int y = 0; y < 6; ++y)
    for (int x = 3; x < 6; ++x) step.at(0, y, x) = 1.0;
  AdaptiveParams p;
  p.window_radius = 1;
  const Image lc = local_contrast(step, p);
  CHECK(lc.at(0, 3, 2) == doctest::Approx(2.5));
  CHECK(lc.at(0, 3, 0) == doctest::Approx(0.0));
}

TEST_CASE("guided filter matches brute-force window statistics") {
  double worst = 0.0;
  for (std::uint32_t s = 0; s < 25; ++s) {
    const Image guide = nftest::random_nir(12, 12, 100 + s), input = nftest::random_rgb(12, 12, 200 + s);
    for (int r : {1, 3}) {
      const Image fast = guided_filter(guide, input, {r, 1e-2});
      worst = std::max(worst, nftest::max_abs_diff(fast, nftest::naive_guided_filter(guide, input, r, 1e-2)));
    }
  }
  CHECK(worst <= 1e-6);
}

TEST_CASE("guided filter with constant guide reduces to box filtering") {
  // a = 0 and b = mean(p), so the output is the box mean of the box mean.
  const Image guide = constant(10, 10, 0.4, ImageKind::NIR);
  const Image input = nftest::random_rgb(10, 10, 32);
  CHECK(nftest::max_abs_diff(guided_filter(guide, input, {2, 1e-3}), box_mean(box_mean(input, 2), 2)) <= 1e-12);
}

TEST_CASE("self-guided filter with tiny epsilon is near identity") {
  const Image img = nftest::random_nir(10, 10, 33);
  CHECK(nftest::max_abs_diff(guided_filter(img, img, {2, 1e-9}), img) <= 1e-5);
}

TEST_CASE("guided filter argument checks") {
  const Image g = nftest::random_nir(4, 4, 34), in = nftest::random_rgb(4, 4, 35);
  CHECK_THROWS_AS(guided_filter(g, in, {0, 1e-3}), ArgumentError);
  CHECK_THROWS_AS(guided_filter(g, in, {1, 0.0}), ArgumentError);
  CHECK_THROWS_AS(guided_filter(in, in, {1, 1e-3}), ArgumentError);
}

TEST_CASE("tv energy is non-increasing") {
  TVFusionParams p;
  p.iterations = 100;
  for (std::uint32_t s = 0; s < 3; ++s) {
    const Image d1 = nftest::random_nir(16, 16, 300 + s), d2 = nftest::random_nir(16, 16, 400 + s);
    const auto r = tv_bayesian_fusion(d1, d2, p);
    REQUIRE(r.energy.size() >= 2);
    for (std::size_t i = 1; i < r.energy.size(); ++i) CHECK(r.energy[i] <= r.energy[i - 1] + 1e-9);
    CHECK(r.energy.back() < r.energy.front());
  }
}

TEST_CASE("tv energy trace with blur kernels is non-increasing") {
  TVFusionParams p;
  p.k1 = {1, 2, 1, 2, 4, 2, 1, 2, 1};
  p.k2 = {0, 1, 0, 1, 4, 1, 0, 1, 0};
  p.lambda = 0.1;
  const Image d1 = nftest::random_nir(16, 16, 36), d2 = nftest::random_nir(16, 16, 37);
  const auto r = tv_bayesian_fusion(d1, d2, p);
  for (std::size_t i = 1; i < r.energy.size(); ++i) CHECK(r.energy[i] <= r.energy[i - 1] + 1e-9);
}

TEST_CASE("tv with lambda 0 and delta kernels reaches the quadratic minimizer") {
  const Image d1 = nftest::random_nir(16, 16, 38), d2 = nftest::random_nir(16, 16, 39);
  TVFusionParams p;
  p.lambda = 0.0;
  p.iterations = 500;
  const auto r = tv_bayesian_fusion(d1, d2, p);
  double worst = 0.0;
  for (std::size_t i = 0; i < d1.size(); ++i) {
    const double x = 0.5 * (d1.data()[i] + d2.data()[i]);
    worst = std::max(worst, std::abs(r.fused.data()[i] - (d1.data()[i] + d2.data()[i] + x) / 3.0));
  }
  CHECK(worst <= 1e-4);
}

TEST_CASE("tv constant inputs are a fixed point") {
  const Image c = constant(8, 8, 0.3, ImageKind::GRAY);
  const auto r = tv_bayesian_fusion(c, c, {});
  CHECK(nftest::max_abs_diff(r.fused, c) <= 1e-12);
}

TEST_CASE("tv energy evaluation by hand") {
  Image c(2, 1, 1, ImageKind::GRAY), d(2, 1, 1, ImageKind::GRAY);
  c.at(0, 0, 0) = 0.0;
  c.at(0, 0, 1) = 1.0;
  TVFusionParams p;
  p.lambda = 0.5;
  // |C - 0|^2 twice plus |0 - C|^2, and TV = 1.
  CHECK(tv_fusion_energy(c, d, d, d, p) == doctest::Approx(3.0 + 0.5));
  CHECK(total_variation(c) == doctest::Approx(1.0));
}

TEST_CASE("tv argument and numeric checks") {
  const Image d1 = nftest::random_nir(4, 4, 40), d2 = nftest::random_nir(4, 4, 41);
  TVFusionParams p;
  p.lambda = -1.0;
  CHECK_THROWS_AS(tv_bayesian_fusion(d1, d2, p), ArgumentError);
  p = {};
  p.k1 = {1, 1, 1, 1};
  CHECK_THROWS_AS(tv_bayesian_fusion(d1, d2, p), ArgumentError);
  Image nan = d1;
  nan.at(0, 0, 0) = std::nan("");
  CHECK_THROWS_AS(tv_bayesian_fusion(nan, d2, {}), NumericError);
}

TEST_CASE("tv rgb fusion keeps shape and range") {
  const Image rgb = nftest::random_rgb(8, 8, 42), nir = nftest::random_nir(8, 8, 43);
  TVFusionParams p;
  p.iterations = 20;
  const Image out = tv_bayesian_fusion_rgb(rgb, nir, p);
  CHECK(out.same_shape(rgb));
  CHECK(out.kind() == ImageKind::RGB);
  CHECK(all_unit(out));
}
