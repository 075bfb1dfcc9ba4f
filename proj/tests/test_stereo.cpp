#include <cmath>

#include "doctest.h"
#include "nirfuse/filters.hpp"
#include "nirfuse/stereo.hpp"
#include "test_util.hpp"

using namespace nirfuse;

namespace {

Image strip(std::initializer_list<double> vals) {
  Image img(static_cast<int>(vals.size()), 1, 1, ImageKind::FEATURE);
  int x = 0;
  for (double v : vals) img.at(0, 0, x++) = v;
  return img;
}

// Smoothed noise so that matching windows are distinctive.
Image texture(int w, int h, std::uint32_t seed) {
  return gaussian_blur(nftest::random_image(w, h, 1, seed, 0.0, 1.0, ImageKind::GRAY), 3, 0.8);
}

// right(x) = left(x + shift); the columns that fall off the edge repeat
// the last sample.
Image shift_left(const Image& img, int shift) {
  Image out = img;
  for (int c = 0; c < img.channels(); ++c)
    for (int y = 0; y < img.height(); ++y)
      for (int x = 0; x < img.width(); ++x) out.at(c, y, x) = img.at(c, y, std::min(img.width() - 1, x + shift));
  return out;
}

Image gray_to_rgb(const Image& g) {
  const Image planes[] = {g, g, g};
  return stack_channels(planes, ImageKind::RGB);
}

}  // namespace

TEST_CASE("correlation on a 4x1 strip by hand") {
  const Image l = strip({1, 2, 3, 4}), r = strip({5, 6, 7, 8});
  const CorrVolume v = correlation_volume(l, r, 2);
  CHECK(v.at(0, 0, 0) == 5.0);
  CHECK(v.at(0, 1, 0) == 12.0);
  CHECK(v.at(0, 2, 0) == 21.0);
  CHECK(v.at(0, 3, 0) == 32.0);
  CHECK(v.at(0, 0, 1) == -INFINITY);
  CHECK(v.at(0, 1, 1) == 10.0);
  CHECK(v.at(0, 2, 1) == 18.0);
  CHECK(v.at(0, 3, 1) == 28.0);
  const CorrVolume plus = correlation_volume(l, r, 2, ShiftSign::PLUS);
  CHECK(plus.at(0, 0, 1) == 6.0);
  CHECK(plus.at(0, 3, 1) == -INFINITY);
}

TEST_CASE("self correlation peaks at zero for unit-norm features") {
  Image f = nftest::random_image(16, 4, 3, 600, -1, 1, ImageKind::FEATURE);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 16; ++x) {
      double n = 0;
      for (int c = 0; c < 3; ++c) n += f.at(c, y, x) * f.at(c, y, x);
      for (int c = 0; c < 3; ++c) f.at(c, y, x) /= std::sqrt(n);
    }
  const CorrVolume v = correlation_volume(f, f, 5);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 16; ++x) {
      CHECK(v.at(y, x, 0) == doctest::Approx(1.0));
      for (int k = 1; k < 5; ++k) CHECK(v.at(y, x, k) <= v.at(y, x, 0) + 1e-12);
    }
}

TEST_CASE("zero shift entry is the squared feature norm") {
  const Image f = nftest::random_image(9, 5, 4, 601, -2, 2, ImageKind::FEATURE);
  const CorrVolume v = correlation_volume(f, f, 3);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 9; ++x) {
      double n = 0;
      for (int c = 0; c < 4; ++c) n += f.at(c, y, x) * f.at(c, y, x);
      CHECK(std::abs(v.at(y, x, 0) - n) <= 1e-6);
    }
}

TEST_CASE("correlation is linear in the right features") {
  const Image l = nftest::random_image(10, 3, 2, 602, -1, 1, ImageKind::FEATURE);
  Image r = nftest::random_image(10, 3, 2, 603, -1, 1, ImageKind::FEATURE);
  const CorrVolume a = correlation_volume(l, r, 4);
  for (double& x : r.data()) x *= 2.5;
  const CorrVolume b = correlation_volume(l, r, 4);
  for (int y = 0; y < 3; ++y)
    for (int x = 0; x < 10; ++x)
      for (int k = 0; k < 4; ++k) {
        if (std::isinf(a.at(y, x, k))) {
          CHECK(std::isinf(b.at(y, x, k)));
        } else {
          CHECK(b.at(y, x, k) == doctest::Approx(2.5 * a.at(y, x, k)));
        }
      }
}

TEST_CASE("correlation argument checks") {
  const Image a(5, 2, 1, ImageKind::FEATURE), b(6, 2, 1, ImageKind::FEATURE);
  CHECK_THROWS_AS(correlation_volume(a, b, 2), ArgumentError);
  CHECK_THROWS_AS(correlation_volume(a, a, 5), ArgumentError);
  CHECK_THROWS_AS(correlation_volume(a, a, 0), ArgumentError);
}

TEST_CASE("wta on a single volume is the plain argmax") {
  CorrVolume v(3, 1, 4);
  const double vals[3][4] = {{0.1, 0.5, 0.2, 0.0}, {0.3, 0.3, 0.1, 0.0}, {-1, -2, -3, 4}};
  for (int x = 0; x < 3; ++x)
    for (int k = 0; k < 4; ++k) v.at(0, x, k) = vals[x][k];
  const std::map<VolumeTag, CorrVolume> vols{{VolumeTag::FUSION, v}};
  const Image d = wta_disparity(vols, {VolumeTag::FUSION}, 1, {0, false});
  CHECK(d.at(0, 0, 0) == 1.0);
  CHECK(d.at(0, 0, 1) == 0.0);  // tie goes to the smaller k
  CHECK(d.at(0, 0, 2) == 3.0);
  // Vertex of the parabola through (0, 0.1), (1, 0.5), (2, 0.2).
  const Image s = wta_disparity(vols, {VolumeTag::FUSION}, 1, {0, true});
  CHECK(s.at(0, 0, 0) == doctest::Approx(1.0 + 0.5 * (0.1 - 0.2) / (0.1 - 1.0 + 0.2)));
  CHECK(s.at(0, 0, 2) == 3.0);
}

TEST_CASE("wta accumulation identity and scale invariance") {
  const Image l = nftest::random_image(20, 6, 2, 604, -1, 1, ImageKind::FEATURE);
  const Image r = nftest::random_image(20, 6, 2, 605, -1, 1, ImageKind::FEATURE);
  const Image l2 = nftest::random_image(20, 6, 2, 606, -1, 1, ImageKind::FEATURE);
  const CorrVolume a = correlation_volume(l, r, 6), b = correlation_volume(l2, r, 6);
  CorrVolume sum = a;
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 20; ++x)
      for (int k = 0; k < 6; ++k) sum.at(y, x, k) += b.at(y, x, k);
  const std::map<VolumeTag, CorrVolume> vols{{VolumeTag::FUSION, a}, {VolumeTag::NIR, b}};
  const std::map<VolumeTag, CorrVolume> summed{{VolumeTag::RGB, sum}};
  const WTAParams p{0, false};
  CHECK(wta_disparity(vols, {VolumeTag::FUSION, VolumeTag::NIR}, 2, p) ==
        wta_disparity(summed, {VolumeTag::RGB}, 1, p));
  // Rounds cycle through the schedule: three rounds add FUSION twice.
  CorrVolume three = sum;
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 20; ++x)
      for (int k = 0; k < 6; ++k) three.at(y, x, k) += a.at(y, x, k);
  CHECK(wta_disparity(vols, {VolumeTag::FUSION, VolumeTag::NIR}, 3, p) ==
        wta_disparity({{VolumeTag::RGB, three}}, {VolumeTag::RGB}, 1, p));

  CorrVolume scaled_a = a, scaled_b = b;
  for (int y = 0; y < 6; ++y)
    for (int x = 0; x < 20; ++x)
      for (int k = 0; k < 6; ++k) {
        scaled_a.at(y, x, k) *= 4.0;
        scaled_b.at(y, x, k) *= 4.0;
      }
  const std::map<VolumeTag, CorrVolume> scaled{{VolumeTag::FUSION, scaled_a}, {VolumeTag::NIR, scaled_b}};
  CHECK(wta_disparity(scaled, {VolumeTag::FUSION, VolumeTag::NIR}, 2, p) ==
        wta_disparity(vols, {VolumeTag::FUSION, VolumeTag::NIR}, 2, p));
  CHECK_THROWS_AS(wta_disparity(vols, {VolumeTag::RGB}, 1, p), ArgumentError);
  CHECK_THROWS_AS(wta_disparity(vols, {VolumeTag::FUSION}, 0, p), ArgumentError);
}

TEST_CASE("schedule parsing") {
  CHECK(parse_schedule("fusion,nir") == VolumeSchedule{VolumeTag::FUSION, VolumeTag::NIR});
  CHECK(to_string(parse_schedule("rgb,fusion,nir")) == "rgb,fusion,nir");
  CHECK_THROWS_AS(parse_schedule("fusion,depth"), ArgumentError);
  CHECK_THROWS_AS(parse_schedule(""), ArgumentError);
}

TEST_CASE("feature modes") {
  const Image g = nftest::random_image(8, 8, 1, 607);
  const FeatureMap i = image_to_features(g, FeatureMode::INTENSITY);
  CHECK(i.channels() == 1);
  CHECK(nftest::max_abs_diff(i, g) == 0.0);
  const FeatureMap ig = image_to_features(Image(8, 8, 1, ImageKind::GRAY, 0.4), FeatureMode::INTENSITY_GRAD);
  CHECK(ig.channels() == 3);
  for (int c = 1; c < 3; ++c)
    for (double v : ig.plane(c)) CHECK(v == 0.0);
  const FusionModel zero = FusionModel::zeros(3, 4, 2);
  const FeatureMap enc = image_to_features(g, FeatureMode::ENCODER, &zero.encoder);
  CHECK(enc.width() == 8);
  CHECK(enc.channels() == 4);
  for (double v : enc.data()) CHECK(v == 0.0);
  CHECK_THROWS_AS(image_to_features(g, FeatureMode::ENCODER), ArgumentError);
}

TEST_CASE("feature normalization") {
  const Image f = nftest::random_image(12, 12, 2, 608, 0, 5, ImageKind::FEATURE);
  const FeatureMap n = normalize_features(f, 12);
  // A window covering the whole image: zero mean, variance 1 / C per channel.
  for (int c = 0; c < 2; ++c) {
    double s = 0, s2 = 0;
    for (double v : n.plane(c)) {
      s += v;
      s2 += v * v;
    }
    CHECK(s / 144 == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
    CHECK(s2 / 144 == doctest::Approx(0.5).epsilon(1e-4));
  }
  CHECK(normalize_features(f, 0) == f);
}

TEST_CASE("integer shift is recovered") {
  const int w = 96, h = 48, shift = 3;
  const Image left = texture(w, h, 609), right = shift_left(left, shift);
  DepthParams p;
  p.max_disparity = 8;
  p.subpixel = false;
  const Image d = estimate_disparity({gray_to_rgb(left), left, gray_to_rgb(right), right}, p);
  int good = 0, total = 0;
  for (int y = 0; y < h; ++y)
    for (int x = p.max_disparity; x < w - shift; ++x) {
      ++total;
      good += d.at(0, y, x) == shift;
    }
  CHECK(good >= 0.95 * total);

  // Plain intensity features with no aggregation still find it on most pixels.
  const auto fl = normalize_features(image_to_features(left, FeatureMode::INTENSITY_GRAD), 2);
  const auto fr = normalize_features(image_to_features(right, FeatureMode::INTENSITY_GRAD), 2);
  const std::map<VolumeTag, CorrVolume> vols{{VolumeTag::NIR, correlation_volume(fl, fr, 8)}};
  const Image raw = wta_disparity(vols, {VolumeTag::NIR}, 1, {2, false});
  good = 0;
  for (int y = 0; y < h; ++y)
    for (int x = 8; x < w - shift; ++x) good += raw.at(0, y, x) == shift;
  CHECK(good >= 0.95 * total);
}

TEST_CASE("plus sign convention needs the mirrored pair") {
  const int w = 64, h = 32;
  const Image right = texture(w, h, 610), left = shift_left(right, 2);  // left(x) = right(x + 2)
  DepthParams p;
  p.max_disparity = 6;
  p.subpixel = false;
  p.sign = ShiftSign::PLUS;
  const Image d = estimate_disparity({gray_to_rgb(left), left, gray_to_rgb(right), right}, p);
  int good = 0, total = 0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w - 8; ++x) {
      ++total;
      good += d.at(0, y, x) == 2.0;
    }
  CHECK(good >= 0.95 * total);
}

TEST_CASE("estimate_disparity argument checks") {
  const Image rgb = nftest::random_rgb(16, 8, 611), nir = nftest::random_nir(16, 8, 612);
  DepthParams p;
  p.max_disparity = 16;
  CHECK_THROWS_AS(estimate_disparity({rgb, nir, rgb, nir}, p), ArgumentError);
  p.max_disparity = 4;
  p.fusion = FusionChoice::LEARNED;
  CHECK_THROWS_AS(estimate_disparity({rgb, nir, rgb, nir}, p), ArgumentError);
  p.fusion = FusionChoice::HSV;
  CHECK_THROWS_AS(estimate_disparity({rgb, nir, nir, nir}, p), ArgumentError);
  const FusionModel zero = FusionModel::zeros(3, 4, 2);
  p.fusion = FusionChoice::LEARNED;
  p.model = &zero;
  p.features = FeatureMode::ENCODER;
  const Image d = estimate_disparity({rgb, nir, rgb, nir}, p);
  CHECK(d.width() == 16);
}
