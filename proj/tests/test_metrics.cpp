#include <cmath>
#include <random>

#include "doctest.h"
#include "nirfuse/metrics.hpp"
#include "test_util.hpp"

using namespace nirfuse;

namespace {

Image row(std::initializer_list<double> vals, ImageKind kind = ImageKind::DEPTH) {
  Image img(static_cast<int>(vals.size()), 1, 1, kind);
  int x = 0;
  for (double v : vals) img.at(0, 0, x++) = v;
  return img;
}

}  // namespace

TEST_CASE("mae and rmse") {
  const Image gt = row({1, 1, 1}), pred = row({1, 4, 5});
  CHECK(mae(pred, gt) == doctest::Approx(7.0 / 3.0));
  CHECK(rmse(pred, gt) == doctest::Approx(std::sqrt(25.0 / 3.0)));
  CHECK(mae(gt, gt) == 0.0);
  CHECK(rmse(gt, gt) == 0.0);
  const Image off = row({3, 3, 3});
  CHECK(mae(off, gt) == 2.0);
  CHECK(rmse(off, gt) == 2.0);
  const Image mask = row({1, 0, 1}, ImageKind::MASK);
  CHECK(mae(pred, gt, &mask) == doctest::Approx(2.0));
  const Image none = row({0, 0, 0}, ImageKind::MASK);
  CHECK_THROWS_AS(mae(pred, gt, &none), DomainError);
  CHECK_THROWS_AS(mae(pred, row({1, 2})), ArgumentError);
}

TEST_CASE("mae never exceeds rmse") {
  std::mt19937 rng(1);
  std::uniform_int_distribution<int> len(1, 50);
  for (int t = 0; t < 100; ++t) {
    const int n = len(rng);
    const Image a = nftest::random_image(n, 1, 1, 700 + t, -5, 5), b = nftest::random_image(n, 1, 1, 900 + t, -5, 5);
    CHECK(mae(a, b) <= rmse(a, b) + 1e-15);
  }
}

TEST_CASE("delta accuracy thresholds") {
  const Image gt = row({2, 2, 2, 2});
  const DeltaAccuracy same = delta_accuracy(gt, gt);
  CHECK(same.delta1 == 1.0);
  CHECK(same.delta3 == 1.0);
  const DeltaAccuracy edge = delta_accuracy(row({2.5, 2.5, 2, 2}), gt);  // ratio 1.25 exactly
  CHECK(edge.delta1 == 1.0);
  const DeltaAccuracy far = delta_accuracy(row({4, 4, 4, 4}), gt);
  CHECK(far.delta1 == 0.0);
  CHECK(far.delta2 == 0.0);
  CHECK(far.delta3 == 0.0);
  const DeltaAccuracy mixed = delta_accuracy(row({2, 3, 3.5, 4}), gt);  // 1, 1.5, 1.75, 2
  CHECK(mixed.delta1 == 0.25);
  CHECK(mixed.delta2 == 0.5);
  CHECK(mixed.delta3 == 0.75);
  CHECK_THROWS_AS(delta_accuracy(row({0, 1, 1, 1}), gt), DomainError);
}

TEST_CASE("bad pixel rates use a strict threshold") {
  const Image gt = row({0, 0, 0, 0}, ImageKind::DISPARITY);
  const auto r = bad_pixel_rates(row({0.5, 1.0, 3.0, 4.9}, ImageKind::DISPARITY), gt);
  REQUIRE(r.size() == 3);
  CHECK(r[0] == 0.25);
  CHECK(r[1] == 0.5);
  CHECK(r[2] == 1.0);
}

TEST_CASE("ssim basic properties") {
  const Image a = nftest::random_rgb(20, 16, 2), b = nftest::random_rgb(20, 16, 3);
  CHECK(ssim(a, a) == doctest::Approx(1.0).epsilon(1e-12));
  const double ab = ssim(a, b), ba = ssim(b, a);
  CHECK(ab == doctest::Approx(ba).epsilon(1e-12));
  CHECK(ab < 1.0);
  CHECK(ab >= -1.0);
  CHECK_THROWS_AS(ssim(a, nftest::random_rgb(20, 15, 4)), ArgumentError);
}

TEST_CASE("ssim of two constant images follows the luminance term") {
  const Image a(12, 12, 1, ImageKind::GRAY, 0.3), b(12, 12, 1, ImageKind::GRAY, 0.7);
  const MetricConfig cfg;
  const double expect = (2 * 0.3 * 0.7 + cfg.ssim_c1) / (0.3 * 0.3 + 0.7 * 0.7 + cfg.ssim_c1);
  CHECK(ssim(a, b) == doctest::Approx(expect).epsilon(1e-9));
  CHECK(expect == doctest::Approx(0.724185).epsilon(1e-6));
}

TEST_CASE("ssim on a 1x1 image does not divide by zero") {
  const Image a(1, 1, 1, ImageKind::GRAY, 0.2), b(1, 1, 1, ImageKind::GRAY, 0.2);
  CHECK(ssim(a, b) == doctest::Approx(1.0));
}

TEST_CASE("psnr") {
  const Image a(4, 4, 1, ImageKind::GRAY, 0.5), b(4, 4, 1, ImageKind::GRAY, 0.6);
  CHECK(psnr(a, b) == doctest::Approx(20.0));
  CHECK(std::isinf(psnr(a, a)));
}

TEST_CASE("photometric loss") {
  const MetricConfig cfg;
  CHECK(cfg.gamma_l1 == 0.85);
  CHECK(cfg.gamma_ssim == 0.15);
  const Image a = nftest::random_rgb(16, 16, 5), b = nftest::random_rgb(16, 16, 6);
  CHECK(photometric_loss(a, a) == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  CHECK(photometric_loss(a, b) == doctest::Approx(0.85 * mae(a, b) + 0.15 * (1.0 - ssim(a, b))));
  MetricConfig lit;
  lit.literal_photometric = true;
  CHECK(photometric_loss(a, a, lit) == doctest::Approx(0.15));
}

TEST_CASE("lidar neighbourhood error") {
  Image pred(40, 30, 1, ImageKind::DEPTH, 3.0);
  const LidarSample inside{20.2, 15.4, 2.0};
  const auto e = lidar_neighborhood_error(pred, std::span(&inside, 1));
  CHECK(e.count == 121);
  CHECK(e.sum == doctest::Approx(121.0));
  CHECK(e.mean == doctest::Approx(1.0));
  const LidarSample corner{0.0, 0.0, 3.0};
  const auto c = lidar_neighborhood_error(pred, std::span(&corner, 1));
  CHECK(c.count == 36);
  CHECK(c.sum == 0.0);
  pred.at(0, 15, 20) = NAN;
  CHECK(lidar_neighborhood_error(pred, std::span(&inside, 1)).count == 120);
  MetricConfig r0;
  r0.lidar_radius = 0;
  CHECK(lidar_neighborhood_error(pred, std::span(&corner, 1), r0).count == 1);
  CHECK_THROWS_AS(lidar_neighborhood_error(pred, {}), DomainError);
}

TEST_CASE("pairwise sum") {
  std::vector<double> v(1000, 0.1);
  CHECK(pairwise_sum(v) == doctest::Approx(100.0).epsilon(1e-14));
  CHECK(pairwise_sum(std::vector<double>{}) == 0.0);
  std::vector<double> big{1e16, 1.0, -1e16, 1.0};
  CHECK(pairwise_sum(big) == (((1e16 + 1.0) + -1e16) + 1.0));
}
