#include <cmath>
#include <random>

#include "doctest.h"
#include "nirfuse/attention.hpp"
#include "attention_oracles.hpp"
#include "nirfuse/fusion.hpp"
#include "test_util.hpp"

using namespace nirfuse;
using namespace nftest;

TEST_CASE("conv2d matches padded naive convolution") {
  std::mt19937 rng(1);
  for (int stride : {1, 2}) {
    for (int k : {1, 3, 5}) {
      const Image x = nftest::random_image(7, 8, 3, 50 + k, -1, 1, ImageKind::FEATURE);
      const Conv2d c = random_conv(4, 3, k, rng);
      const Image fast = conv2d(x, c, stride);
      const Image slow = naive_conv(x, c, stride);
      REQUIRE(fast.same_shape(slow));
      CHECK(nftest::max_abs_diff(fast, slow) <= 1e-12);
    }
  }
}

TEST_CASE("conv2d rejects bad shapes") {
  const Image x(4, 4, 2, ImageKind::FEATURE);
  CHECK_THROWS_AS(conv2d(x, Conv2d::zeros(1, 3, 3), 1), ArgumentError);
  CHECK_THROWS_AS(conv2d(x, Conv2d::zeros(1, 2, 2), 1), ArgumentError);
  CHECK_THROWS_AS(conv2d(x, Conv2d::zeros(1, 2, 3), 0), ArgumentError);
}

TEST_CASE("residual block matches naive oracle") {
  std::mt19937 rng(2);
  for (int stride : {1, 2}) {
    const Image x = nftest::random_image(8, 8, 4, 60 + stride, -1, 1, ImageKind::FEATURE);
    const auto blk = random_block(4, 8, rng);
    const Image fast = residual_block_forward(x, blk, stride);
    const Image slow = naive_residual_block(x, blk, stride);
    CHECK(fast.width() == (8 + stride - 1) / stride);
    CHECK(nftest::max_abs_diff(fast, slow) <= 1e-5);
  }
}

TEST_CASE("residual block output size is ceil of input over stride") {
  const Image x(7, 5, 2, ImageKind::FEATURE);
  const Image y = residual_block_forward(x, ResidualBlockParams::zeros(2, 3), 2);
  CHECK(y.width() == 4);
  CHECK(y.height() == 3);
  CHECK(y.channels() == 3);
}

TEST_CASE("instance norm gives zero mean and unit variance") {
  const Image x = nftest::random_image(6, 6, 3, 70, -2, 5, ImageKind::FEATURE);
  const Image y = instance_norm(x, {});
  for (int c = 0; c < 3; ++c) {
    double s = 0, s2 = 0;
    for (double v : y.plane(c)) s += v;
    for (double v : y.plane(c)) s2 += v * v;
    CHECK(s / 36 == doctest::Approx(0.0).epsilon(1e-12).scale(1.0));
    CHECK(s2 / 36 == doctest::Approx(1.0).epsilon(1e-4));
  }
}

TEST_CASE("batch norm uses stored statistics") {
  Image x(1, 1, 1, ImageKind::FEATURE, 3.0);
  BatchNorm bn;
  bn.mean = {1.0};
  bn.var = {4.0};
  bn.gamma = {2.0};
  bn.beta = {0.5};
  bn.eps = 0.0;
  CHECK(batch_norm(x, bn).at(0, 0, 0) == doctest::Approx(2.5));
  CHECK(batch_norm(x, {}).at(0, 0, 0) == doctest::Approx(3.0 / std::sqrt(1.0 + 1e-5)));
}

TEST_CASE("ms-cam matches per-pixel linear oracle") {
  std::mt19937 rng(3);
  for (int c : {4, 8}) {
    const Image x = nftest::random_image(8, 8, c, 80 + c, -1, 1, ImageKind::FEATURE);
    const auto p = random_mscam(c, 2, rng);
    const Image fast = mscam_forward(x, p);
    CHECK(nftest::max_abs_diff(fast, naive_mscam(x, p)) <= 1e-5);
    for (double v : fast.data()) CHECK((v > 0.0 && v < 1.0));
  }
}

TEST_CASE("ms-cam output is strictly inside the unit interval even when saturated") {
  MSCAMParams p = MSCAMParams::zeros(2, 1);
  p.local.conv2.bias = {1000.0, -1000.0};
  const Image out = mscam_forward(Image(2, 2, 2, ImageKind::FEATURE), p);
  CHECK(out.at(0, 0, 0) < 1.0);
  CHECK(out.at(1, 0, 0) > 0.0);
  CHECK_THROWS_AS(MSCAMParams::zeros(6, 4), ArgumentError);
}

TEST_CASE("aff output lies between the attended operands") {
  std::mt19937 rng(4);
  AFFParams p{random_mscam(8, 2, rng), random_mscam(8, 2, rng), random_mscam(8, 2, rng)};
  const Image a = nftest::random_image(6, 5, 8, 90, -2, 2, ImageKind::FEATURE);
  const Image b = nftest::random_image(6, 5, 8, 91, -2, 2, ImageKind::FEATURE);
  const auto r = aff_fuse(a, b, p);
  for (std::size_t i = 0; i < r.fused.size(); ++i) {
    const double lo = std::min(r.attended_rgb.data()[i], r.attended_nir.data()[i]);
    const double hi = std::max(r.attended_rgb.data()[i], r.attended_nir.data()[i]);
    CHECK(r.fused.data()[i] >= lo);
    CHECK(r.fused.data()[i] <= hi);
  }
  // A_v = F_rgb * M_rgb(F_rgb).
  const Image m = naive_mscam(a, p.rgb);
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::abs(r.attended_rgb.data()[i] - a.data()[i] * m.data()[i]));
  CHECK(worst <= 1e-12);
  // Equal operands pass through unchanged.
  const auto same = aff_fuse(a, a, AFFParams{p.rgb, p.rgb, p.fusion});
  CHECK(same.fused == same.attended_rgb);
}

TEST_CASE("bilinear upsampling") {
  Image x(2, 1, 1, ImageKind::FEATURE);
  x.at(0, 0, 0) = 0.0;
  x.at(0, 0, 1) = 1.0;
  const Image up = upsample_bilinear(x, 2);
  REQUIRE(up.width() == 4);
  CHECK(up.at(0, 0, 0) == doctest::Approx(0.0));
  CHECK(up.at(0, 0, 1) == doctest::Approx(0.25));
  CHECK(up.at(0, 0, 2) == doctest::Approx(0.75));
  CHECK(up.at(0, 0, 3) == doctest::Approx(1.0));
  const Image flat(3, 2, 2, ImageKind::FEATURE, 0.7);
  CHECK(nftest::max_abs_diff(upsample_bilinear(flat, 4), Image(12, 8, 2, ImageKind::FEATURE, 0.7)) <= 1e-15);
}

TEST_CASE("zero model learned fusion equals guided hsv 0.5 0.5") {
  const FusionModel model = FusionModel::zeros(3, 8, 2);
  const Image rgb = nftest::random_rgb(16, 12, 92), nir = nftest::random_nir(16, 12, 93);
  const Image learned = learned_image_fusion(rgb, nir, model);
  const Image ref = guided_filter(nir, hsv_constant_fusion(rgb, nir, 0.5, 0.5));
  CHECK(nftest::max_abs_diff(learned, ref) <= 1e-5);
  const auto trace = learned_image_fusion_trace(rgb, nir, model);
  CHECK(trace.f_rgb.width() == 4);
  CHECK(trace.f_rgb.channels() == 8);
  for (double v : trace.weights.alpha.data()) CHECK(v == 0.5);
}

TEST_CASE("learned fusion requires extent divisible by four") {
  const FusionModel model = FusionModel::zeros(3, 4, 2);
  CHECK_THROWS_AS(learned_image_fusion(nftest::random_rgb(10, 8, 1), nftest::random_nir(10, 8, 2), model),
                  ArgumentError);
}

TEST_CASE("weight bundle round trip through the model mapping") {
  std::mt19937 rng(5);
  FusionModel m = FusionModel::zeros(3, 4, 2);
  m.encoder.blocks[0] = random_block(3, 4, rng);
  m.aff.nir = random_mscam(4, 2, rng);
  m.decoder.head = random_conv(2, 4, 3, rng);
  const WeightBundle b = m.to_bundle();
  const WeightBundle parsed = WeightBundle::parse(b.serialize());
  const FusionModel back = FusionModel::from_bundle(parsed);
  CHECK(back.to_bundle().serialize() == b.serialize());
  const Image rgb = nftest::random_rgb(8, 8, 94), nir = nftest::random_nir(8, 8, 95);
  FusionModel rounded = FusionModel::from_bundle(b);
  CHECK(learned_image_fusion(rgb, nir, back) == learned_image_fusion(rgb, nir, rounded));
}

TEST_CASE("weight bundle parse errors") {
  CHECK_THROWS_AS(WeightBundle::parse(std::vector<std::uint8_t>{'N', 'F', 'W'}), ParseError);
  CHECK_THROWS_AS(WeightBundle::parse(std::vector<std::uint8_t>{'X', 'F', 'W', '1'}), ParseError);
  WeightBundle b = FusionModel::zeros(3, 4, 2).to_bundle();
  auto bytes = b.serialize();
  bytes.resize(bytes.size() - 3);
  CHECK_THROWS_AS(WeightBundle::parse(bytes), ParseError);

  WeightBundle missing;
  for (const auto& [name, t] : b.tensors())
    if (name != "decoder.head.weight") missing.set(name, t);
  CHECK_THROWS_AS(FusionModel::from_bundle(missing), ParseError);

  WeightBundle wrong = b;
  Tensor t = b.get("aff.rgb.local.conv1.weight");
  t.dims = {static_cast<std::uint32_t>(t.numel())};
  wrong.set("aff.rgb.local.conv1.weight", t);
  CHECK_THROWS_AS(FusionModel::from_bundle(wrong), ParseError);
}
