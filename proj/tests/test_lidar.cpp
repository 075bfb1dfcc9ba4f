#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "nirfuse/camera.hpp"
#include "nirfuse/lidar.hpp"
#include "test_util.hpp"

using namespace nirfuse;
namespace fs = std::filesystem;

namespace {

CameraModel rig(double fx = 500.0, int w = 640, int h = 480) {
  CameraModel c;
  c.fx = fx;
  c.fy = fx;
  c.cx = w / 2.0;
  c.cy = h / 2.0;
  c.width = w;
  c.height = h;
  return c;
}

fs::path temp_path(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "nirfuse_tests";
  fs::create_directories(dir);
  return dir / name;
}

// Algorithm 1 with every pair compared directly.
std::vector<std::size_t> brute_refine(const SparseDisparityPoints& pts, double alpha, double beta) {
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    bool drop = false;
    for (std::size_t j = 0; j < pts.size() && !drop; ++j) {
      if (i == j) continue;
      const double dist = std::hypot(pts[i].u - pts[j].u, pts[i].v - pts[j].v);
      drop = dist <= alpha * pts[i].d && pts[j].d < beta * pts[i].d;
    }
    if (!drop) kept.push_back(i);
  }
  return kept;
}

Image row_map(std::initializer_list<double> vals) {
  Image img(static_cast<int>(vals.size()), 1, 1, ImageKind::DISPARITY);
  int x = 0;
  for (double v : vals) img.at(0, 0, x++) = v;
  return img;
}

}  // namespace

TEST_CASE("projection of the optical axis point") {
  const Vec3 p{0, 0, 5};
  const auto out = project_points(std::span(&p, 1), rig());
  REQUIRE(out.points.size() == 1);
  CHECK(out.points[0].u == 320.0);
  CHECK(out.points[0].v == 240.0);
  CHECK(out.depth[0] == 5.0);
  CHECK(out.points[0].d == doctest::Approx(500.0 * 0.133 / 5.0));
}

TEST_CASE("projection drops points behind the camera and outside the frame") {
  const std::vector<Vec3> pts{{0, 0, -1}, {0, 0, 0}, {100, 0, 1}, {0, 0, 2}, {NAN, 0, 3}};
  const auto out = project_points(pts, rig());
  REQUIRE(out.points.size() == 1);
  CHECK(out.source[0] == 3);
}

TEST_CASE("projection with a rotated extrinsic matches hand arithmetic") {
  CameraModel cam = rig();
  cam.fy = 400.0;
  // R maps (x, y, z) to (z, y, -x); t = (0.1, 0.2, 0.3).
  cam.extrinsic = {0, 0, 1, 0.1, 0, 1, 0, 0.2, -1, 0, 0, 0.3};
  const Vec3 p{-4, 1, 2};  // camera frame (2.1, 1.2, 4.3)
  const auto out = project_points(std::span(&p, 1), cam);
  REQUIRE(out.points.size() == 1);
  CHECK(out.points[0].u == doctest::Approx(564.186046511628));
  CHECK(out.points[0].v == doctest::Approx(351.627906976744));
  CHECK(out.depth[0] == doctest::Approx(4.3));
}

TEST_CASE("right camera sees points shifted by the baseline") {
  const CameraModel left = rig();
  const CameraModel right = right_camera(left);
  const Vec3 p{0.3, -0.1, 4.0};
  const auto l = project_points(std::span(&p, 1), left);
  const auto r = project_points(std::span(&p, 1), right);
  REQUIRE(l.points.size() == 1);
  REQUIRE(r.points.size() == 1);
  CHECK(l.points[0].u - r.points[0].u == doctest::Approx(l.points[0].d));
  CHECK(l.points[0].v == doctest::Approx(r.points[0].v));
}

TEST_CASE("depth and disparity conversion") {
  CameraModel cam = rig(700.0);
  CHECK(depth_to_disparity(9.31, cam) == doctest::Approx(10.0).epsilon(1e-12));
  double prev = 1e9;
  for (double z = 1.0; z < 1000.0; z *= 2.0) {
    const double d = depth_to_disparity(z, cam);
    CHECK(d < prev);
    prev = d;
    CHECK(std::abs(disparity_to_depth(d, cam) - z) <= 1e-9 * z);
  }
  CHECK_THROWS_AS(depth_to_disparity(0.0, cam), DomainError);
  CHECK_THROWS_AS(depth_to_disparity(-1.0, cam), DomainError);
  CHECK_THROWS_AS(disparity_to_depth(std::nan(""), cam), DomainError);
  const Image depth = row_map({2.0, 0.0, -1.0, 7.0});
  const Image d = depth_to_disparity(depth, cam);
  CHECK(d.at(0, 0, 0) == doctest::Approx(700 * 0.133 / 2.0));
  CHECK(d.at(0, 0, 1) == 0.0);
  CHECK(d.at(0, 0, 2) == 0.0);
  CHECK(d.kind() == ImageKind::DISPARITY);
}

TEST_CASE("refinement worked two-point trace") {
  const SparseDisparityPoints pts{{10, 10, 8}, {12, 10, 4}};
  const auto kept = refine_disparity_indices(pts, {0.75, 0.85});
  REQUIRE(kept.size() == 1);
  CHECK(kept[0] == 1);
}

TEST_CASE("refinement trivial cases") {
  CHECK(refine_disparity_points({{5, 5, 3}}).size() == 1);
  CHECK(refine_disparity_points({}).empty());
  SparseDisparityPoints same;
  for (int i = 0; i < 20; ++i) same.push_back({static_cast<double>(i), 0.0, 6.0});
  CHECK(refine_disparity_points(same).size() == 20);
  // Neighbour just outside the radius keeps the far point.
  CHECK(refine_disparity_points({{0, 0, 8}, {6.000001, 0, 1}}).size() == 2);
  CHECK(refine_disparity_points({{0, 0, 8}, {6.0, 0, 1}}).size() == 1);
  CHECK_THROWS_AS(refine_disparity_points({{0, 0, 1}}, {0.0, 0.85}), ArgumentError);
  CHECK_THROWS_AS(refine_disparity_points({{0, 0, 1}}, {0.75, 1.0}), ArgumentError);
  CHECK_THROWS_AS(refine_disparity_points({{0, 0, -1}}), ArgumentError);
}

TEST_CASE("refinement matches brute force and ignores input order") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> pos(0.0, 60.0), disp(0.5, 20.0);
  for (int trial = 0; trial < 10; ++trial) {
    SparseDisparityPoints pts(300);
    for (auto& p : pts) p = {pos(rng), pos(rng), disp(rng)};
    const auto fast = refine_disparity_indices(pts);
    CHECK(fast == brute_refine(pts, 0.75, 0.85));

    std::vector<std::size_t> perm(pts.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    SparseDisparityPoints shuffled;
    for (std::size_t i : perm) shuffled.push_back(pts[i]);
    std::vector<std::size_t> mapped;
    for (std::size_t k : refine_disparity_indices(shuffled)) mapped.push_back(perm[k]);
    std::sort(mapped.begin(), mapped.end());
    CHECK(mapped == fast);
  }
}

TEST_CASE("rasterize keeps the nearer point") {
  const Image r = rasterize_points({{1.2, 0.4, 3}, {0.8, 0.1, 5}, {2.6, 1.0, 2}}, 4, 2, -1.0);
  CHECK(r.at(0, 0, 1) == 5.0);
  CHECK(r.at(0, 1, 3) == 2.0);
  CHECK(r.at(0, 0, 0) == -1.0);
  CHECK(rasterize_points({{9, 9, 1}}, 4, 2).at(0, 1, 3) == 0.0);
}

TEST_CASE("consistency of identical constant maps") {
  const CameraModel cam = rig(100.0, 10, 1);
  Image d(10, 1, 1, ImageKind::DISPARITY, 2.0);
  const Image mask = left_right_consistency_mask(d, d, cam);
  for (int x = 0; x < 10; ++x) CHECK(mask.at(0, 0, x) == (x < 2 ? 1.0 : 0.0));
}

TEST_CASE("consistency flags a disparity jump beyond threshold") {
  const CameraModel cam = rig(100.0, 6, 1);
  const Image left = row_map({1, 1, 1, 1, 1, 1});
  Image right = row_map({1, 1, 3, 1, 1, 1});
  const Image mask = left_right_consistency_mask(left, right, cam, {1.0, ReprojectionMode::PIXEL});
  // right x=2 with d=3 lands on left x=5 and beats the d=1 sample from x=4.
  CHECK(mask.at(0, 0, 5) == 1.0);
  CHECK(mask.at(0, 0, 2) == 0.0);
  CHECK(mask.at(0, 0, 3) == 1.0);  // its source moved away
  CHECK(mask.at(0, 0, 0) == 1.0);
  const Image nan_left = row_map({NAN, 1, 1, 1, 1, 1});
  CHECK(left_right_consistency_mask(nan_left, row_map({1, 1, 1, 1, 1, 1}), cam).at(0, 0, 1) == 0.0);
}

TEST_CASE("two-plane occlusion band") {
  // Background d = 5, a foreground strip with d = 10 at left columns 20..29.
  const int w = 64;
  const CameraModel cam = rig(100.0, w, 1);
  Image left(w, 1, 1, ImageKind::DISPARITY, 5.0), right(w, 1, 1, ImageKind::DISPARITY, NAN);
  for (int x = 20; x < 30; ++x) left.at(0, 0, x) = 10.0;
  for (int x = 0; x < w; ++x) {
    const int xr = x - static_cast<int>(left.at(0, 0, x));
    if (xr < 0) continue;
    if (std::isnan(right.at(0, 0, xr)) || right.at(0, 0, xr) < left.at(0, 0, x)) right.at(0, 0, xr) = left.at(0, 0, x);
  }
  const Image mask = left_right_consistency_mask(left, right, cam);
  int band_start = -1, band_len = 0;
  for (int x = 5; x < w; ++x) {
    if (mask.at(0, 0, x) == 1.0) {
      if (band_start < 0) band_start = x;
      ++band_len;
    }
  }
  CHECK(band_start == 15);
  CHECK(std::abs(band_len - 5) <= 1);
}

TEST_CASE("literal reprojection scales disparity by baseline over fx") {
  CameraModel cam = rig(1.0, 8, 1);
  cam.baseline = 2.0;  // offset = 2 d
  const Image right = row_map({1, NAN, NAN, NAN, NAN, NAN, NAN, NAN});
  const Image lit = reproject_right_to_left(right, cam, ReprojectionMode::LITERAL);
  CHECK(lit.at(0, 0, 2) == 1.0);
  CHECK(std::isnan(lit.at(0, 0, 1)));
  const Image pix = reproject_right_to_left(right, cam, ReprojectionMode::PIXEL);
  CHECK(pix.at(0, 0, 1) == 1.0);
}

TEST_CASE("warp by disparity") {
  Image ramp(12, 2, 1, ImageKind::GRAY);
  for (int y = 0; y < 2; ++y)
    for (int x = 0; x < 12; ++x) ramp.at(0, y, x) = 0.1 * x + y;

  const auto id = warp_by_disparity(ramp, Image(12, 2, 1, ImageKind::DISPARITY, 0.0));
  CHECK(id.image == ramp);
  for (double v : id.mask.data()) CHECK(v == 1.0);

  const auto shifted = warp_by_disparity(ramp, Image(12, 2, 1, ImageKind::DISPARITY, 3.0));
  for (int x = 0; x < 12; ++x) {
    CHECK(shifted.mask.at(0, 1, x) == (x >= 3 ? 1.0 : 0.0));
    if (x >= 3) CHECK(std::abs(shifted.image.at(0, 1, x) - (0.1 * (x - 3) + 1)) <= 1e-6);
  }
  const auto frac = warp_by_disparity(ramp, Image(12, 2, 1, ImageKind::DISPARITY, 2.25), WarpDirection::PLUS);
  CHECK(std::abs(frac.image.at(0, 0, 4) - 0.1 * 6.25) <= 1e-12);
  CHECK(frac.mask.at(0, 0, 10) == 0.0);

  const auto gone = warp_by_disparity(ramp, Image(12, 2, 1, ImageKind::DISPARITY, 13.0));
  for (double v : gone.mask.data()) CHECK(v == 0.0);
}

TEST_CASE("point cloud files") {
  const std::vector<Vec3> pts{{1.5, -2.0, 3.25}, {0, 0, 10}};
  const fs::path bin = temp_path("cloud.bin");
  save_point_cloud_binary(pts, bin);
  CHECK(fs::file_size(bin) == 16 + 2 * 12);
  CHECK(load_point_cloud(bin) == pts);

  const fs::path txt = temp_path("cloud.txt");
  std::ofstream(txt) << "# comment\n1.5 -2 3.25\n\n0 0 10\n";
  CHECK(load_point_cloud(txt) == pts);
  std::ofstream(txt) << "1 2\n";
  CHECK_THROWS_AS(load_point_cloud(txt), ParseError);

  std::ifstream in(bin, std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::ofstream(bin, std::ios::binary) << bytes.substr(0, bytes.size() - 4);
  CHECK_THROWS_AS(load_point_cloud(bin), ParseError);
  CHECK_THROWS_AS(load_point_cloud(temp_path("nope.bin")), IoError);

  const fs::path sp = temp_path("sparse.txt");
  save_sparse_points({{1.0, 2.5, 1.0 / 3.0}}, sp);
  std::ifstream s(sp);
  std::stringstream ss;
  ss << s.rdbuf();
  CHECK(ss.str().find("1 2.5 0.333333333") != std::string::npos);
}

TEST_CASE("camera json") {
  const std::string text =
      R"({"version": 1, "fx": 700, "fy": 701, "cx": 320, "cy": 240, "width": 640, "height": 480, "baseline": 0.12})";
  const CameraModel cam = parse_camera_json(text);
  CHECK(cam.fx == 700.0);
  CHECK(cam.fy == 701.0);
  CHECK(cam.baseline == 0.12);
  CHECK(cam.extrinsic[0] == 1.0);
  const CameraModel back = parse_camera_json(camera_to_json(cam));
  CHECK(back.extrinsic == cam.extrinsic);
  CHECK(back.cy == cam.cy);
  CHECK_THROWS_AS(parse_camera_json(R"({"fx": 700, "fy": 1, "cx": 0, "cy": 0, "width": 1, "height": 1})"),
                  ParseError);
  CHECK_THROWS_AS(parse_camera_json(text.substr(0, text.size() - 1) + R"(, "skew": 0})"), ParseError);
  CHECK_THROWS_AS(
      parse_camera_json(R"({"version": 1, "fx": -1, "fy": 1, "cx": 0, "cy": 0, "width": 1, "height": 1})"),
      ParseError);
  CHECK_THROWS_AS(parse_camera_json(
                      R"({"version": 1, "fx": 1, "fy": 1, "cx": 0, "cy": 0, "width": 1, "height": 1,
                          "extrinsic": [2, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0]})"),
                  ParseError);
  CHECK_THROWS_AS(load_camera(temp_path("no_camera.json")), IoError);
}
