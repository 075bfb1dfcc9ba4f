#include "nirfuse/lidar.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>
#include <string>

#include "nirfuse/parallel.hpp"

namespace nirfuse {

ProjectedPoints project_points(std::span<const Vec3> points, const CameraModel& cam) {
  cam.validate();
  ProjectedPoints out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Vec3 p = cam.transform(points[i]);
    if (!(p[2] > 0.0) || !std::isfinite(p[0]) || !std::isfinite(p[1]) || !std::isfinite(p[2])) continue;
    const double u = cam.fx * p[0] / p[2] + cam.cx;
    const double v = cam.fy * p[1] / p[2] + cam.cy;
    if (!(u >= 0.0 && u < cam.width && v >= 0.0 && v < cam.height)) continue;
    out.points.push_back({u, v, cam.fx * cam.baseline / p[2]});
    out.depth.push_back(p[2]);
    out.source.push_back(i);
  }
  return out;
}

CameraModel right_camera(const CameraModel& left) {
  CameraModel r = left;
  r.extrinsic[3] -= left.baseline;
  return r;
}

double depth_to_disparity(double z, const CameraModel& cam) {
  if (!(z > 0.0) || !std::isfinite(z)) throw DomainError("depth must be positive and finite");
  return cam.fx * cam.baseline / z;
}

double disparity_to_depth(double d, const CameraModel& cam) {
  if (!(d > 0.0) || !std::isfinite(d)) throw DomainError("disparity must be positive and finite");
  return cam.fx * cam.baseline / d;
}

namespace {

Image reciprocal_map(const Image& src, const CameraModel& cam, ImageKind kind) {
  require_channels(src, 1, "depth/disparity map");
  Image out(src.width(), src.height(), 1, kind);
  const double k = cam.fx * cam.baseline;
  auto s = src.data();
  auto o = out.data();
  for (std::size_t i = 0; i < s.size(); ++i) {
    o[i] = (s[i] > 0.0 && std::isfinite(s[i])) ? k / s[i] : 0.0;
  }
  return out;
}

}  // namespace

Image depth_to_disparity(const Image& depth, const CameraModel& cam) {
  return reciprocal_map(depth, cam, ImageKind::DISPARITY);
}

Image disparity_to_depth(const Image& disparity, const CameraModel& cam) {
  return reciprocal_map(disparity, cam, ImageKind::DEPTH);
}

void RefineParams::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ArgumentError("refine alpha must lie in (0, 1]");
  if (!(beta > 0.0 && beta < 1.0)) throw ArgumentError("refine beta must lie in (0, 1)");
}

std::vector<std::size_t> refine_disparity_indices(const SparseDisparityPoints& pts, const RefineParams& p) {
  p.validate();
  if (pts.empty()) return {};
  double u_min = pts[0].u, u_max = pts[0].u, v_min = pts[0].v, v_max = pts[0].v;
  for (const auto& q : pts) {
    if (!std::isfinite(q.u) || !std::isfinite(q.v) || !std::isfinite(q.d) || !(q.d > 0.0)) {
      throw ArgumentError("sparse points need finite coordinates and positive disparity");
    }
    u_min = std::min(u_min, q.u);
    u_max = std::max(u_max, q.u);
    v_min = std::min(v_min, q.v);
    v_max = std::max(v_max, q.v);
  }

  // Uniform bucket grid over the bounding box; each query scans the cells
  // overlapping its square of half-width alpha * d_i.
  constexpr double cell = 8.0;
  const int gw = static_cast<int>((u_max - u_min) / cell) + 1;
  const int gh = static_cast<int>((v_max - v_min) / cell) + 1;
  std::vector<std::vector<std::size_t>> grid(static_cast<std::size_t>(gw) * gh);
  auto cell_of = [&](double u, double v) {
    return static_cast<std::size_t>(static_cast<int>((v - v_min) / cell)) * gw +
           static_cast<std::size_t>(static_cast<int>((u - u_min) / cell));
  };
  for (std::size_t i = 0; i < pts.size(); ++i) grid[cell_of(pts[i].u, pts[i].v)].push_back(i);

  std::vector<char> removed(pts.size(), 0);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const SparsePoint& a = pts[i];
    const double radius = p.alpha * a.d;
    const double gate = p.beta * a.d;
    const int cx0 = std::max(0, static_cast<int>(std::floor((a.u - radius - u_min) / cell)));
    const int cx1 = std::min(gw - 1, static_cast<int>(std::floor((a.u + radius - u_min) / cell)));
    const int cy0 = std::max(0, static_cast<int>(std::floor((a.v - radius - v_min) / cell)));
    const int cy1 = std::min(gh - 1, static_cast<int>(std::floor((a.v + radius - v_min) / cell)));
    for (int cy = cy0; cy <= cy1 && !removed[i]; ++cy) {
      for (int cx = cx0; cx <= cx1 && !removed[i]; ++cx) {
        for (std::size_t j : grid[static_cast<std::size_t>(cy) * gw + cx]) {
          if (j == i) continue;
          const SparsePoint& b = pts[j];
          const double du = a.u - b.u, dv = a.v - b.v;
          if (std::sqrt(du * du + dv * dv) <= radius && b.d < gate) {
            removed[i] = 1;
            break;
          }
        }
      }
    }
  }
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!removed[i]) kept.push_back(i);
  }
  return kept;
}

SparseDisparityPoints refine_disparity_points(const SparseDisparityPoints& pts, const RefineParams& p) {
  SparseDisparityPoints out;
  for (std::size_t i : refine_disparity_indices(pts, p)) out.push_back(pts[i]);
  return out;
}

Image rasterize_points(const SparseDisparityPoints& pts, int width, int height, double fill) {
  Image out(width, height, 1, ImageKind::DISPARITY, fill);
  Image taken(width, height, 1, ImageKind::MASK);
  for (const auto& q : pts) {
    const long x = std::lround(q.u), y = std::lround(q.v);
    if (x < 0 || y < 0 || x >= width || y >= height) continue;
    double& cur = out.at(0, static_cast<int>(y), static_cast<int>(x));
    double& flag = taken.at(0, static_cast<int>(y), static_cast<int>(x));
    if (flag == 0.0 || q.d > cur) {
      cur = q.d;
      flag = 1.0;
    }
  }
  return out;
}

Image reproject_right_to_left(const Image& d_right, const CameraModel& cam, ReprojectionMode mode) {
  require_channels(d_right, 1, "right disparity");
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const int w = d_right.width();
  Image out(w, d_right.height(), 1, ImageKind::DISPARITY, nan);
  const double scale = mode == ReprojectionMode::LITERAL ? cam.baseline / cam.fx : 1.0;
  parallel_rows(d_right.height(), [&](int y) {
    for (int x = 0; x < w; ++x) {
      const double d = d_right.at(0, y, x);
      if (!std::isfinite(d) || d < 0.0) continue;
      const long xl = std::lround(x + d * scale);
      if (xl < 0 || xl >= w) continue;
      double& cur = out.at(0, y, static_cast<int>(xl));
      if (std::isnan(cur) || d > cur) cur = d;
    }
  });
  return out;
}

Image left_right_consistency_mask(const Image& d_left, const Image& d_right, const CameraModel& cam,
                                  const ConsistencyParams& p) {
  require_channels(d_left, 1, "left disparity");
  if (!d_left.same_shape(d_right)) throw ArgumentError("left/right disparity maps differ in shape");
  if (!(p.threshold >= 0.0)) throw ArgumentError("consistency threshold must be >= 0");
  if (p.mode == ReprojectionMode::LITERAL && !(cam.fx > 0.0)) throw ArgumentError("literal mode needs fx > 0");
  const Image mapped = reproject_right_to_left(d_right, cam, p.mode);
  Image mask(d_left.width(), d_left.height(), 1, ImageKind::MASK);
  auto l = d_left.data(), m = mapped.data();
  auto o = mask.data();
  for (std::size_t i = 0; i < o.size(); ++i) {
    const bool ok = std::isfinite(l[i]) && std::isfinite(m[i]) && std::abs(l[i] - m[i]) <= p.threshold;
    o[i] = ok ? 0.0 : 1.0;
  }
  return mask;
}

WarpResult warp_by_disparity(const Image& img, const Image& disparity, WarpDirection dir) {
  require_channels(disparity, 1, "warp disparity");
  require_same_extent(img, disparity, "warp_by_disparity");
  const int w = img.width();
  WarpResult r{Image(w, img.height(), img.channels(), img.kind()),
               Image(w, img.height(), 1, ImageKind::MASK)};
  const double sign = dir == WarpDirection::MINUS ? -1.0 : 1.0;
  parallel_rows(img.height(), [&](int y) {
    for (int x = 0; x < w; ++x) {
      const double s = x + sign * disparity.at(0, y, x);
      if (!(s >= 0.0 && s <= w - 1)) continue;
      const int x0 = std::min(static_cast<int>(s), w - 1);
      const int x1 = std::min(x0 + 1, w - 1);
      const double t = s - x0;
      for (int c = 0; c < img.channels(); ++c) {
        const double a = img.at(c, y, x0);
        r.image.at(c, y, x) = t == 0.0 ? a : a + t * (img.at(c, y, x1) - a);
      }
      r.mask.at(0, y, x) = 1.0;
    }
  });
  return r;
}

// ---------------------------------------------------------------- point files

namespace {

constexpr char kCloudMagic[4] = {'N', 'F', 'P', 'C'};

std::uint64_t read_le(const std::uint8_t* p, int n) {
  std::uint64_t v = 0;
  for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return v;
}

void write_le(std::vector<std::uint8_t>& out, std::uint64_t v, int n) {
  for (int i = 0; i < n; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::vector<Vec3> parse_binary_cloud(const std::vector<std::uint8_t>& bytes, const std::string& name) {
  if (bytes.size() < 16) throw ParseError("point cloud '" + name + "': truncated header");
  const auto version = read_le(bytes.data() + 4, 4);
  if (version != 1) throw ParseError("point cloud '" + name + "': unsupported version");
  const auto count = read_le(bytes.data() + 8, 8);
  if (count > (bytes.size() - 16) / 12 || bytes.size() != 16 + count * 12) {
    throw ParseError("point cloud '" + name + "': payload size does not match the point count");
  }
  std::vector<Vec3> pts(count);
  const std::uint8_t* p = bytes.data() + 16;
  for (std::uint64_t i = 0; i < count; ++i) {
    for (int k = 0; k < 3; ++k, p += 4) {
      pts[i][k] = std::bit_cast<float>(static_cast<std::uint32_t>(read_le(p, 4)));
    }
  }
  return pts;
}

std::vector<Vec3> parse_text_cloud(const std::string& text, const std::string& name) {
  std::vector<Vec3> pts;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    Vec3 p{};
    std::string extra;
    if (!(ls >> p[0] >> p[1] >> p[2]) || (ls >> extra)) {
      throw ParseError("point cloud '" + name + "' line " + std::to_string(lineno) + ": expected 'x y z'");
    }
    pts.push_back(p);
  }
  return pts;
}

}  // namespace

std::vector<Vec3> load_point_cloud(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open point cloud '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() >= 4 && std::memcmp(bytes.data(), kCloudMagic, 4) == 0) {
    return parse_binary_cloud(bytes, path.string());
  }
  return parse_text_cloud(std::string(bytes.begin(), bytes.end()), path.string());
}

void save_point_cloud_binary(std::span<const Vec3> points, const std::filesystem::path& path) {
  std::vector<std::uint8_t> out(kCloudMagic, kCloudMagic + 4);
  write_le(out, 1, 4);
  write_le(out, points.size(), 8);
  for (const auto& p : points) {
    for (double v : p) write_le(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)), 4);
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!f) throw IoError("write failure on '" + path.string() + "'");
}

void save_sparse_points(const SparseDisparityPoints& pts, const std::filesystem::path& path) {
  std::string text = "# u v d\n";
  char buf[96];
  for (const auto& p : pts) {
    std::snprintf(buf, sizeof buf, "%.9g %.9g %.9g\n", p.u, p.v, p.d);
    text += buf;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  f << text;
  if (!f) throw IoError("write failure on '" + path.string() + "'");
}

}  // namespace nirfuse
