#include "nirfuse/synth.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "json_util.hpp"
#include "nirfuse/image_io.hpp"
#include "nirfuse/parallel.hpp"

namespace nirfuse {

void SensorConfig::validate() const {
  for (double v : {t_rgb, t_nir, g_rgb, g_nir}) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ArgumentError("exposure and gain must be positive");
  }
  for (double v : {sigma_pre, sigma_post}) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ArgumentError("noise sigma must be >= 0");
  }
}

namespace {

bool valid_depth(double z) { return z > 0.0 && std::isfinite(z); }

Vec3 sub(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }

Vec3 point_at(const Image& pts, int y, int x) { return {pts.at(0, y, x), pts.at(1, y, x), pts.at(2, y, x)}; }

// Tangent along one axis: central difference when both neighbours are
// valid, one-sided otherwise. Returns false when neither neighbour is.
bool tangent(const Image& pts, const Image& valid, int y, int x, int dy, int dx, Vec3& t) {
  const int w = pts.width(), h = pts.height();
  const int y0 = y - dy, x0 = x - dx, y1 = y + dy, x1 = x + dx;
  const bool lo = y0 >= 0 && x0 >= 0 && valid.at(0, y0, x0) != 0.0;
  const bool hi = y1 < h && x1 < w && valid.at(0, y1, x1) != 0.0;
  if (lo && hi) {
    t = sub(point_at(pts, y1, x1), point_at(pts, y0, x0));
  } else if (hi) {
    t = sub(point_at(pts, y1, x1), point_at(pts, y, x));
  } else if (lo) {
    t = sub(point_at(pts, y, x), point_at(pts, y0, x0));
  } else {
    return false;
  }
  return true;
}

double lambert(const SurfaceGeometry& geo, int y, int x, const LightSource& light, const LightingOptions& opt) {
  const Vec3 n{geo.normals.at(0, y, x), geo.normals.at(1, y, x), geo.normals.at(2, y, x)};
  const Vec3 l = sub(light.position, point_at(geo.points, y, x));
  const double dist2 = l[0] * l[0] + l[1] * l[1] + l[2] * l[2];
  if (!(dist2 > 0.0)) return 0.0;
  const double cosine = (n[0] * l[0] + n[1] * l[1] + n[2] * l[2]) / std::sqrt(dist2);
  const double e = light.phi * std::max(0.0, cosine);
  return opt.inverse_square ? e / dist2 : e;
}

void check_light(const LightSource& light) {
  if (!(light.phi >= 0.0) || !std::isfinite(light.phi)) throw ArgumentError("light brightness must be >= 0");
  for (double v : light.position) {
    if (!std::isfinite(v)) throw ArgumentError("light position must be finite");
  }
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

double uniform01(std::uint64_t seed, std::uint64_t stream, std::uint64_t index, std::uint64_t k) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ (stream * 0xD1B54A32D192ED03ULL));
  h = splitmix64(h ^ index);
  h = splitmix64(h ^ k);
  return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

int channel_index(SpectralChannel c) { return static_cast<int>(c); }

}  // namespace

SurfaceGeometry surface_geometry(const Image& depth, const CameraModel& cam) {
  require_channels(depth, 1, "depth");
  if (!(cam.fx > 0.0) || !(cam.fy > 0.0)) throw ArgumentError("camera focal lengths must be positive");
  const int w = depth.width(), h = depth.height();
  SurfaceGeometry g{Image(w, h, 3, ImageKind::FEATURE), Image(w, h, 3, ImageKind::NORMAL),
                    Image(w, h, 1, ImageKind::MASK)};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double z = depth.at(0, y, x);
      if (!valid_depth(z)) continue;
      g.points.at(0, y, x) = (x - cam.cx) * z / cam.fx;
      g.points.at(1, y, x) = -(y - cam.cy) * z / cam.fy;
      g.points.at(2, y, x) = -z;
      g.valid.at(0, y, x) = 1.0;
    }
  }
  parallel_rows(h, [&](int y) {
    for (int x = 0; x < w; ++x) {
      if (g.valid.at(0, y, x) == 0.0) continue;
      Vec3 tu{}, tv{};
      if (!tangent(g.points, g.valid, y, x, 0, 1, tu) || !tangent(g.points, g.valid, y, x, 1, 0, tv)) continue;
      Vec3 n{tu[1] * tv[2] - tu[2] * tv[1], tu[2] * tv[0] - tu[0] * tv[2], tu[0] * tv[1] - tu[1] * tv[0]};
      const double len = std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
      if (!(len > 0.0)) continue;
      const double s = (n[2] < 0.0 ? -1.0 : 1.0) / len;
      for (int c = 0; c < 3; ++c) g.normals.at(c, y, x) = n[c] * s;
    }
  });
  return g;
}

Image normal_from_depth(const Image& depth, const CameraModel& cam) { return surface_geometry(depth, cam).normals; }

Image ambient_irradiance(const SurfaceGeometry& geo, std::span<const LightSource> lights,
                         const LightingOptions& opt) {
  for (const auto& l : lights) {
    if (l.kind != LightKind::AMBIENT) throw ArgumentError("ambient_irradiance takes ambient lights only");
    check_light(l);
  }
  const int w = geo.valid.width(), h = geo.valid.height();
  Image e(w, h, 1, ImageKind::GRAY);
  parallel_rows(h, [&](int y) {
    for (int x = 0; x < w; ++x) {
      if (geo.valid.at(0, y, x) == 0.0) continue;
      double sum = 0.0;
      for (const auto& l : lights) sum += lambert(geo, y, x, l, opt);
      e.at(0, y, x) = sum;
    }
  });
  return e;
}

Image active_irradiance(const SurfaceGeometry& geo, const LightSource& light, SpectralChannel channel,
                        const LightingOptions& opt) {
  if (light.kind != LightKind::ACTIVE_NIR) throw ArgumentError("active_irradiance needs an ACTIVE_NIR light");
  check_light(light);
  const int w = geo.valid.width(), h = geo.valid.height();
  Image l(w, h, 1, ImageKind::GRAY);
  if (channel != SpectralChannel::NIR) return l;
  parallel_rows(h, [&](int y) {
    for (int x = 0; x < w; ++x) {
      if (geo.valid.at(0, y, x) != 0.0) l.at(0, y, x) = lambert(geo, y, x, light, opt);
    }
  });
  return l;
}

double gaussian_noise(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  const double u1 = uniform01(seed, stream, index, 0);
  const double u2 = uniform01(seed, stream, index, 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Image apply_sensor(const Image& radiance, const SensorConfig& s, SpectralChannel channel) {
  require_channels(radiance, 1, "radiance");
  s.validate();
  const bool nir = channel == SpectralChannel::NIR;
  const double t = nir ? s.t_nir : s.t_rgb;
  const double g = nir ? s.g_nir : s.g_rgb;
  const std::uint64_t pre_stream = 2 * static_cast<std::uint64_t>(channel_index(channel));
  const std::uint64_t post_stream = pre_stream + 1;
  const int w = radiance.width();
  Image out(w, radiance.height(), 1, nir ? ImageKind::NIR : ImageKind::GRAY);
  parallel_rows(radiance.height(), [&](int y) {
    for (int x = 0; x < w; ++x) {
      const std::uint64_t idx = static_cast<std::uint64_t>(y) * w + x;
      const double eta2 = s.sigma_pre > 0.0 ? s.sigma_pre * gaussian_noise(s.seed, pre_stream, idx) : 0.0;
      const double eta1 = s.sigma_post > 0.0 ? s.sigma_post * gaussian_noise(s.seed, post_stream, idx) : 0.0;
      out.at(0, y, x) = clamp01(eta1 + g * (eta2 + t * radiance.at(0, y, x)));
    }
  });
  return out;
}

Image render_channel(const Image& albedo, const Image& e, const Image& l, const SensorConfig& s,
                     SpectralChannel channel) {
  require_channels(albedo, 1, "albedo");
  require_channels(e, 1, "ambient irradiance");
  require_channels(l, 1, "active irradiance");
  require_same_extent(albedo, e, "render_channel");
  require_same_extent(albedo, l, "render_channel");
  Image radiance(albedo.width(), albedo.height(), 1, ImageKind::GRAY);
  auto a = albedo.data(), ed = e.data(), ld = l.data();
  auto r = radiance.data();
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = a[i] * (ed[i] + ld[i]);
  return apply_sensor(radiance, s, channel);
}

Image pseudo_nir_albedo(const Image& rgb_albedo, const PseudoNirParams& p) {
  require_channels(rgb_albedo, 3, "pseudo_nir_albedo");
  Image out(rgb_albedo.width(), rgb_albedo.height(), 1, ImageKind::NIR);
  auto r = rgb_albedo.plane(0), g = rgb_albedo.plane(1), b = rgb_albedo.plane(2);
  auto o = out.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = clamp01(p.c0 + p.c_r * r[i] + p.c_g * g[i] + p.c_b * b[i]);
  return out;
}

StereoRender render_stereo_scene(const SceneMaps& scene, std::span<const LightSource> lights,
                                 const SensorConfig& s, const LightingOptions& opt) {
  s.validate();
  const CameraModel& cam = scene.camera;
  cam.validate();
  const Image& depth = scene.depth;
  require_channels(depth, 1, "scene depth");
  require_channels(scene.rgb_albedo, 3, "scene albedo");
  require_same_extent(depth, scene.rgb_albedo, "scene albedo");
  if (depth.width() != cam.width || depth.height() != cam.height) {
    throw ArgumentError("scene depth extent differs from the camera model");
  }
  const Image nir_albedo = scene.nir_albedo.empty() ? pseudo_nir_albedo(scene.rgb_albedo) : scene.nir_albedo;
  require_channels(nir_albedo, 1, "scene NIR albedo");
  require_same_extent(depth, nir_albedo, "scene NIR albedo");

  std::vector<LightSource> ambient;
  const LightSource* active = nullptr;
  for (const auto& l : lights) {
    if (l.kind == LightKind::AMBIENT) {
      ambient.push_back(l);
    } else if (active != nullptr) {
      throw ArgumentError("a scene takes at most one ACTIVE_NIR light");
    } else {
      active = &l;
    }
  }

  const SurfaceGeometry geo = surface_geometry(depth, cam);
  const Image e = ambient_irradiance(geo, ambient, opt);
  const Image l_nir = active ? active_irradiance(geo, *active, SpectralChannel::NIR, opt)
                             : Image(depth.width(), depth.height(), 1, ImageKind::GRAY);

  const int w = depth.width(), h = depth.height();
  // Radiance planes R, G, B, NIR of the left view.
  std::vector<Image> left(4, Image(w, h, 1, ImageKind::GRAY));
  for (int c = 0; c < 4; ++c) {
    auto albedo = c < 3 ? scene.rgb_albedo.plane(c) : nir_albedo.plane(0);
    auto ed = e.data(), ld = l_nir.data();
    auto out = left[c].data();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = albedo[i] * (ed[i] + (c == 3 ? ld[i] : 0.0));
  }

  StereoRender r;
  r.disparity = Image(w, h, 1, ImageKind::DISPARITY);
  r.disparity_right = Image(w, h, 1, ImageKind::DISPARITY);
  r.valid_left = Image(w, h, 1, ImageKind::MASK);
  r.holes_right = Image(w, h, 1, ImageKind::MASK, 1.0);
  const double k = cam.fx * cam.baseline;
  for (std::size_t i = 0; i < depth.plane_size(); ++i) {
    const double z = depth.data()[i];
    if (geo.valid.data()[i] != 0.0) r.disparity.data()[i] = k / z;
  }

  std::vector<Image> right(4, Image(w, h, 1, ImageKind::GRAY));
  const double lowest = -std::numeric_limits<double>::infinity();
  Image zbuf(w, h, 1, ImageKind::DISPARITY, lowest);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (geo.valid.at(0, y, x) == 0.0) continue;
      const double d = r.disparity.at(0, y, x);
      const long xr = std::lround(x - d);
      if (xr < 0 || xr >= w) continue;
      const int xi = static_cast<int>(xr);
      if (d <= zbuf.at(0, y, xi)) continue;
      zbuf.at(0, y, xi) = d;
      for (int c = 0; c < 4; ++c) right[c].at(0, y, xi) = left[c].at(0, y, x);
      r.disparity_right.at(0, y, xi) = d;
      r.holes_right.at(0, y, xi) = 0.0;
    }
  }
  // A left pixel counts as visible when nothing more than half a pixel
  // nearer landed on its right-view location.
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (geo.valid.at(0, y, x) == 0.0) continue;
      const double d = r.disparity.at(0, y, x);
      const long xr = std::lround(x - d);
      if (xr < 0 || xr >= w) continue;
      if (zbuf.at(0, y, static_cast<int>(xr)) - d <= 0.5) r.valid_left.at(0, y, x) = 1.0;
    }
  }

  const SpectralChannel chans[4] = {SpectralChannel::R, SpectralChannel::G, SpectralChannel::B,
                                    SpectralChannel::NIR};
  std::vector<Image> sl, sr;
  for (int c = 0; c < 3; ++c) {
    sl.push_back(apply_sensor(left[c], s, chans[c]));
    sr.push_back(apply_sensor(right[c], s, chans[c]));
  }
  r.rgb_left = stack_channels(sl, ImageKind::RGB);
  r.rgb_right = stack_channels(sr, ImageKind::RGB);
  r.nir_left = apply_sensor(left[3], s, SpectralChannel::NIR);
  r.nir_right = apply_sensor(right[3], s, SpectralChannel::NIR);
  return r;
}

// ---------------------------------------------------------------- scene files

namespace {

Image load_relative(const std::filesystem::path& base, const std::string& rel) {
  std::filesystem::path p(rel);
  if (p.is_relative()) p = base / p;
  return load_image(p);
}

void require_unit_range(const Image& img, const char* what) {
  for (double v : img.data()) {
    if (!(v >= 0.0 && v <= 1.0)) throw ParseError(std::string("scene: ") + what + " must lie in [0, 1]");
  }
}

}  // namespace

SceneConfig load_scene_config(const std::filesystem::path& path) {
  using detail::json;
  const json j = detail::parse_json(detail::read_text_file(path), "scene");
  constexpr std::string_view what = "scene";
  detail::require_object(j, what);
  detail::reject_unknown_keys(
      j, {"version", "depth", "albedo", "nir_albedo", "nir_params", "falloff", "lights", "sensor", "camera"}, what);
  detail::check_version(j, what, true);
  const std::filesystem::path base = path.parent_path();

  SceneConfig cfg;
  if (!j.contains("camera")) throw ParseError("scene: missing key 'camera'");
  cfg.maps.camera = detail::camera_from_json(j.at("camera"));

  if (j.contains("falloff")) {
    const std::string f = detail::get_string(j, "falloff", what);
    if (f == "inverse_square") {
      cfg.lighting.inverse_square = true;
    } else if (f != "none") {
      throw ParseError("scene: falloff must be 'none' or 'inverse_square'");
    }
  }

  if (!j.contains("lights") || !j.at("lights").is_array()) throw ParseError("scene: 'lights' must be an array");
  int active = 0;
  for (const auto& lj : j.at("lights")) {
    constexpr std::string_view lw = "scene light";
    detail::require_object(lj, lw);
    detail::reject_unknown_keys(lj, {"pos", "phi", "kind"}, lw);
    LightSource light;
    if (!lj.contains("pos") || !lj.at("pos").is_array() || lj.at("pos").size() != 3) {
      throw ParseError("scene light: 'pos' must hold 3 numbers");
    }
    for (int i = 0; i < 3; ++i) {
      if (!lj.at("pos")[i].is_number()) throw ParseError("scene light: 'pos' must hold 3 numbers");
      light.position[i] = lj.at("pos")[i].get<double>();
    }
    light.phi = detail::get_number(lj, "phi", lw);
    if (!(light.phi >= 0.0)) throw ParseError("scene light: phi must be >= 0");
    const std::string kind = detail::get_string(lj, "kind", lw);
    if (kind == "ambient") {
      light.kind = LightKind::AMBIENT;
    } else if (kind == "active_nir") {
      light.kind = LightKind::ACTIVE_NIR;
      ++active;
    } else {
      throw ParseError("scene light: kind must be 'ambient' or 'active_nir'");
    }
    cfg.lights.push_back(light);
  }
  if (active != 1) throw ParseError("scene: exactly one active_nir light is required");

  if (!j.contains("sensor")) throw ParseError("scene: missing key 'sensor'");
  {
    const json& sj = j.at("sensor");
    constexpr std::string_view sw = "scene sensor";
    detail::require_object(sj, sw);
    detail::reject_unknown_keys(sj, {"t_rgb", "t_nir", "g_rgb", "g_nir", "sigma_pre", "sigma_post", "seed"}, sw);
    SensorConfig& s = cfg.sensor;
    s.t_rgb = detail::get_number(sj, "t_rgb", s.t_rgb, sw);
    s.t_nir = detail::get_number(sj, "t_nir", s.t_nir, sw);
    s.g_rgb = detail::get_number(sj, "g_rgb", s.g_rgb, sw);
    s.g_nir = detail::get_number(sj, "g_nir", s.g_nir, sw);
    s.sigma_pre = detail::get_number(sj, "sigma_pre", s.sigma_pre, sw);
    s.sigma_post = detail::get_number(sj, "sigma_post", s.sigma_post, sw);
    if (sj.contains("seed")) {
      if (!sj.at("seed").is_number_unsigned()) throw ParseError("scene sensor: 'seed' must be a non-negative integer");
      s.seed = sj.at("seed").get<std::uint64_t>();
    }
    try {
      s.validate();
    } catch (const ArgumentError& e) {
      throw ParseError(std::string("scene sensor: ") + e.what());
    }
  }

  cfg.maps.depth = load_relative(base, detail::get_string(j, "depth", what));
  if (cfg.maps.depth.channels() != 1) throw ParseError("scene: depth map must have one channel");
  cfg.maps.depth.set_kind(ImageKind::DEPTH);
  cfg.maps.rgb_albedo = load_relative(base, detail::get_string(j, "albedo", what));
  if (cfg.maps.rgb_albedo.channels() != 3) throw ParseError("scene: albedo must have three channels");
  cfg.maps.rgb_albedo.set_kind(ImageKind::RGB);
  require_unit_range(cfg.maps.rgb_albedo, "albedo");
  if (j.contains("nir_albedo")) {
    if (j.contains("nir_params")) throw ParseError("scene: give either nir_albedo or nir_params");
    cfg.maps.nir_albedo = load_relative(base, detail::get_string(j, "nir_albedo", what));
    if (cfg.maps.nir_albedo.channels() != 1) throw ParseError("scene: NIR albedo must have one channel");
    require_unit_range(cfg.maps.nir_albedo, "NIR albedo");
  } else {
    PseudoNirParams p;
    if (j.contains("nir_params")) {
      const json& pj = j.at("nir_params");
      constexpr std::string_view pw = "scene nir_params";
      detail::require_object(pj, pw);
      detail::reject_unknown_keys(pj, {"c0", "c_r", "c_g", "c_b"}, pw);
      p.c0 = detail::get_number(pj, "c0", p.c0, pw);
      p.c_r = detail::get_number(pj, "c_r", p.c_r, pw);
      p.c_g = detail::get_number(pj, "c_g", p.c_g, pw);
      p.c_b = detail::get_number(pj, "c_b", p.c_b, pw);
    }
    cfg.maps.nir_albedo = pseudo_nir_albedo(cfg.maps.rgb_albedo, p);
  }
  cfg.maps.nir_albedo.set_kind(ImageKind::NIR);
  const CameraModel& cam = cfg.maps.camera;
  for (const Image* m : {&cfg.maps.depth, &cfg.maps.rgb_albedo, &cfg.maps.nir_albedo}) {
    if (m->width() != cam.width || m->height() != cam.height) {
      throw ParseError("scene: map extent differs from the camera width/height");
    }
  }
  return cfg;
}

}  // namespace nirfuse
