// nirfuse command-line front end. Talks to the library only through the C
// API in nirfuse/nirfuse.h.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "nirfuse/nirfuse.h"

namespace fs = std::filesystem;

namespace {

enum ExitCode { kOk = 0, kUsage = 2, kIo = 3, kNumeric = 4 };

struct Failure {
  int code;
  std::string message;
};

int exit_code_for(nf_status s) {
  switch (s) {
    case NF_ERR_ARGUMENT: return kUsage;
    case NF_ERR_IO:
    case NF_ERR_PARSE: return kIo;
    case NF_ERR_DOMAIN:
    case NF_ERR_NUMERIC: return kNumeric;
    default: return 1;
  }
}

void check(nf_status s) {
  if (s != NF_OK) throw Failure{exit_code_for(s), nf_last_error()};
}

[[noreturn]] void usage(const std::string& msg) { throw Failure{kUsage, msg}; }

struct ImageDeleter {
  void operator()(nf_image* p) const { nf_image_free(p); }
};
using ImagePtr = std::unique_ptr<nf_image, ImageDeleter>;

struct WeightsDeleter {
  void operator()(nf_weights* p) const { nf_weights_free(p); }
};
using WeightsPtr = std::unique_ptr<nf_weights, WeightsDeleter>;

ImagePtr load(const std::string& path) {
  nf_image* img = nullptr;
  check(nf_image_load(path.c_str(), &img));
  return ImagePtr(img);
}

WeightsPtr load_weights(const std::string& path) {
  nf_weights* w = nullptr;
  check(nf_weights_load(path.c_str(), &w));
  return WeightsPtr(w);
}

void require_image_extension(const std::string& path) {
  const std::string ext = fs::path(path).extension().string();
  if (ext != ".png" && ext != ".pfm") usage("output '" + path + "' must end in .png or .pfm");
}

void save(const nf_image* img, const std::string& path) { check(nf_image_save(img, path.c_str(), NF_FORMAT_AUTO)); }

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

void kv(const std::string& key, const std::string& value) { std::printf("%s=%s\n", key.c_str(), value.c_str()); }
void kv(const std::string& key, double value) { kv(key, num(value)); }

// ---------------------------------------------------------------- fuse

struct FuseOptions {
  std::string rgb, nir, output, method = "hsv";
  double alpha = 0.5, beta = 0.5;
  std::string alpha_map, beta_map;
  double i_max = 1.0;
  nf_adaptive_params adaptive = nf_adaptive_defaults();
  nf_guided_params guided = nf_guided_defaults();
  nf_tv_params tv = nf_tv_defaults();
  std::string weights;
};

const std::vector<std::string> kMethods{"hsv", "hsv-weighted", "ycbcr", "adaptive", "bayesian", "guided", "learned"};

ImagePtr constant_map(const nf_image* like, double v) {
  nf_image* m = nullptr;
  check(nf_image_create(nf_image_width(like), nf_image_height(like), 1, NF_KIND_WEIGHT, &m));
  ImagePtr p(m);
  const std::size_t n = static_cast<std::size_t>(nf_image_width(like)) * nf_image_height(like);
  double* d = nf_image_data(m);
  for (std::size_t i = 0; i < n; ++i) d[i] = v;
  return p;
}

int run_fuse(const FuseOptions& o) {
  require_image_extension(o.output);
  if (o.method == "learned" && o.weights.empty()) usage("--method learned needs --weights");
  const ImagePtr rgb = load(o.rgb), nir = load(o.nir);
  nf_image* out = nullptr;
  kv("command", "fuse");
  kv("method", o.method);
  if (o.method == "hsv") {
    kv("alpha", o.alpha);
    kv("beta", o.beta);
    check(nf_fuse_hsv(rgb.get(), nir.get(), o.alpha, o.beta, &out));
  } else if (o.method == "hsv-weighted") {
    ImagePtr a = o.alpha_map.empty() ? constant_map(rgb.get(), o.alpha) : load(o.alpha_map);
    ImagePtr b = o.beta_map.empty() ? constant_map(rgb.get(), o.beta) : load(o.beta_map);
    kv("alpha", o.alpha_map.empty() ? num(o.alpha) : o.alpha_map);
    kv("beta", o.beta_map.empty() ? num(o.beta) : o.beta_map);
    check(nf_fuse_hsv_weighted(rgb.get(), nir.get(), a.get(), b.get(), &out));
  } else if (o.method == "ycbcr") {
    kv("i_max", o.i_max);
    check(nf_fuse_ycbcr(rgb.get(), nir.get(), o.i_max, &out));
  } else if (o.method == "adaptive") {
    kv("contrast_alpha", o.adaptive.contrast_alpha);
    kv("window_radius", o.adaptive.window_radius);
    kv("gaussian_kernel", o.adaptive.gaussian_kernel);
    kv("gaussian_sigma", o.adaptive.gaussian_sigma);
    kv("epsilon", o.adaptive.epsilon);
    check(nf_fuse_adaptive(rgb.get(), nir.get(), &o.adaptive, &out));
  } else if (o.method == "bayesian") {
    kv("lambda", o.tv.lambda);
    kv("rho", o.tv.rho);
    kv("iterations", o.tv.iterations);
    kv("inner_iterations", o.tv.inner_iterations);
    check(nf_fuse_tv(rgb.get(), nir.get(), &o.tv, &out));
  } else if (o.method == "guided") {
    kv("alpha", o.alpha);
    kv("beta", o.beta);
    kv("radius", o.guided.radius);
    kv("guided_epsilon", o.guided.epsilon);
    nf_image* hsv = nullptr;
    check(nf_fuse_hsv(rgb.get(), nir.get(), o.alpha, o.beta, &hsv));
    ImagePtr h(hsv);
    check(nf_guided_filter(nir.get(), h.get(), &o.guided, &out));
  } else {
    kv("weights", o.weights);
    kv("radius", o.guided.radius);
    kv("guided_epsilon", o.guided.epsilon);
    const WeightsPtr w = load_weights(o.weights);
    check(nf_fuse_learned(rgb.get(), nir.get(), w.get(), &o.guided, &out));
  }
  ImagePtr result(out);
  save(result.get(), o.output);
  kv("output", o.output);
  return kOk;
}

// ---------------------------------------------------------------- synth

struct SynthOptions {
  std::string scene, outdir;
  bool png = false;
};

int run_synth(const SynthOptions& o) {
  nf_scene* scene = nullptr;
  check(nf_scene_load(o.scene.c_str(), &scene));
  std::unique_ptr<nf_scene, void (*)(nf_scene*)> sp(scene, nf_scene_free);
  nf_render* render = nullptr;
  check(nf_scene_render(scene, &render));
  std::unique_ptr<nf_render, void (*)(nf_render*)> rp(render, nf_render_free);

  std::error_code ec;
  fs::create_directories(o.outdir, ec);
  if (ec) throw Failure{kIo, "cannot create '" + o.outdir + "': " + ec.message()};
  const std::pair<nf_render_output, const char*> files[] = {
      {NF_RENDER_RGB_LEFT, "rgb_left"},         {NF_RENDER_RGB_RIGHT, "rgb_right"},
      {NF_RENDER_NIR_LEFT, "nir_left"},         {NF_RENDER_NIR_RIGHT, "nir_right"},
      {NF_RENDER_DISPARITY, "disparity"},       {NF_RENDER_DISPARITY_RIGHT, "disparity_right"},
      {NF_RENDER_VALID_LEFT, "valid_left"},     {NF_RENDER_HOLES_RIGHT, "holes_right"},
      {NF_RENDER_NORMALS, "normals"},
  };
  kv("command", "synth");
  kv("scene", o.scene);
  for (const auto& [which, name] : files) {
    const std::string path = (fs::path(o.outdir) / (std::string(name) + ".pfm")).string();
    save(nf_render_image(render, which), path);
    kv(name, path);
  }
  if (o.png) {
    for (int i = 0; i < 4; ++i) {
      const auto& [which, name] = files[i];
      save(nf_render_image(render, which), (fs::path(o.outdir) / (std::string(name) + ".png")).string());
    }
  }
  return kOk;
}

// ---------------------------------------------------------------- lidar

struct LidarOptions {
  std::string points, camera, outdir;
  bool refine = true;
  bool literal = false;
  nf_lidar_params params = nf_lidar_defaults();
};

int run_lidar(LidarOptions o) {
  nf_camera_model cam{};
  check(nf_camera_load(o.camera.c_str(), &cam));
  nf_points* pts = nullptr;
  check(nf_points_load(o.points.c_str(), &pts));
  std::unique_ptr<nf_points, void (*)(nf_points*)> pp(pts, nf_points_free);
  if (nf_points_count(pts) == 0) std::fprintf(stderr, "nirfuse: warning: point file '%s' is empty\n", o.points.c_str());
  o.params.refine = o.refine ? 1 : 0;
  o.params.literal_reprojection = o.literal ? 1 : 0;
  nf_lidar* res = nullptr;
  check(nf_lidar_process(pts, &cam, &o.params, &res));
  std::unique_ptr<nf_lidar, void (*)(nf_lidar*)> rp(res, nf_lidar_free);

  std::error_code ec;
  fs::create_directories(o.outdir, ec);
  if (ec) throw Failure{kIo, "cannot create '" + o.outdir + "': " + ec.message()};
  const auto counts = nf_lidar_get_counts(res);
  kv("command", "lidar");
  kv("refine", o.refine ? "on" : "off");
  kv("alpha", o.params.alpha);
  kv("beta", o.params.beta);
  kv("occlusion_threshold", o.params.occlusion_threshold);
  kv("reprojection", o.literal ? "literal" : "pixel");
  kv("baseline", cam.baseline);
  kv("points_input", static_cast<double>(counts.input));
  kv("points_projected_left", static_cast<double>(counts.projected_left));
  kv("points_kept_left", static_cast<double>(counts.kept_left));
  kv("points_projected_right", static_cast<double>(counts.projected_right));
  kv("points_kept_right", static_cast<double>(counts.kept_right));
  kv("points_occluded_left", static_cast<double>(counts.occluded_left));
  const fs::path dir(o.outdir);
  check(nf_lidar_save_sparse(res, (dir / "sparse_disparity.txt").string().c_str()));
  check(nf_lidar_save_sparse_depth(res, (dir / "sparse_depth.txt").string().c_str()));
  const std::pair<nf_lidar_output, const char*> files[] = {
      {NF_LIDAR_DISPARITY_LEFT, "disparity_left.pfm"},
      {NF_LIDAR_DISPARITY_RIGHT, "disparity_right.pfm"},
      {NF_LIDAR_DEPTH_LEFT, "depth_left.pfm"},
      {NF_LIDAR_OCCLUSION, "occlusion.pfm"},
  };
  for (const auto& [which, name] : files) save(nf_lidar_image(res, which), (dir / name).string());
  kv("outdir", o.outdir);
  return kOk;
}

// ---------------------------------------------------------------- depth

struct DepthOptions {
  std::string left_rgb, left_nir, right_rgb, right_nir, output;
  std::string features = "intensity+grad";
  std::string schedule = "fusion,nir";
  std::string fusion = "hsv";
  std::string weights;
  bool no_subpixel = false;
  bool shift_plus = false;
  nf_depth_params params = nf_depth_defaults();
};

int run_depth(DepthOptions o) {
  if (fs::path(o.output).extension() != ".pfm") usage("depth output must be a .pfm file");
  nf_depth_params& p = o.params;
  p.features = o.features == "intensity"        ? NF_FEATURES_INTENSITY
               : o.features == "intensity+grad" ? NF_FEATURES_INTENSITY_GRAD
                                                : NF_FEATURES_ENCODER;
  p.fusion = o.fusion == "learned" ? NF_FUSION_LEARNED : NF_FUSION_HSV;
  p.schedule = o.schedule.c_str();
  p.subpixel = o.no_subpixel ? 0 : 1;
  p.shift_plus = o.shift_plus ? 1 : 0;
  WeightsPtr w;
  if (p.fusion == NF_FUSION_LEARNED || p.features == NF_FEATURES_ENCODER) {
    if (o.weights.empty()) usage("learned fusion and encoder features need --weights");
    w = load_weights(o.weights);
    p.weights = w.get();
  }
  const ImagePtr lr = load(o.left_rgb), ln = load(o.left_nir), rr = load(o.right_rgb), rn = load(o.right_nir);
  nf_image* out = nullptr;
  check(nf_estimate_disparity(lr.get(), ln.get(), rr.get(), rn.get(), &p, &out));
  ImagePtr disp(out);
  kv("command", "depth");
  kv("features", o.features);
  kv("schedule", o.schedule);
  kv("rounds", p.rounds);
  kv("max_disparity", p.max_disparity);
  kv("normalize_radius", p.normalize_radius);
  kv("aggregation_radius", p.aggregation_radius);
  kv("subpixel", p.subpixel ? "on" : "off");
  kv("shift", p.shift_plus ? "x+k" : "x-k");
  kv("fusion", o.fusion);
  if (p.fusion == NF_FUSION_HSV) {
    kv("alpha", p.hsv_alpha);
    kv("beta", p.hsv_beta);
  }
  save(disp.get(), o.output);
  kv("output", o.output);
  return kOk;
}

// ---------------------------------------------------------------- eval

struct EvalOptions {
  std::string pred, gt, mask, kind = "depth", lidar, json_out;
  bool literal_photometric = false;
};

int run_eval(const EvalOptions& o) {
  const ImagePtr pred = load(o.pred), gt = load(o.gt);
  ImagePtr mask;
  if (!o.mask.empty()) {
    mask = load(o.mask);
  } else if (o.kind != "image") {
    // Default validity: finite reference, and positive for depth.
    if (nf_image_channels(gt.get()) != 1) usage("depth/disparity references must have one channel");
    nf_image* m = nullptr;
    check(nf_image_create(nf_image_width(gt.get()), nf_image_height(gt.get()), 1, NF_KIND_MASK, &m));
    mask.reset(m);
    const double* g = nf_image_cdata(gt.get());
    double* md = nf_image_data(m);
    const std::size_t n = static_cast<std::size_t>(nf_image_width(gt.get())) * nf_image_height(gt.get());
    for (std::size_t i = 0; i < n; ++i) {
      md[i] = std::isfinite(g[i]) && (o.kind != "depth" || g[i] > 0.0) ? 1.0 : 0.0;
    }
  }
  nf_metric_config cfg = nf_metric_defaults();
  cfg.literal_photometric = o.literal_photometric ? 1 : 0;
  const nf_eval_kind kind = o.kind == "depth" ? NF_EVAL_DEPTH : o.kind == "disparity" ? NF_EVAL_DISPARITY : NF_EVAL_IMAGE;
  nf_eval_report r{};
  check(nf_evaluate(pred.get(), gt.get(), mask.get(), kind, &cfg, &r));

  std::vector<std::pair<std::string, double>> metrics;
  metrics.emplace_back("valid_samples", static_cast<double>(r.valid_samples));
  metrics.emplace_back("mae", r.mae);
  metrics.emplace_back("rmse", r.rmse);
  if (kind == NF_EVAL_DEPTH) {
    metrics.emplace_back("delta1", r.delta1);
    metrics.emplace_back("delta2", r.delta2);
    metrics.emplace_back("delta3", r.delta3);
  } else if (kind == NF_EVAL_DISPARITY) {
    for (int i = 0; i < 3; ++i) {
      metrics.emplace_back("rate_below_" + num(cfg.bad_pixel_thresholds[i]) + "px", r.rate_below[i]);
    }
  } else {
    metrics.emplace_back("ssim", r.ssim);
    metrics.emplace_back("psnr", r.psnr);
    metrics.emplace_back("photometric", r.photometric);
  }
  if (!o.lidar.empty()) {
    nf_points* pts = nullptr;
    check(nf_points_load(o.lidar.c_str(), &pts));
    std::unique_ptr<nf_points, void (*)(nf_points*)> pp(pts, nf_points_free);
    std::vector<double> uvz(3 * nf_points_count(pts));
    nf_points_copy(pts, uvz.data());
    nf_lidar_error e{};
    check(nf_lidar_neighborhood_error(pred.get(), uvz.data(), nf_points_count(pts), &cfg, &e));
    metrics.emplace_back("lidar_error_sum", e.sum);
    metrics.emplace_back("lidar_error_mean", e.mean);
    metrics.emplace_back("lidar_error_count", static_cast<double>(e.count));
  }

  kv("command", "eval");
  kv("kind", o.kind);
  kv("delta_base", cfg.delta_base);
  kv("gamma_l1", cfg.gamma_l1);
  kv("gamma_ssim", cfg.gamma_ssim);
  kv("photometric_form", o.literal_photometric ? "literal" : "dissimilarity");
  kv("lidar_radius", cfg.lidar_radius);
  for (const auto& [k, v] : metrics) kv(k, v);

  if (!o.json_out.empty()) {
    nlohmann::json j;
    j["version"] = 1;
    j["kind"] = o.kind;
    for (const auto& [k, v] : metrics) {
      if (k == "valid_samples" || k == "lidar_error_count") {
        j["metrics"][k] = static_cast<std::uint64_t>(v);
      } else if (std::isfinite(v)) {
        j["metrics"][k] = v;
      } else {
        j["metrics"][k] = nullptr;
      }
    }
    std::ofstream f(o.json_out, std::ios::trunc);
    f << j.dump(2) << "\n";
    if (!f) throw Failure{kIo, "cannot write '" + o.json_out + "'"};
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RGB-NIR fusion, synthesis, LiDAR and stereo toolkit"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  int threads = 1;
  app.add_option("--threads", threads, "Worker threads; outputs do not depend on it")->check(CLI::PositiveNumber);

  FuseOptions fo;
  auto* fuse = app.add_subcommand("fuse", "Fuse an RGB image with a NIR image");
  fuse->add_option("rgb", fo.rgb, "RGB input (.png or .pfm)")->required();
  fuse->add_option("nir", fo.nir, "NIR input, one channel")->required();
  fuse->add_option("-o,--output", fo.output, "Fused output (.png or .pfm)")->required();
  fuse->add_option("--method", fo.method, "Fusion method")->check(CLI::IsMember(kMethods));
  fuse->add_option("--alpha", fo.alpha, "Weight of V (hsv, hsv-weighted, guided)");
  fuse->add_option("--beta", fo.beta, "Weight of NIR (hsv, hsv-weighted, guided)");
  fuse->add_option("--alpha-map", fo.alpha_map, "Per-pixel alpha map (hsv-weighted)");
  fuse->add_option("--beta-map", fo.beta_map, "Per-pixel beta map (hsv-weighted)");
  fuse->add_option("--i-max", fo.i_max, "Intensity ceiling (ycbcr)");
  fuse->add_option("--contrast-alpha", fo.adaptive.contrast_alpha, "Local contrast mix (adaptive)");
  fuse->add_option("--window-radius", fo.adaptive.window_radius, "Contrast window radius (adaptive)");
  fuse->add_option("--gaussian-kernel", fo.adaptive.gaussian_kernel, "Low-pass kernel size (adaptive)");
  fuse->add_option("--gaussian-sigma", fo.adaptive.gaussian_sigma, "Low-pass sigma, <= 0 derives it (adaptive)");
  fuse->add_option("--epsilon", fo.adaptive.epsilon, "Fusion map floor (adaptive)");
  fuse->add_option("--lambda", fo.tv.lambda, "TV weight (bayesian)");
  fuse->add_option("--rho", fo.tv.rho, "Gradient step scale (bayesian)");
  fuse->add_option("--iterations", fo.tv.iterations, "Outer iterations (bayesian)");
  fuse->add_option("--inner-iterations", fo.tv.inner_iterations, "Dual steps per prox (bayesian)");
  fuse->add_option("--radius", fo.guided.radius, "Guided filter radius (guided, learned)");
  fuse->add_option("--guided-eps", fo.guided.epsilon, "Guided filter epsilon (guided, learned)");
  fuse->add_option("--weights", fo.weights, "NFW1 weights file (learned)");

  SynthOptions so;
  auto* synth = app.add_subcommand("synth", "Render a synthetic RGB-NIR stereo pair from a scene file");
  synth->add_option("scene", so.scene, "Scene JSON")->required();
  synth->add_option("outdir", so.outdir, "Output directory")->required();
  synth->add_flag("--png", so.png, "Also write 8-bit PNG copies of the four views");

  LidarOptions lo;
  auto* lidar = app.add_subcommand("lidar", "Project a LiDAR cloud, refine it and build occlusion masks");
  lidar->add_option("points", lo.points, "Point cloud (text or NFPC binary)")->required();
  lidar->add_option("camera", lo.camera, "Camera JSON")->required();
  lidar->add_option("-o,--outdir", lo.outdir, "Output directory")->required();
  lidar->add_flag("--refine,!--no-refine", lo.refine, "Disparity point refinement (default on)");
  lidar->add_option("--alpha", lo.params.alpha, "Refinement distance scale");
  lidar->add_option("--beta", lo.params.beta, "Refinement disparity ratio");
  lidar->add_option("--occlusion-threshold", lo.params.occlusion_threshold, "Consistency threshold in pixels");
  lidar->add_flag("--literal-reprojection", lo.literal, "Use u_l = u_r + d * baseline / fx");

  DepthOptions dopt;
  auto* depth = app.add_subcommand("depth", "Estimate disparity from a rectified RGB-NIR stereo pair");
  depth->add_option("--left-rgb", dopt.left_rgb, "Left RGB image")->required();
  depth->add_option("--left-nir", dopt.left_nir, "Left NIR image")->required();
  depth->add_option("--right-rgb", dopt.right_rgb, "Right RGB image")->required();
  depth->add_option("--right-nir", dopt.right_nir, "Right NIR image")->required();
  depth->add_option("-o,--output", dopt.output, "Disparity output (.pfm)")->required();
  depth->add_option("--features", dopt.features, "Feature type")
      ->check(CLI::IsMember({"intensity", "intensity+grad", "encoder"}));
  depth->add_option("--schedule", dopt.schedule, "Comma list of fusion, nir, rgb volumes");
  depth->add_option("--rounds", dopt.params.rounds, "Accumulation rounds, 0 = schedule length");
  depth->add_option("--max-disp", dopt.params.max_disparity, "Disparity search range K");
  depth->add_option("--normalize-radius", dopt.params.normalize_radius, "Feature normalization window, 0 = off");
  depth->add_option("--aggregate-radius", dopt.params.aggregation_radius, "Cost aggregation window, 0 = off");
  depth->add_flag("--no-subpixel", dopt.no_subpixel, "Plain integer argmax");
  depth->add_flag("--shift-plus", dopt.shift_plus, "Sample the right view at x + k");
  depth->add_option("--fusion", dopt.fusion, "Fusion for the fusion volume")->check(CLI::IsMember({"hsv", "learned"}));
  depth->add_option("--alpha", dopt.params.hsv_alpha, "HSV alpha for hsv fusion");
  depth->add_option("--beta", dopt.params.hsv_beta, "HSV beta for hsv fusion");
  depth->add_option("--weights", dopt.weights, "NFW1 weights (learned fusion, encoder features)");

  EvalOptions eo;
  auto* eval = app.add_subcommand("eval", "Compare a prediction against a reference");
  eval->add_option("pred", eo.pred, "Prediction")->required();
  eval->add_option("gt", eo.gt, "Reference")->required();
  eval->add_option("--mask", eo.mask, "Validity mask, nonzero = valid");
  eval->add_option("--kind", eo.kind, "What the images hold")->check(CLI::IsMember({"depth", "disparity", "image"}));
  eval->add_option("--lidar", eo.lidar, "'u v z' samples for the LiDAR neighbourhood error");
  eval->add_option("--json", eo.json_out, "Also write the report as JSON");
  eval->add_flag("--literal-photometric", eo.literal_photometric, "Add SSIM instead of 1 - SSIM");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  nf_set_threads(threads);
  try {
    if (*fuse) return run_fuse(fo);
    if (*synth) return run_synth(so);
    if (*lidar) return run_lidar(lo);
    if (*depth) return run_depth(dopt);
    if (*eval) return run_eval(eo);
  } catch (const Failure& f) {
    std::fprintf(stderr, "nirfuse: error: %s\n", f.message.c_str());
    return f.code;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "nirfuse: error: %s\n", e.what());
    return 1;
  }
  return kUsage;
}
