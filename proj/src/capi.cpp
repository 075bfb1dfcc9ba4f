#include "nirfuse/nirfuse.h"

#include <cmath>
#include <limits>
#include <memory>
#include <new>
#include <string>

#include "nirfuse/attention.hpp"
#include "nirfuse/fusion.hpp"
#include "nirfuse/image_io.hpp"
#include "nirfuse/lidar.hpp"
#include "nirfuse/metrics.hpp"
#include "nirfuse/parallel.hpp"
#include "nirfuse/stereo.hpp"
#include "nirfuse/synth.hpp"

using namespace nirfuse;

struct nf_image {
  Image img;
};

struct nf_weights {
  FusionModel model;
};

struct nf_scene {
  SceneConfig cfg;
};

struct nf_render {
  nf_image outputs[9];
};

struct nf_points {
  std::vector<Vec3> pts;
};

struct nf_lidar {
  nf_lidar_counts counts{};
  SparseDisparityPoints kept_left;
  std::vector<double> kept_depth;
  nf_image images[4];
};

namespace {

thread_local std::string g_last_error;

nf_status fail(nf_status s, const char* msg) {
  g_last_error = msg;
  return s;
}

template <class F>
nf_status guard(F&& f) {
  try {
    f();
    return NF_OK;
  } catch (const ParseError& e) {
    return fail(NF_ERR_PARSE, e.what());
  } catch (const IoError& e) {
    return fail(NF_ERR_IO, e.what());
  } catch (const ArgumentError& e) {
    return fail(NF_ERR_ARGUMENT, e.what());
  } catch (const DomainError& e) {
    return fail(NF_ERR_DOMAIN, e.what());
  } catch (const NumericError& e) {
    return fail(NF_ERR_NUMERIC, e.what());
  } catch (const std::bad_alloc&) {
    return fail(NF_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(NF_ERR_INTERNAL, e.what());
  }
}

template <class T>
const T& need(const T* p, const char* what) {
  if (p == nullptr) throw ArgumentError(std::string(what) + " is NULL");
  return *p;
}

const char* need_path(const char* p) {
  if (p == nullptr) throw ArgumentError("path is NULL");
  return p;
}

void need_out(const void* p) {
  if (p == nullptr) throw ArgumentError("output pointer is NULL");
}

nf_image* wrap(Image img) { return new nf_image{std::move(img)}; }

ImageKind to_kind(nf_image_kind k) {
  if (k < NF_KIND_RGB || k > NF_KIND_MASK) throw ArgumentError("unknown image kind");
  return static_cast<ImageKind>(k);
}

CameraModel to_camera(const nf_camera_model& c) {
  CameraModel m;
  m.fx = c.fx;
  m.fy = c.fy;
  m.cx = c.cx;
  m.cy = c.cy;
  m.width = c.width;
  m.height = c.height;
  for (int i = 0; i < 12; ++i) m.extrinsic[i] = c.extrinsic[i];
  m.baseline = c.baseline;
  return m;
}

MetricConfig to_metric(const nf_metric_config* c) {
  MetricConfig m;
  if (c == nullptr) return m;
  m.delta_base = c->delta_base;
  m.bad_pixel_thresholds.assign(c->bad_pixel_thresholds, c->bad_pixel_thresholds + 3);
  m.gamma_l1 = c->gamma_l1;
  m.gamma_ssim = c->gamma_ssim;
  m.lidar_radius = c->lidar_radius;
  m.literal_photometric = c->literal_photometric != 0;
  return m;
}

GuidedFilterParams to_guided(const nf_guided_params* p) {
  GuidedFilterParams g;
  if (p != nullptr) {
    g.radius = p->radius;
    g.epsilon = p->epsilon;
  }
  return g;
}

std::vector<double> kernel_from(const double* k, int size) {
  if (k == nullptr) return {};
  if (size < 1) throw ArgumentError("kernel size must be >= 1");
  return std::vector<double>(k, k + static_cast<std::size_t>(size) * size);
}

}  // namespace

extern "C" {

const char* nf_version(void) { return "0.1.0"; }

const char* nf_status_string(nf_status status) {
  switch (status) {
    case NF_OK: return "ok";
    case NF_ERR_ARGUMENT: return "invalid argument";
    case NF_ERR_IO: return "i/o error";
    case NF_ERR_PARSE: return "parse error";
    case NF_ERR_DOMAIN: return "domain error";
    case NF_ERR_NUMERIC: return "numeric error";
    case NF_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* nf_last_error(void) { return g_last_error.c_str(); }

void nf_set_threads(int n) { set_thread_count(n); }

// ---------------------------------------------------------------- images

nf_status nf_image_create(int width, int height, int channels, nf_image_kind kind, nf_image** out) {
  return guard([&] {
    need_out(out);
    if (width <= 0 || height <= 0 || channels <= 0) throw ArgumentError("image dimensions must be positive");
    *out = wrap(Image(width, height, channels, to_kind(kind)));
  });
}

nf_status nf_image_load(const char* path, nf_image** out) {
  return guard([&] {
    need_out(out);
    *out = wrap(load_image(need_path(path)));
  });
}

nf_status nf_image_save(const nf_image* img, const char* path, nf_format format) {
  return guard([&] {
    const Image& im = need(img, "image").img;
    std::filesystem::path p(need_path(path));
    ImageFormat f;
    switch (format) {
      case NF_FORMAT_AUTO: {
        auto guess = format_from_extension(p);
        if (!guess) throw ArgumentError("cannot infer image format from '" + p.string() + "'");
        f = *guess;
        break;
      }
      case NF_FORMAT_PNG8: f = ImageFormat::PNG8; break;
      case NF_FORMAT_PNG16: f = ImageFormat::PNG16; break;
      case NF_FORMAT_PFM: f = ImageFormat::PFM; break;
      default: throw ArgumentError("unknown image format");
    }
    save_image(im, p, f);
  });
}

nf_status nf_image_clone(const nf_image* img, nf_image** out) {
  return guard([&] {
    need_out(out);
    *out = wrap(need(img, "image").img);
  });
}

void nf_image_free(nf_image* img) { delete img; }

int nf_image_width(const nf_image* img) { return img ? img->img.width() : 0; }
int nf_image_height(const nf_image* img) { return img ? img->img.height() : 0; }
int nf_image_channels(const nf_image* img) { return img ? img->img.channels() : 0; }
nf_image_kind nf_image_get_kind(const nf_image* img) {
  return img ? static_cast<nf_image_kind>(img->img.kind()) : NF_KIND_GRAY;
}
void nf_image_set_kind(nf_image* img, nf_image_kind kind) {
  if (img != nullptr && kind >= NF_KIND_RGB && kind <= NF_KIND_MASK) img->img.set_kind(static_cast<ImageKind>(kind));
}
double* nf_image_data(nf_image* img) { return img ? img->img.data().data() : nullptr; }
const double* nf_image_cdata(const nf_image* img) { return img ? img->img.data().data() : nullptr; }

// ---------------------------------------------------------------- fusion

nf_status nf_fuse_hsv(const nf_image* rgb, const nf_image* nir, double alpha, double beta, nf_image** out) {
  return guard([&] {
    need_out(out);
    *out = wrap(hsv_constant_fusion(need(rgb, "rgb").img, need(nir, "nir").img, alpha, beta));
  });
}

nf_status nf_fuse_hsv_weighted(const nf_image* rgb, const nf_image* nir, const nf_image* alpha,
                               const nf_image* beta, nf_image** out) {
  return guard([&] {
    need_out(out);
    WeightMaps w{need(alpha, "alpha map").img, need(beta, "beta map").img};
    *out = wrap(hsv_weighted_fusion(need(rgb, "rgb").img, need(nir, "nir").img, w));
  });
}

nf_status nf_fuse_ycbcr(const nf_image* rgb, const nf_image* nir, double i_max, nf_image** out) {
  return guard([&] {
    need_out(out);
    *out = wrap(ycbcr_fusion(need(rgb, "rgb").img, need(nir, "nir").img, i_max));
  });
}

nf_adaptive_params nf_adaptive_defaults(void) {
  const AdaptiveParams d;
  return {d.contrast_alpha, d.window_radius, d.gaussian_kernel, d.gaussian_sigma, d.epsilon};
}

nf_status nf_fuse_adaptive(const nf_image* rgb, const nf_image* nir, const nf_adaptive_params* p,
                           nf_image** out) {
  return guard([&] {
    need_out(out);
    AdaptiveParams a;
    if (p != nullptr) {
      a.contrast_alpha = p->contrast_alpha;
      a.window_radius = p->window_radius;
      a.gaussian_kernel = p->gaussian_kernel;
      a.gaussian_sigma = p->gaussian_sigma;
      a.epsilon = p->epsilon;
    }
    *out = wrap(adaptive_fusion(need(rgb, "rgb").img, need(nir, "nir").img, a));
  });
}

nf_guided_params nf_guided_defaults(void) {
  const GuidedFilterParams d;
  return {d.radius, d.epsilon};
}

nf_status nf_guided_filter(const nf_image* guide, const nf_image* input, const nf_guided_params* p,
                           nf_image** out) {
  return guard([&] {
    need_out(out);
    *out = wrap(guided_filter(need(guide, "guide").img, need(input, "input").img, to_guided(p)));
  });
}

nf_tv_params nf_tv_defaults(void) {
  const TVFusionParams d;
  return {d.lambda, d.rho, d.iterations, d.inner_iterations, nullptr, 0, nullptr, 0};
}

nf_status nf_fuse_tv(const nf_image* rgb, const nf_image* nir, const nf_tv_params* p, nf_image** out) {
  return guard([&] {
    need_out(out);
    TVFusionParams t;
    if (p != nullptr) {
      t.lambda = p->lambda;
      t.rho = p->rho;
      t.iterations = p->iterations;
      t.inner_iterations = p->inner_iterations;
      t.k1 = kernel_from(p->k1, p->k1_size);
      t.k2 = kernel_from(p->k2, p->k2_size);
    }
    *out = wrap(tv_bayesian_fusion_rgb(need(rgb, "rgb").img, need(nir, "nir").img, t));
  });
}

nf_status nf_weights_load(const char* path, nf_weights** out) {
  return guard([&] {
    need_out(out);
    *out = new nf_weights{FusionModel::from_bundle(WeightBundle::load(need_path(path)))};
  });
}

nf_status nf_weights_zeros(int in_channels, int features, int reduction, nf_weights** out) {
  return guard([&] {
    need_out(out);
    if (in_channels < 1 || features < 1) throw ArgumentError("channel counts must be positive");
    *out = new nf_weights{FusionModel::zeros(in_channels, features, reduction)};
  });
}

nf_status nf_weights_save(const nf_weights* w, const char* path) {
  return guard([&] { need(w, "weights").model.to_bundle().save(need_path(path)); });
}

void nf_weights_free(nf_weights* w) { delete w; }

nf_status nf_fuse_learned(const nf_image* rgb, const nf_image* nir, const nf_weights* w,
                          const nf_guided_params* guided, nf_image** out) {
  return guard([&] {
    need_out(out);
    *out = wrap(learned_image_fusion(need(rgb, "rgb").img, need(nir, "nir").img, need(w, "weights").model,
                                     to_guided(guided)));
  });
}

// ---------------------------------------------------------------- synthesis

nf_status nf_scene_load(const char* path, nf_scene** out) {
  return guard([&] {
    need_out(out);
    *out = new nf_scene{load_scene_config(need_path(path))};
  });
}

void nf_scene_free(nf_scene* scene) { delete scene; }

nf_status nf_scene_render(const nf_scene* scene, nf_render** out) {
  return guard([&] {
    need_out(out);
    const SceneConfig& cfg = need(scene, "scene").cfg;
    StereoRender r = render_stereo_scene(cfg.maps, cfg.lights, cfg.sensor, cfg.lighting);
    auto res = std::make_unique<nf_render>();
    res->outputs[NF_RENDER_RGB_LEFT].img = std::move(r.rgb_left);
    res->outputs[NF_RENDER_RGB_RIGHT].img = std::move(r.rgb_right);
    res->outputs[NF_RENDER_NIR_LEFT].img = std::move(r.nir_left);
    res->outputs[NF_RENDER_NIR_RIGHT].img = std::move(r.nir_right);
    res->outputs[NF_RENDER_DISPARITY].img = std::move(r.disparity);
    res->outputs[NF_RENDER_DISPARITY_RIGHT].img = std::move(r.disparity_right);
    res->outputs[NF_RENDER_VALID_LEFT].img = std::move(r.valid_left);
    res->outputs[NF_RENDER_HOLES_RIGHT].img = std::move(r.holes_right);
    res->outputs[NF_RENDER_NORMALS].img = normal_from_depth(cfg.maps.depth, cfg.maps.camera);
    *out = res.release();
  });
}

void nf_render_free(nf_render* render) { delete render; }

const nf_image* nf_render_image(const nf_render* render, nf_render_output which) {
  if (render == nullptr || which < NF_RENDER_RGB_LEFT || which > NF_RENDER_NORMALS) return nullptr;
  return &render->outputs[which];
}

// ---------------------------------------------------------------- LiDAR

nf_status nf_camera_load(const char* path, nf_camera_model* out) {
  return guard([&] {
    need_out(out);
    const CameraModel c = load_camera(need_path(path));
    out->fx = c.fx;
    out->fy = c.fy;
    out->cx = c.cx;
    out->cy = c.cy;
    out->width = c.width;
    out->height = c.height;
    for (int i = 0; i < 12; ++i) out->extrinsic[i] = c.extrinsic[i];
    out->baseline = c.baseline;
  });
}

nf_status nf_depth_to_disparity(double z, const nf_camera_model* cam, double* d) {
  return guard([&] {
    need_out(d);
    *d = depth_to_disparity(z, to_camera(need(cam, "camera")));
  });
}

nf_status nf_disparity_to_depth(double d, const nf_camera_model* cam, double* z) {
  return guard([&] {
    need_out(z);
    *z = disparity_to_depth(d, to_camera(need(cam, "camera")));
  });
}

nf_status nf_points_load(const char* path, nf_points** out) {
  return guard([&] {
    need_out(out);
    *out = new nf_points{load_point_cloud(need_path(path))};
  });
}

nf_status nf_points_create(const double* xyz, size_t count, nf_points** out) {
  return guard([&] {
    need_out(out);
    if (count > 0 && xyz == nullptr) throw ArgumentError("point buffer is NULL");
    auto p = std::make_unique<nf_points>();
    p->pts.resize(count);
    for (size_t i = 0; i < count; ++i) p->pts[i] = {xyz[3 * i], xyz[3 * i + 1], xyz[3 * i + 2]};
    *out = p.release();
  });
}

void nf_points_free(nf_points* pts) { delete pts; }

size_t nf_points_count(const nf_points* pts) { return pts ? pts->pts.size() : 0; }

void nf_points_copy(const nf_points* pts, double* xyz) {
  if (pts == nullptr || xyz == nullptr) return;
  for (size_t i = 0; i < pts->pts.size(); ++i) {
    for (int k = 0; k < 3; ++k) xyz[3 * i + k] = pts->pts[i][k];
  }
}

nf_status nf_refine_points(const double* uvd, size_t count, double alpha, double beta, unsigned char* keep) {
  return guard([&] {
    if (count > 0 && (uvd == nullptr || keep == nullptr)) throw ArgumentError("point buffers are NULL");
    SparseDisparityPoints pts(count);
    for (size_t i = 0; i < count; ++i) pts[i] = {uvd[3 * i], uvd[3 * i + 1], uvd[3 * i + 2]};
    const auto kept = refine_disparity_indices(pts, RefineParams{alpha, beta});
    for (size_t i = 0; i < count; ++i) keep[i] = 0;
    for (auto i : kept) keep[i] = 1;
  });
}

nf_lidar_params nf_lidar_defaults(void) {
  const RefineParams r;
  const ConsistencyParams c;
  return {1, r.alpha, r.beta, c.threshold, 0};
}

nf_status nf_lidar_process(const nf_points* pts, const nf_camera_model* cam, const nf_lidar_params* p,
                           nf_lidar** out) {
  return guard([&] {
    need_out(out);
    const auto& cloud = need(pts, "points").pts;
    const CameraModel left = to_camera(need(cam, "camera"));
    left.validate();
    const nf_lidar_params params = p ? *p : nf_lidar_defaults();
    const RefineParams rp{params.alpha, params.beta};
    if (params.refine) rp.validate();

    auto res = std::make_unique<nf_lidar>();
    res->counts.input = cloud.size();
    ProjectedPoints pl = project_points(cloud, left);
    ProjectedPoints pr = project_points(cloud, right_camera(left));
    res->counts.projected_left = pl.points.size();
    res->counts.projected_right = pr.points.size();
    std::vector<std::size_t> keep_l, keep_r;
    if (params.refine) {
      keep_l = refine_disparity_indices(pl.points, rp);
      keep_r = refine_disparity_indices(pr.points, rp);
    } else {
      for (std::size_t i = 0; i < pl.points.size(); ++i) keep_l.push_back(i);
      for (std::size_t i = 0; i < pr.points.size(); ++i) keep_r.push_back(i);
    }
    SparseDisparityPoints right_kept;
    for (auto i : keep_l) {
      res->kept_left.push_back(pl.points[i]);
      res->kept_depth.push_back(pl.depth[i]);
    }
    for (auto i : keep_r) right_kept.push_back(pr.points[i]);
    res->counts.kept_left = res->kept_left.size();
    res->counts.kept_right = right_kept.size();

    const double nan = std::numeric_limits<double>::quiet_NaN();
    const Image dl = rasterize_points(res->kept_left, left.width, left.height, nan);
    const Image dr = rasterize_points(right_kept, left.width, left.height, nan);
    ConsistencyParams cp;
    cp.threshold = params.occlusion_threshold;
    cp.mode = params.literal_reprojection ? ReprojectionMode::LITERAL : ReprojectionMode::PIXEL;
    Image occ = left_right_consistency_mask(dl, dr, left, cp);

    auto zero_nan = [](Image img) {
      for (double& v : img.data()) {
        if (std::isnan(v)) v = 0.0;
      }
      return img;
    };
    res->images[NF_LIDAR_DISPARITY_LEFT].img = zero_nan(dl);
    res->images[NF_LIDAR_DISPARITY_RIGHT].img = zero_nan(dr);
    res->images[NF_LIDAR_DEPTH_LEFT].img = disparity_to_depth(res->images[NF_LIDAR_DISPARITY_LEFT].img, left);
    for (std::size_t i = 0; i < dl.size(); ++i) {
      if (!std::isnan(dl.data()[i]) && occ.data()[i] != 0.0) ++res->counts.occluded_left;
    }
    res->images[NF_LIDAR_OCCLUSION].img = std::move(occ);
    *out = res.release();
  });
}

void nf_lidar_free(nf_lidar* res) { delete res; }

nf_lidar_counts nf_lidar_get_counts(const nf_lidar* res) { return res ? res->counts : nf_lidar_counts{}; }

const nf_image* nf_lidar_image(const nf_lidar* res, nf_lidar_output which) {
  if (res == nullptr || which < NF_LIDAR_DISPARITY_LEFT || which > NF_LIDAR_OCCLUSION) return nullptr;
  return &res->images[which];
}

nf_status nf_lidar_save_sparse(const nf_lidar* res, const char* path) {
  return guard([&] { save_sparse_points(need(res, "lidar result").kept_left, need_path(path)); });
}

nf_status nf_lidar_save_sparse_depth(const nf_lidar* res, const char* path) {
  return guard([&] {
    const nf_lidar& r = need(res, "lidar result");
    SparseDisparityPoints uvz;
    for (std::size_t i = 0; i < r.kept_left.size(); ++i) {
      uvz.push_back({r.kept_left[i].u, r.kept_left[i].v, r.kept_depth[i]});
    }
    save_sparse_points(uvz, need_path(path));
  });
}

// ---------------------------------------------------------------- stereo

nf_depth_params nf_depth_defaults(void) {
  const DepthParams d;
  nf_depth_params p{};
  p.features = NF_FEATURES_INTENSITY_GRAD;
  p.schedule = "fusion,nir";
  p.rounds = d.rounds;
  p.max_disparity = d.max_disparity;
  p.normalize_radius = d.normalize_radius;
  p.aggregation_radius = d.aggregation_radius;
  p.subpixel = d.subpixel ? 1 : 0;
  p.shift_plus = 0;
  p.fusion = NF_FUSION_HSV;
  p.hsv_alpha = d.hsv_alpha;
  p.hsv_beta = d.hsv_beta;
  p.weights = nullptr;
  return p;
}

nf_status nf_estimate_disparity(const nf_image* rgb_left, const nf_image* nir_left, const nf_image* rgb_right,
                                const nf_image* nir_right, const nf_depth_params* p, nf_image** out) {
  return guard([&] {
    need_out(out);
    const nf_depth_params in = p ? *p : nf_depth_defaults();
    DepthParams d;
    switch (in.features) {
      case NF_FEATURES_INTENSITY: d.features = FeatureMode::INTENSITY; break;
      case NF_FEATURES_INTENSITY_GRAD: d.features = FeatureMode::INTENSITY_GRAD; break;
      case NF_FEATURES_ENCODER: d.features = FeatureMode::ENCODER; break;
      default: throw ArgumentError("unknown feature mode");
    }
    d.schedule = parse_schedule(in.schedule ? in.schedule : "fusion,nir");
    d.rounds = in.rounds;
    d.max_disparity = in.max_disparity;
    d.normalize_radius = in.normalize_radius;
    d.aggregation_radius = in.aggregation_radius;
    d.subpixel = in.subpixel != 0;
    d.sign = in.shift_plus ? ShiftSign::PLUS : ShiftSign::MINUS;
    d.fusion = in.fusion == NF_FUSION_LEARNED ? FusionChoice::LEARNED : FusionChoice::HSV;
    d.hsv_alpha = in.hsv_alpha;
    d.hsv_beta = in.hsv_beta;
    d.model = in.weights ? &in.weights->model : nullptr;
    const StereoInputs s{need(rgb_left, "left rgb").img, need(nir_left, "left nir").img,
                         need(rgb_right, "right rgb").img, need(nir_right, "right nir").img};
    *out = wrap(estimate_disparity(s, d));
  });
}

// ---------------------------------------------------------------- metrics

nf_metric_config nf_metric_defaults(void) {
  const MetricConfig m;
  return {m.delta_base,
          {m.bad_pixel_thresholds[0], m.bad_pixel_thresholds[1], m.bad_pixel_thresholds[2]},
          m.gamma_l1,
          m.gamma_ssim,
          m.lidar_radius,
          m.literal_photometric ? 1 : 0};
}

nf_status nf_evaluate(const nf_image* pred, const nf_image* gt, const nf_image* mask, nf_eval_kind kind,
                      const nf_metric_config* cfg, nf_eval_report* out) {
  return guard([&] {
    need_out(out);
    const Image& p = need(pred, "prediction").img;
    const Image& g = need(gt, "reference").img;
    const Image* m = mask ? &mask->img : nullptr;
    const MetricConfig mc = to_metric(cfg);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    nf_eval_report r{};
    r.delta1 = r.delta2 = r.delta3 = nan;
    r.rate_below[0] = r.rate_below[1] = r.rate_below[2] = nan;
    r.ssim = r.psnr = r.photometric = nan;
    r.mae = mae(p, g, m);
    r.rmse = rmse(p, g, m);
    std::size_t valid = 0;
    for (std::size_t i = 0; i < p.plane_size(); ++i) valid += (m == nullptr || m->data()[i] != 0.0) ? 1 : 0;
    r.valid_samples = valid * static_cast<std::size_t>(p.channels());
    switch (kind) {
      case NF_EVAL_DEPTH: {
        const DeltaAccuracy d = delta_accuracy(p, g, m, mc);
        r.delta1 = d.delta1;
        r.delta2 = d.delta2;
        r.delta3 = d.delta3;
        break;
      }
      case NF_EVAL_DISPARITY: {
        if (mc.bad_pixel_thresholds.size() != 3) throw ArgumentError("three bad-pixel thresholds expected");
        const auto rates = bad_pixel_rates(p, g, m, mc);
        for (int i = 0; i < 3; ++i) r.rate_below[i] = rates[i];
        break;
      }
      case NF_EVAL_IMAGE:
        r.ssim = ssim(p, g, mc);
        r.psnr = psnr(p, g, m);
        r.photometric = photometric_loss(p, g, mc);
        break;
      default:
        throw ArgumentError("unknown evaluation kind");
    }
    *out = r;
  });
}

nf_status nf_lidar_neighborhood_error(const nf_image* pred, const double* uvz, size_t count,
                                      const nf_metric_config* cfg, nf_lidar_error* out) {
  return guard([&] {
    need_out(out);
    if (count > 0 && uvz == nullptr) throw ArgumentError("sample buffer is NULL");
    std::vector<LidarSample> s(count);
    for (size_t i = 0; i < count; ++i) s[i] = {uvz[3 * i], uvz[3 * i + 1], uvz[3 * i + 2]};
    const LidarError e = nirfuse::lidar_neighborhood_error(need(pred, "prediction").img, s, to_metric(cfg));
    *out = {e.sum, e.mean, e.count};
  });
}

}  // extern "C"
