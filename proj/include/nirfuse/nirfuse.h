#ifndef NIRFUSE_NIRFUSE_H
#define NIRFUSE_NIRFUSE_H

/* C interface to the nirfuse library. Objects are opaque handles released
 * with their matching _free function (NULL is accepted). Every function
 * returning nf_status leaves a message for nf_last_error() on failure; the
 * message is per thread and stays valid until the next failing call on that
 * thread. Output handles are only written on success. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(NIRFUSE_BUILDING)
#define NF_API __declspec(dllexport)
#else
#define NF_API __declspec(dllimport)
#endif
#else
#define NF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum nf_status {
  NF_OK = 0,
  NF_ERR_ARGUMENT = 1, /* bad shape, channel count or parameter */
  NF_ERR_IO = 2,       /* unreadable, unwritable or truncated file */
  NF_ERR_PARSE = 3,    /* malformed config, weights or point file */
  NF_ERR_DOMAIN = 4,   /* input outside the function's domain */
  NF_ERR_NUMERIC = 5,  /* NaN or infinity in solver state */
  NF_ERR_INTERNAL = 6
} nf_status;

NF_API const char* nf_version(void);
NF_API const char* nf_status_string(nf_status status);
NF_API const char* nf_last_error(void);

/* Worker threads for row-parallel kernels; results do not depend on it. */
NF_API void nf_set_threads(int n);

/* ------------------------------------------------------------- images */

typedef struct nf_image nf_image;

typedef enum nf_image_kind {
  NF_KIND_RGB = 0,
  NF_KIND_NIR,
  NF_KIND_HSV,
  NF_KIND_YCBCR,
  NF_KIND_GRAY,
  NF_KIND_DISPARITY,
  NF_KIND_DEPTH,
  NF_KIND_NORMAL,
  NF_KIND_WEIGHT,
  NF_KIND_FEATURE,
  NF_KIND_MASK
} nf_image_kind;

typedef enum nf_format {
  NF_FORMAT_AUTO = 0, /* from the file extension: .png -> 8 bit, .pfm */
  NF_FORMAT_PNG8,
  NF_FORMAT_PNG16,
  NF_FORMAT_PFM
} nf_format;

NF_API nf_status nf_image_create(int width, int height, int channels, nf_image_kind kind, nf_image** out);
NF_API nf_status nf_image_load(const char* path, nf_image** out);
NF_API nf_status nf_image_save(const nf_image* img, const char* path, nf_format format);
NF_API nf_status nf_image_clone(const nf_image* img, nf_image** out);
NF_API void nf_image_free(nf_image* img);

NF_API int nf_image_width(const nf_image* img);
NF_API int nf_image_height(const nf_image* img);
NF_API int nf_image_channels(const nf_image* img);
NF_API nf_image_kind nf_image_get_kind(const nf_image* img);
NF_API void nf_image_set_kind(nf_image* img, nf_image_kind kind);
/* Planar samples: (c * height + y) * width + x. */
NF_API double* nf_image_data(nf_image* img);
NF_API const double* nf_image_cdata(const nf_image* img);

/* ------------------------------------------------------------- fusion */

NF_API nf_status nf_fuse_hsv(const nf_image* rgb, const nf_image* nir, double alpha, double beta, nf_image** out);
NF_API nf_status nf_fuse_hsv_weighted(const nf_image* rgb, const nf_image* nir, const nf_image* alpha,
                                      const nf_image* beta, nf_image** out);
NF_API nf_status nf_fuse_ycbcr(const nf_image* rgb, const nf_image* nir, double i_max, nf_image** out);

typedef struct nf_adaptive_params {
  double contrast_alpha;
  int window_radius;
  int gaussian_kernel;
  double gaussian_sigma; /* <= 0 derives sigma from the kernel size */
  double epsilon;
} nf_adaptive_params;

NF_API nf_adaptive_params nf_adaptive_defaults(void);
NF_API nf_status nf_fuse_adaptive(const nf_image* rgb, const nf_image* nir, const nf_adaptive_params* p,
                                  nf_image** out);

typedef struct nf_guided_params {
  int radius;
  double epsilon;
} nf_guided_params;

NF_API nf_guided_params nf_guided_defaults(void);
NF_API nf_status nf_guided_filter(const nf_image* guide, const nf_image* input, const nf_guided_params* p,
                                  nf_image** out);

typedef struct nf_tv_params {
  double lambda;
  double rho;
  int iterations;
  int inner_iterations;
  const double* k1; /* square odd-sized blur kernels, NULL = identity */
  int k1_size;
  const double* k2;
  int k2_size;
} nf_tv_params;

NF_API nf_tv_params nf_tv_defaults(void);
NF_API nf_status nf_fuse_tv(const nf_image* rgb, const nf_image* nir, const nf_tv_params* p, nf_image** out);

typedef struct nf_weights nf_weights;

NF_API nf_status nf_weights_load(const char* path, nf_weights** out);
/* All-zero model with the given feature width; mainly for tests. */
NF_API nf_status nf_weights_zeros(int in_channels, int features, int reduction, nf_weights** out);
NF_API nf_status nf_weights_save(const nf_weights* w, const char* path);
NF_API void nf_weights_free(nf_weights* w);

NF_API nf_status nf_fuse_learned(const nf_image* rgb, const nf_image* nir, const nf_weights* w,
                                 const nf_guided_params* guided, nf_image** out);

/* ------------------------------------------------------------- synthesis */

typedef struct nf_scene nf_scene;
typedef struct nf_render nf_render;

typedef enum nf_render_output {
  NF_RENDER_RGB_LEFT = 0,
  NF_RENDER_RGB_RIGHT,
  NF_RENDER_NIR_LEFT,
  NF_RENDER_NIR_RIGHT,
  NF_RENDER_DISPARITY,
  NF_RENDER_DISPARITY_RIGHT,
  NF_RENDER_VALID_LEFT,
  NF_RENDER_HOLES_RIGHT,
  NF_RENDER_NORMALS
} nf_render_output;

NF_API nf_status nf_scene_load(const char* path, nf_scene** out);
NF_API void nf_scene_free(nf_scene* scene);
NF_API nf_status nf_scene_render(const nf_scene* scene, nf_render** out);
NF_API void nf_render_free(nf_render* render);
/* Borrowed; owned by the render. */
NF_API const nf_image* nf_render_image(const nf_render* render, nf_render_output which);

/* ------------------------------------------------------------- LiDAR */

typedef struct nf_camera_model {
  double fx, fy, cx, cy;
  int width, height;
  double extrinsic[12]; /* row-major [R | t], LiDAR -> camera */
  double baseline;      /* meters */
} nf_camera_model;

NF_API nf_status nf_camera_load(const char* path, nf_camera_model* out);
NF_API nf_status nf_depth_to_disparity(double z, const nf_camera_model* cam, double* d);
NF_API nf_status nf_disparity_to_depth(double d, const nf_camera_model* cam, double* z);

typedef struct nf_points nf_points;

NF_API nf_status nf_points_load(const char* path, nf_points** out);
NF_API nf_status nf_points_create(const double* xyz, size_t count, nf_points** out);
NF_API void nf_points_free(nf_points* pts);
NF_API size_t nf_points_count(const nf_points* pts);
/* Copies 3 * count doubles. */
NF_API void nf_points_copy(const nf_points* pts, double* xyz);

/* keep[i] = 1 when point i (u, v, d triples) survives refinement. */
NF_API nf_status nf_refine_points(const double* uvd, size_t count, double alpha, double beta,
                                  unsigned char* keep);

typedef struct nf_lidar_params {
  int refine; /* apply disparity point refinement */
  double alpha;
  double beta;
  double occlusion_threshold; /* pixels */
  int literal_reprojection;   /* u_l = u_r + d * baseline / fx */
} nf_lidar_params;

typedef struct nf_lidar nf_lidar;

typedef enum nf_lidar_output {
  NF_LIDAR_DISPARITY_LEFT = 0, /* sparse, 0 where empty */
  NF_LIDAR_DISPARITY_RIGHT,
  NF_LIDAR_DEPTH_LEFT,
  NF_LIDAR_OCCLUSION /* 1 = occluded or unverifiable */
} nf_lidar_output;

typedef struct nf_lidar_counts {
  size_t input;
  size_t projected_left;
  size_t kept_left;
  size_t projected_right;
  size_t kept_right;
  size_t occluded_left; /* kept left points marked occluded */
} nf_lidar_counts;

NF_API nf_lidar_params nf_lidar_defaults(void);
/* Projects into both cameras of the rig, optionally refines each set,
 * rasterizes and runs the left-right consistency check. */
NF_API nf_status nf_lidar_process(const nf_points* pts, const nf_camera_model* cam, const nf_lidar_params* p,
                                  nf_lidar** out);
NF_API void nf_lidar_free(nf_lidar* res);
NF_API nf_lidar_counts nf_lidar_get_counts(const nf_lidar* res);
NF_API const nf_image* nf_lidar_image(const nf_lidar* res, nf_lidar_output which);
/* "u v d" lines for the kept left points. */
NF_API nf_status nf_lidar_save_sparse(const nf_lidar* res, const char* path);
/* "u v z" lines for the kept left points. */
NF_API nf_status nf_lidar_save_sparse_depth(const nf_lidar* res, const char* path);

/* ------------------------------------------------------------- stereo */

typedef enum nf_features { NF_FEATURES_INTENSITY = 0, NF_FEATURES_INTENSITY_GRAD, NF_FEATURES_ENCODER } nf_features;

typedef enum nf_fusion_choice { NF_FUSION_HSV = 0, NF_FUSION_LEARNED } nf_fusion_choice;

typedef struct nf_depth_params {
  nf_features features;
  const char* schedule; /* comma list of fusion, nir, rgb */
  int rounds;           /* 0 = one pass over the schedule */
  int max_disparity;
  int normalize_radius;
  int aggregation_radius;
  int subpixel;
  int shift_plus; /* sample the right view at x + k */
  nf_fusion_choice fusion;
  double hsv_alpha;
  double hsv_beta;
  const nf_weights* weights; /* learned fusion / encoder features */
} nf_depth_params;

NF_API nf_depth_params nf_depth_defaults(void);
NF_API nf_status nf_estimate_disparity(const nf_image* rgb_left, const nf_image* nir_left,
                                       const nf_image* rgb_right, const nf_image* nir_right,
                                       const nf_depth_params* p, nf_image** out);

/* ------------------------------------------------------------- metrics */

typedef enum nf_eval_kind { NF_EVAL_DEPTH = 0, NF_EVAL_DISPARITY, NF_EVAL_IMAGE } nf_eval_kind;

typedef struct nf_metric_config {
  double delta_base;
  double bad_pixel_thresholds[3];
  double gamma_l1;
  double gamma_ssim;
  int lidar_radius;
  int literal_photometric;
} nf_metric_config;

/* Fields that do not apply to the kind are NaN. */
typedef struct nf_eval_report {
  size_t valid_samples;
  double mae;
  double rmse;
  double delta1, delta2, delta3;   /* depth */
  double rate_below[3];            /* disparity, |e| < threshold */
  double ssim, psnr, photometric;  /* image */
} nf_eval_report;

NF_API nf_metric_config nf_metric_defaults(void);
/* mask may be NULL (all pixels); nonzero mask samples are valid. */
NF_API nf_status nf_evaluate(const nf_image* pred, const nf_image* gt, const nf_image* mask, nf_eval_kind kind,
                             const nf_metric_config* cfg, nf_eval_report* out);

typedef struct nf_lidar_error {
  double sum;
  double mean;
  size_t count;
} nf_lidar_error;

/* uvz holds count (u, v, z) triples. */
NF_API nf_status nf_lidar_neighborhood_error(const nf_image* pred, const double* uvz, size_t count,
                                             const nf_metric_config* cfg, nf_lidar_error* out);

#ifdef __cplusplus
}
#endif

#endif /* NIRFUSE_NIRFUSE_H */
