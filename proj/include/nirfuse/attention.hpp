#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "nirfuse/fusion.hpp"
#include "nirfuse/image.hpp"
#include "nirfuse/weights.hpp"

namespace nirfuse {

// Inference-only forward pass of the attention fusion stack. Feature maps
// are Images of kind FEATURE laid out channels x height x width.
using FeatureMap = Image;

/// Square convolution, zero padding of size/2. weight is [out][in][k][k].
struct Conv2d {
  int out_channels = 0;
  int in_channels = 0;
  int size = 1;
  std::vector<double> weight;
  std::vector<double> bias;  // empty = no bias

  static Conv2d zeros(int out_channels, int in_channels, int size);
};

FeatureMap conv2d(const FeatureMap& x, const Conv2d& conv, int stride);

/// Per-channel affine; gamma/beta empty means 1 / 0.
struct InstanceNorm {
  std::vector<double> gamma;
  std::vector<double> beta;
  double eps = 1e-5;
};

FeatureMap instance_norm(const FeatureMap& x, const InstanceNorm& norm);

/// Inference batch norm with stored statistics; empty vectors fall back to
/// mean 0, var 1, gamma 1, beta 0.
struct BatchNorm {
  std::vector<double> mean;
  std::vector<double> var;
  std::vector<double> gamma;
  std::vector<double> beta;
  double eps = 1e-5;
};

FeatureMap batch_norm(const FeatureMap& x, const BatchNorm& norm);

/// conv3x3(stride) -> InstanceNorm -> ReLU -> conv3x3 -> InstanceNorm -> ReLU.
struct ResidualBlockParams {
  Conv2d conv1;
  InstanceNorm norm1;
  Conv2d conv2;
  InstanceNorm norm2;

  static ResidualBlockParams zeros(int in_channels, int out_channels);
};

/// Output extent is ceil(input / stride).
FeatureMap residual_block_forward(const FeatureMap& x, const ResidualBlockParams& w, int stride);

/// conv1x1 (C -> C/r) -> BN -> ReLU -> conv1x1 (C/r -> C) -> BN.
struct AttentionBranch {
  Conv2d conv1;
  BatchNorm bn1;
  Conv2d conv2;
  BatchNorm bn2;
};

struct MSCAMParams {
  AttentionBranch local;
  AttentionBranch global;  // applied after global average pooling

  int channels() const { return local.conv1.in_channels; }
  int reduction() const;

  static MSCAMParams zeros(int channels, int reduction);
};

/// sigmoid(local(x) + broadcast(global(x))); every sample strictly in (0, 1).
FeatureMap mscam_forward(const FeatureMap& x, const MSCAMParams& p);

struct AFFParams {
  MSCAMParams rgb;     // M applied to F_rgb and to A_v
  MSCAMParams nir;     // M applied to F_nir and to A_n
  MSCAMParams fusion;  // M applied to A_u, gives the mixing weight w
};

struct AFFResult {
  FeatureMap fused;
  FeatureMap weight;
  FeatureMap attended_rgb;  // A_v
  FeatureMap attended_nir;  // A_n
};

/// A_v = F_rgb * M(F_rgb), A_n = F_nir * M(F_nir),
/// A_u = (A_v + A_n) / (M(A_v) + M(A_n)), w = M(A_u),
/// fused = A_v * w + A_n * (1 - w).
AFFResult aff_fuse(const FeatureMap& f_rgb, const FeatureMap& f_nir, const AFFParams& p);

/// Stride-2, stride-2, then stride-1 blocks: total stride 4.
struct EncoderParams {
  std::vector<ResidualBlockParams> blocks;

  int in_channels() const;
  int out_channels() const;
};

/// Scales [0, 1] input to [-1, 1], repeats a single channel to the encoder's
/// input width, and runs the blocks.
FeatureMap encode_image(const Image& img, const EncoderParams& enc);

/// Stride-1 residual blocks followed by a plain 3x3 convolution to 2 channels.
struct DecoderParams {
  std::vector<ResidualBlockParams> blocks;
  Conv2d head;
};

/// Bilinear resize by an integer factor with half-pixel centers
/// (align_corners off).
FeatureMap upsample_bilinear(const FeatureMap& x, int factor);

/// sigmoid -> x4 bilinear -> alpha = channel 0, beta = channel 1.
WeightMaps decode_weight_maps(const FeatureMap& f_fusion, const DecoderParams& dec);

inline constexpr int kEncoderStride = 4;

struct FusionModel {
  EncoderParams encoder;
  AFFParams aff;
  DecoderParams decoder;

  /// Key layout:
  ///   encoder.block{i}.{conv1,conv2}.{weight,bias}
  ///   encoder.block{i}.{norm1,norm2}.{weight,bias}
  ///   aff.{rgb,nir,fusion}.{local,global}.{conv1,conv2}.{weight,bias}
  ///   aff.{rgb,nir,fusion}.{local,global}.{bn1,bn2}.{running_mean,running_var,weight,bias}
  ///   decoder.block{i}.* as for the encoder, decoder.head.{weight,bias}
  /// Biases and norm parameters are optional. Missing required tensors or
  /// inconsistent shapes raise ParseError.
  static FusionModel from_bundle(const WeightBundle& bundle);
  WeightBundle to_bundle() const;

  /// All-zero model: encoder of two blocks in -> features, one decoder block.
  static FusionModel zeros(int in_channels, int features, int reduction);
};

struct LearnedFusionTrace {
  FeatureMap f_rgb;
  FeatureMap f_nir;
  AFFResult aff;
  WeightMaps weights;
  Image hsv_fused;
  Image filtered;
};

LearnedFusionTrace learned_image_fusion_trace(const Image& rgb, const Image& nir,
                                              const FusionModel& model,
                                              const GuidedFilterParams& guided = {});

/// encoders -> aff_fuse -> decode_weight_maps -> hsv_weighted_fusion ->
/// guided_filter with NIR as guide. Extent must be divisible by 4.
Image learned_image_fusion(const Image& rgb, const Image& nir, const FusionModel& model,
                           const GuidedFilterParams& guided = {});
Image learned_image_fusion(const Image& rgb, const Image& nir,
                           const std::filesystem::path& weights_file,
                           const GuidedFilterParams& guided = {});

}  // namespace nirfuse
