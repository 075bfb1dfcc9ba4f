#include "nirfuse/attention.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "nirfuse/color.hpp"
#include "nirfuse/parallel.hpp"

namespace nirfuse {

namespace {

double sigmoid(double v) {
  static const double lo = std::numeric_limits<double>::min();
  static const double hi = std::nextafter(1.0, 0.0);
  return std::clamp(1.0 / (1.0 + std::exp(-v)), lo, hi);
}

double relu(double v) { return v > 0.0 ? v : 0.0; }

void apply_relu(FeatureMap& x) {
  for (double& v : x.data()) v = relu(v);
}

double param_or(const std::vector<double>& v, int c, double fallback) {
  return v.empty() ? fallback : v[static_cast<std::size_t>(c)];
}

void check_param_size(const std::vector<double>& v, int channels, const char* what) {
  if (!v.empty() && static_cast<int>(v.size()) != channels) {
    throw ArgumentError(std::string(what) + ": parameter length does not match channel count");
  }
}

}  // namespace

// ---------------------------------------------------------------- layers

Conv2d Conv2d::zeros(int out_channels, int in_channels, int size) {
  Conv2d c;
  c.out_channels = out_channels;
  c.in_channels = in_channels;
  c.size = size;
  c.weight.assign(static_cast<std::size_t>(out_channels) * in_channels * size * size, 0.0);
  c.bias.assign(static_cast<std::size_t>(out_channels), 0.0);
  return c;
}

FeatureMap conv2d(const FeatureMap& x, const Conv2d& conv, int stride) {
  if (x.channels() != conv.in_channels) {
    throw ArgumentError("conv2d: input has " + std::to_string(x.channels()) + " channels, weights expect " +
                        std::to_string(conv.in_channels));
  }
  if (conv.size < 1 || conv.size % 2 == 0 || stride < 1) throw ArgumentError("conv2d: bad kernel or stride");
  const std::size_t expect =
      static_cast<std::size_t>(conv.out_channels) * conv.in_channels * conv.size * conv.size;
  if (conv.weight.size() != expect) throw ArgumentError("conv2d: weight size mismatch");
  check_param_size(conv.bias, conv.out_channels, "conv2d bias");

  const int pad = conv.size / 2;
  const int h = x.height(), w = x.width();
  const int oh = (h + 2 * pad - conv.size) / stride + 1;
  const int ow = (w + 2 * pad - conv.size) / stride + 1;
  FeatureMap out(ow, oh, conv.out_channels, ImageKind::FEATURE);
  const int k = conv.size;
  parallel_rows(conv.out_channels * oh, [&](int row) {
    const int o = row / oh, y = row % oh;
    const double b = param_or(conv.bias, o, 0.0);
    for (int xo = 0; xo < ow; ++xo) {
      double acc = b;
      for (int i = 0; i < conv.in_channels; ++i) {
        const double* wk = conv.weight.data() + (static_cast<std::size_t>(o) * conv.in_channels + i) * k * k;
        for (int ky = 0; ky < k; ++ky) {
          const int yy = y * stride + ky - pad;
          if (yy < 0 || yy >= h) continue;
          for (int kx = 0; kx < k; ++kx) {
            const int xx = xo * stride + kx - pad;
            if (xx < 0 || xx >= w) continue;
            acc += wk[ky * k + kx] * x.at(i, yy, xx);
          }
        }
      }
      out.at(o, y, xo) = acc;
    }
  });
  return out;
}

FeatureMap instance_norm(const FeatureMap& x, const InstanceNorm& norm) {
  check_param_size(norm.gamma, x.channels(), "instance_norm gamma");
  check_param_size(norm.beta, x.channels(), "instance_norm beta");
  FeatureMap out = x;
  const double n = static_cast<double>(x.plane_size());
  for (int c = 0; c < x.channels(); ++c) {
    auto p = out.plane(c);
    double mean = 0.0;
    for (double v : p) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : p) var += (v - mean) * (v - mean);
    var /= n;
    const double scale = param_or(norm.gamma, c, 1.0) / std::sqrt(var + norm.eps);
    const double shift = param_or(norm.beta, c, 0.0);
    for (double& v : p) v = (v - mean) * scale + shift;
  }
  return out;
}

FeatureMap batch_norm(const FeatureMap& x, const BatchNorm& norm) {
  check_param_size(norm.mean, x.channels(), "batch_norm mean");
  check_param_size(norm.var, x.channels(), "batch_norm var");
  check_param_size(norm.gamma, x.channels(), "batch_norm gamma");
  check_param_size(norm.beta, x.channels(), "batch_norm beta");
  FeatureMap out = x;
  for (int c = 0; c < x.channels(); ++c) {
    const double mean = param_or(norm.mean, c, 0.0);
    const double scale = param_or(norm.gamma, c, 1.0) / std::sqrt(param_or(norm.var, c, 1.0) + norm.eps);
    const double shift = param_or(norm.beta, c, 0.0);
    for (double& v : out.plane(c)) v = (v - mean) * scale + shift;
  }
  return out;
}

ResidualBlockParams ResidualBlockParams::zeros(int in_channels, int out_channels) {
  ResidualBlockParams p;
  p.conv1 = Conv2d::zeros(out_channels, in_channels, 3);
  p.conv2 = Conv2d::zeros(out_channels, out_channels, 3);
  p.norm1.gamma.assign(static_cast<std::size_t>(out_channels), 0.0);
  p.norm1.beta.assign(static_cast<std::size_t>(out_channels), 0.0);
  p.norm2 = p.norm1;
  return p;
}

FeatureMap residual_block_forward(const FeatureMap& x, const ResidualBlockParams& w, int stride) {
  FeatureMap y = instance_norm(conv2d(x, w.conv1, stride), w.norm1);
  apply_relu(y);
  y = instance_norm(conv2d(y, w.conv2, 1), w.norm2);
  apply_relu(y);
  return y;
}

// ---------------------------------------------------------------- MS-CAM

int MSCAMParams::reduction() const {
  const int hidden = local.conv1.out_channels;
  return hidden > 0 ? channels() / hidden : 0;
}

MSCAMParams MSCAMParams::zeros(int channels, int reduction) {
  if (reduction < 1 || channels % reduction != 0) {
    throw ArgumentError("MS-CAM channels must be divisible by the reduction");
  }
  MSCAMParams p;
  for (AttentionBranch* b : {&p.local, &p.global}) {
    b->conv1 = Conv2d::zeros(channels / reduction, channels, 1);
    b->conv2 = Conv2d::zeros(channels, channels / reduction, 1);
  }
  return p;
}

namespace {

FeatureMap branch_forward(const FeatureMap& x, const AttentionBranch& b) {
  FeatureMap y = batch_norm(conv2d(x, b.conv1, 1), b.bn1);
  apply_relu(y);
  return batch_norm(conv2d(y, b.conv2, 1), b.bn2);
}

FeatureMap global_average_pool(const FeatureMap& x) {
  FeatureMap out(1, 1, x.channels(), ImageKind::FEATURE);
  for (int c = 0; c < x.channels(); ++c) {
    double s = 0.0;
    for (double v : x.plane(c)) s += v;
    out.at(c, 0, 0) = s / static_cast<double>(x.plane_size());
  }
  return out;
}

}  // namespace

FeatureMap mscam_forward(const FeatureMap& x, const MSCAMParams& p) {
  if (x.channels() != p.channels()) throw ArgumentError("mscam_forward: channel mismatch");
  if (p.local.conv1.size != 1 || p.local.conv2.size != 1 || p.global.conv1.size != 1 ||
      p.global.conv2.size != 1) {
    throw ArgumentError("mscam_forward: attention convolutions must be 1x1");
  }
  FeatureMap local = branch_forward(x, p.local);
  const FeatureMap global = branch_forward(global_average_pool(x), p.global);
  for (int c = 0; c < local.channels(); ++c) {
    const double g = global.at(c, 0, 0);
    for (double& v : local.plane(c)) v = sigmoid(v + g);
  }
  return local;
}

AFFResult aff_fuse(const FeatureMap& f_rgb, const FeatureMap& f_nir, const AFFParams& p) {
  if (!f_rgb.same_shape(f_nir)) throw ArgumentError("aff_fuse: feature shapes differ");
  AFFResult r;
  r.attended_rgb = f_rgb;
  r.attended_nir = f_nir;
  {
    const FeatureMap m_rgb = mscam_forward(f_rgb, p.rgb);
    const FeatureMap m_nir = mscam_forward(f_nir, p.nir);
    auto av = r.attended_rgb.data(), an = r.attended_nir.data();
    for (std::size_t i = 0; i < av.size(); ++i) {
      av[i] *= m_rgb.data()[i];
      an[i] *= m_nir.data()[i];
    }
  }
  const FeatureMap m_av = mscam_forward(r.attended_rgb, p.rgb);
  const FeatureMap m_an = mscam_forward(r.attended_nir, p.nir);
  FeatureMap unified(f_rgb.width(), f_rgb.height(), f_rgb.channels(), ImageKind::FEATURE);
  auto av = r.attended_rgb.data(), an = r.attended_nir.data();
  for (std::size_t i = 0; i < av.size(); ++i) {
    unified.data()[i] = (av[i] + an[i]) / (m_av.data()[i] + m_an.data()[i] + 1e-12);
  }
  r.weight = mscam_forward(unified, p.fusion);
  r.fused = FeatureMap(f_rgb.width(), f_rgb.height(), f_rgb.channels(), ImageKind::FEATURE);
  auto w = r.weight.data();
  for (std::size_t i = 0; i < av.size(); ++i) {
    // Same value as av*w + an*(1-w); this form is exact when av == an.
    const double v = an[i] + w[i] * (av[i] - an[i]);
    r.fused.data()[i] = std::clamp(v, std::min(av[i], an[i]), std::max(av[i], an[i]));
  }
  return r;
}

// ---------------------------------------------------------------- encoder / decoder

int EncoderParams::in_channels() const { return blocks.empty() ? 0 : blocks.front().conv1.in_channels; }
int EncoderParams::out_channels() const { return blocks.empty() ? 0 : blocks.back().conv2.out_channels; }

FeatureMap encode_image(const Image& img, const EncoderParams& enc) {
  if (enc.blocks.size() < 2) throw ArgumentError("encoder needs at least two blocks");
  const int want = enc.in_channels();
  if (img.channels() != want && img.channels() != 1) {
    throw ArgumentError("encode_image: image has " + std::to_string(img.channels()) +
                        " channels, encoder expects " + std::to_string(want));
  }
  FeatureMap x(img.width(), img.height(), want, ImageKind::FEATURE);
  for (int c = 0; c < want; ++c) {
    auto src = img.plane(img.channels() == 1 ? 0 : c);
    auto dst = x.plane(c);
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = 2.0 * src[i] - 1.0;
  }
  for (std::size_t b = 0; b < enc.blocks.size(); ++b) {
    x = residual_block_forward(x, enc.blocks[b], b < 2 ? 2 : 1);
  }
  return x;
}

FeatureMap upsample_bilinear(const FeatureMap& x, int factor) {
  if (factor < 1) throw ArgumentError("upsample factor must be >= 1");
  const int h = x.height(), w = x.width();
  FeatureMap out(w * factor, h * factor, x.channels(), x.kind());
  auto source = [factor](int dst, int n, int& i0, int& i1, double& t) {
    double s = (dst + 0.5) / factor - 0.5;
    if (s < 0.0) s = 0.0;
    i0 = std::min(static_cast<int>(std::floor(s)), n - 1);
    i1 = std::min(i0 + 1, n - 1);
    t = s - i0;
  };
  for (int y = 0; y < out.height(); ++y) {
    int y0, y1;
    double ty;
    source(y, h, y0, y1, ty);
    for (int xo = 0; xo < out.width(); ++xo) {
      int x0, x1;
      double tx;
      source(xo, w, x0, x1, tx);
      for (int c = 0; c < x.channels(); ++c) {
        const double top = x.at(c, y0, x0) + tx * (x.at(c, y0, x1) - x.at(c, y0, x0));
        const double bot = x.at(c, y1, x0) + tx * (x.at(c, y1, x1) - x.at(c, y1, x0));
        out.at(c, y, xo) = top + ty * (bot - top);
      }
    }
  }
  return out;
}

WeightMaps decode_weight_maps(const FeatureMap& f_fusion, const DecoderParams& dec) {
  if (dec.head.out_channels != 2) throw ArgumentError("decoder head must produce 2 channels");
  FeatureMap x = f_fusion;
  for (const auto& block : dec.blocks) x = residual_block_forward(x, block, 1);
  x = conv2d(x, dec.head, 1);
  for (double& v : x.data()) v = sigmoid(v);
  const FeatureMap up = upsample_bilinear(x, kEncoderStride);
  WeightMaps maps{up.channel(0, ImageKind::WEIGHT), up.channel(1, ImageKind::WEIGHT)};
  for (Image* m : {&maps.alpha, &maps.beta}) {
    for (double& v : m->data()) v = clamp01(v);
  }
  return maps;
}

// ---------------------------------------------------------------- weight bundle mapping

namespace {

std::vector<double> to_double(const Tensor& t) { return {t.values.begin(), t.values.end()}; }

Tensor to_tensor(const std::vector<double>& v, std::vector<std::uint32_t> dims) {
  Tensor t;
  t.dims = std::move(dims);
  t.values.assign(v.begin(), v.end());
  return t;
}

[[noreturn]] void bad_shape(const std::string& name, const std::string& why) {
  throw ParseError("weights tensor '" + name + "': " + why);
}

Conv2d read_conv(const WeightBundle& b, const std::string& prefix) {
  const std::string wname = prefix + ".weight";
  if (!b.contains(wname)) throw ParseError("weights file lacks required tensor '" + wname + "'");
  const Tensor& t = b.get(wname);
  if (t.dims.size() != 4 || t.dims[2] != t.dims[3] || t.dims[2] % 2 == 0) {
    bad_shape(wname, "expected [out, in, k, k] with odd k");
  }
  Conv2d c;
  c.out_channels = static_cast<int>(t.dims[0]);
  c.in_channels = static_cast<int>(t.dims[1]);
  c.size = static_cast<int>(t.dims[2]);
  c.weight = to_double(t);
  const std::string bname = prefix + ".bias";
  if (b.contains(bname)) {
    const Tensor& bt = b.get(bname);
    if (bt.dims.size() != 1 || static_cast<int>(bt.dims[0]) != c.out_channels) {
      bad_shape(bname, "expected [out]");
    }
    c.bias = to_double(bt);
  }
  return c;
}

std::vector<double> read_vector(const WeightBundle& b, const std::string& name, int channels) {
  if (!b.contains(name)) return {};
  const Tensor& t = b.get(name);
  if (t.dims.size() != 1 || static_cast<int>(t.dims[0]) != channels) {
    bad_shape(name, "expected [" + std::to_string(channels) + "]");
  }
  return to_double(t);
}

ResidualBlockParams read_block(const WeightBundle& b, const std::string& prefix) {
  ResidualBlockParams p;
  p.conv1 = read_conv(b, prefix + ".conv1");
  p.conv2 = read_conv(b, prefix + ".conv2");
  if (p.conv1.size != 3 || p.conv2.size != 3) bad_shape(prefix, "residual block convolutions must be 3x3");
  if (p.conv2.in_channels != p.conv1.out_channels) bad_shape(prefix + ".conv2.weight", "input channels mismatch");
  p.norm1.gamma = read_vector(b, prefix + ".norm1.weight", p.conv1.out_channels);
  p.norm1.beta = read_vector(b, prefix + ".norm1.bias", p.conv1.out_channels);
  p.norm2.gamma = read_vector(b, prefix + ".norm2.weight", p.conv2.out_channels);
  p.norm2.beta = read_vector(b, prefix + ".norm2.bias", p.conv2.out_channels);
  return p;
}

BatchNorm read_bn(const WeightBundle& b, const std::string& prefix, int channels) {
  BatchNorm n;
  n.mean = read_vector(b, prefix + ".running_mean", channels);
  n.var = read_vector(b, prefix + ".running_var", channels);
  n.gamma = read_vector(b, prefix + ".weight", channels);
  n.beta = read_vector(b, prefix + ".bias", channels);
  for (double v : n.var) {
    if (!(v >= 0.0)) bad_shape(prefix + ".running_var", "variance must be non-negative");
  }
  return n;
}

AttentionBranch read_branch(const WeightBundle& b, const std::string& prefix) {
  AttentionBranch br;
  br.conv1 = read_conv(b, prefix + ".conv1");
  br.conv2 = read_conv(b, prefix + ".conv2");
  if (br.conv1.size != 1 || br.conv2.size != 1) bad_shape(prefix, "attention convolutions must be 1x1");
  if (br.conv2.in_channels != br.conv1.out_channels || br.conv2.out_channels != br.conv1.in_channels) {
    bad_shape(prefix, "attention branch must map C -> C/r -> C");
  }
  br.bn1 = read_bn(b, prefix + ".bn1", br.conv1.out_channels);
  br.bn2 = read_bn(b, prefix + ".bn2", br.conv2.out_channels);
  return br;
}

MSCAMParams read_mscam(const WeightBundle& b, const std::string& prefix) {
  MSCAMParams p;
  p.local = read_branch(b, prefix + ".local");
  p.global = read_branch(b, prefix + ".global");
  if (p.local.conv1.in_channels != p.global.conv1.in_channels) bad_shape(prefix, "branch widths differ");
  if (p.local.conv1.in_channels % p.local.conv1.out_channels != 0) {
    bad_shape(prefix, "channels not divisible by the reduction");
  }
  return p;
}

void write_conv(WeightBundle& b, const std::string& prefix, const Conv2d& c) {
  const auto k = static_cast<std::uint32_t>(c.size);
  b.set(prefix + ".weight", to_tensor(c.weight, {static_cast<std::uint32_t>(c.out_channels),
                                                static_cast<std::uint32_t>(c.in_channels), k, k}));
  if (!c.bias.empty()) b.set(prefix + ".bias", to_tensor(c.bias, {static_cast<std::uint32_t>(c.out_channels)}));
}

void write_vector(WeightBundle& b, const std::string& name, const std::vector<double>& v) {
  if (!v.empty()) b.set(name, to_tensor(v, {static_cast<std::uint32_t>(v.size())}));
}

void write_block(WeightBundle& b, const std::string& prefix, const ResidualBlockParams& p) {
  write_conv(b, prefix + ".conv1", p.conv1);
  write_conv(b, prefix + ".conv2", p.conv2);
  write_vector(b, prefix + ".norm1.weight", p.norm1.gamma);
  write_vector(b, prefix + ".norm1.bias", p.norm1.beta);
  write_vector(b, prefix + ".norm2.weight", p.norm2.gamma);
  write_vector(b, prefix + ".norm2.bias", p.norm2.beta);
}

void write_branch(WeightBundle& b, const std::string& prefix, const AttentionBranch& br) {
  write_conv(b, prefix + ".conv1", br.conv1);
  write_conv(b, prefix + ".conv2", br.conv2);
  for (const auto& [name, bn] : {std::pair{".bn1", &br.bn1}, std::pair{".bn2", &br.bn2}}) {
    write_vector(b, prefix + name + ".running_mean", bn->mean);
    write_vector(b, prefix + name + ".running_var", bn->var);
    write_vector(b, prefix + name + ".weight", bn->gamma);
    write_vector(b, prefix + name + ".bias", bn->beta);
  }
}

}  // namespace

FusionModel FusionModel::from_bundle(const WeightBundle& bundle) {
  FusionModel m;
  for (int i = 0; bundle.contains("encoder.block" + std::to_string(i) + ".conv1.weight"); ++i) {
    m.encoder.blocks.push_back(read_block(bundle, "encoder.block" + std::to_string(i)));
  }
  if (m.encoder.blocks.size() < 2) throw ParseError("weights file needs at least two encoder blocks");
  for (std::size_t i = 1; i < m.encoder.blocks.size(); ++i) {
    if (m.encoder.blocks[i].conv1.in_channels != m.encoder.blocks[i - 1].conv2.out_channels) {
      throw ParseError("encoder block " + std::to_string(i) + " input channels mismatch");
    }
  }
  m.aff.rgb = read_mscam(bundle, "aff.rgb");
  m.aff.nir = read_mscam(bundle, "aff.nir");
  m.aff.fusion = read_mscam(bundle, "aff.fusion");
  const int features = m.encoder.out_channels();
  for (const MSCAMParams* p : {&m.aff.rgb, &m.aff.nir, &m.aff.fusion}) {
    if (p->channels() != features) throw ParseError("attention width differs from encoder output");
  }
  int channels = features;
  for (int i = 0; bundle.contains("decoder.block" + std::to_string(i) + ".conv1.weight"); ++i) {
    m.decoder.blocks.push_back(read_block(bundle, "decoder.block" + std::to_string(i)));
    if (m.decoder.blocks.back().conv1.in_channels != channels) {
      throw ParseError("decoder block " + std::to_string(i) + " input channels mismatch");
    }
    channels = m.decoder.blocks.back().conv2.out_channels;
  }
  m.decoder.head = read_conv(bundle, "decoder.head");
  if (m.decoder.head.out_channels != 2 || m.decoder.head.in_channels != channels) {
    throw ParseError("decoder head must map " + std::to_string(channels) + " channels to 2");
  }
  return m;
}

WeightBundle FusionModel::to_bundle() const {
  WeightBundle b;
  for (std::size_t i = 0; i < encoder.blocks.size(); ++i) {
    write_block(b, "encoder.block" + std::to_string(i), encoder.blocks[i]);
  }
  for (const auto& [name, p] : {std::pair{"aff.rgb", &aff.rgb}, std::pair{"aff.nir", &aff.nir},
                                std::pair{"aff.fusion", &aff.fusion}}) {
    write_branch(b, std::string(name) + ".local", p->local);
    write_branch(b, std::string(name) + ".global", p->global);
  }
  for (std::size_t i = 0; i < decoder.blocks.size(); ++i) {
    write_block(b, "decoder.block" + std::to_string(i), decoder.blocks[i]);
  }
  write_conv(b, "decoder.head", decoder.head);
  return b;
}

FusionModel FusionModel::zeros(int in_channels, int features, int reduction) {
  FusionModel m;
  m.encoder.blocks.push_back(ResidualBlockParams::zeros(in_channels, features));
  m.encoder.blocks.push_back(ResidualBlockParams::zeros(features, features));
  m.aff.rgb = MSCAMParams::zeros(features, reduction);
  m.aff.nir = m.aff.rgb;
  m.aff.fusion = m.aff.rgb;
  m.decoder.blocks.push_back(ResidualBlockParams::zeros(features, features));
  m.decoder.head = Conv2d::zeros(2, features, 3);
  return m;
}

// ---------------------------------------------------------------- full pipeline

LearnedFusionTrace learned_image_fusion_trace(const Image& rgb, const Image& nir, const FusionModel& model,
                                              const GuidedFilterParams& guided) {
  require_channels(rgb, 3, "learned_image_fusion rgb");
  require_channels(nir, 1, "learned_image_fusion nir");
  require_same_extent(rgb, nir, "learned_image_fusion");
  if (rgb.width() % kEncoderStride != 0 || rgb.height() % kEncoderStride != 0) {
    throw ArgumentError("learned_image_fusion: image extent must be divisible by 4");
  }
  LearnedFusionTrace t;
  t.f_rgb = encode_image(rgb, model.encoder);
  t.f_nir = encode_image(nir, model.encoder);
  t.aff = aff_fuse(t.f_rgb, t.f_nir, model.aff);
  t.weights = decode_weight_maps(t.aff.fused, model.decoder);
  t.hsv_fused = hsv_weighted_fusion(rgb, nir, t.weights);
  t.filtered = guided_filter(nir, t.hsv_fused, guided);
  t.filtered.set_kind(ImageKind::RGB);
  return t;
}

Image learned_image_fusion(const Image& rgb, const Image& nir, const FusionModel& model,
                           const GuidedFilterParams& guided) {
  return learned_image_fusion_trace(rgb, nir, model, guided).filtered;
}

Image learned_image_fusion(const Image& rgb, const Image& nir, const std::filesystem::path& weights_file,
                           const GuidedFilterParams& guided) {
  const FusionModel model = FusionModel::from_bundle(WeightBundle::load(weights_file));
  return learned_image_fusion(rgb, nir, model, guided);
}

}  // namespace nirfuse
