#include "nirfuse/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace nirfuse {

namespace fs = std::filesystem;

namespace {

constexpr long long kMaxDimension = 1 << 16;

std::vector<std::uint8_t> read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failure on '" + path.string() + "'");
  return bytes;
}

void write_file(const fs::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

// ---------------------------------------------------------------- PFM

std::uint32_t float_bits(float f) { return std::bit_cast<std::uint32_t>(f); }

void put_le32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::vector<std::uint8_t> encode_pfm(const Image& img) {
  if (img.channels() != 1 && img.channels() != 3) {
    throw ArgumentError("PFM stores 1 or 3 channels, got " + std::to_string(img.channels()));
  }
  std::string header = img.channels() == 3 ? "PF\n" : "Pf\n";
  header += std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n-1.0\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + img.size() * 4);
  for (int y = img.height() - 1; y >= 0; --y) {
    for (int x = 0; x < img.width(); ++x) {
      for (int c = 0; c < img.channels(); ++c) {
        put_le32(out, float_bits(static_cast<float>(img.at(c, y, x))));
      }
    }
  }
  return out;
}

Image decode_pfm(const std::vector<std::uint8_t>& bytes, const std::string& name) {
  std::size_t pos = 0;
  auto next_token = [&]() -> std::string {
    while (pos < bytes.size() && std::isspace(bytes[pos])) ++pos;
    std::string tok;
    while (pos < bytes.size() && !std::isspace(bytes[pos])) tok.push_back(static_cast<char>(bytes[pos++]));
    if (tok.empty()) throw IoError("truncated PFM header in '" + name + "'");
    return tok;
  };
  const std::string magic = next_token();
  int channels = 0;
  if (magic == "PF") {
    channels = 3;
  } else if (magic == "Pf") {
    channels = 1;
  } else {
    throw IoError("'" + name + "' is not a PFM file");
  }
  long long width = 0, height = 0;
  double scale = 0.0;
  try {
    width = std::stoll(next_token());
    height = std::stoll(next_token());
    scale = std::stod(next_token());
  } catch (const std::logic_error&) {
    throw IoError("malformed PFM header in '" + name + "'");
  }
  if (width <= 0 || height <= 0 || width > kMaxDimension || height > kMaxDimension) {
    throw IoError("PFM dimensions out of range in '" + name + "'");
  }
  if (scale == 0.0 || !std::isfinite(scale)) {
    throw IoError("PFM scale must be a non-zero finite number in '" + name + "'");
  }
  ++pos;  // single whitespace byte terminates the header
  const bool little = scale < 0.0;
  const std::size_t need = static_cast<std::size_t>(width * height * channels) * 4;
  if (bytes.size() < pos || bytes.size() - pos < need) {
    throw IoError("truncated PFM payload in '" + name + "'");
  }
  Image img(static_cast<int>(width), static_cast<int>(height), channels,
            channels == 3 ? ImageKind::RGB : ImageKind::GRAY);
  const std::uint8_t* p = bytes.data() + pos;
  for (int y = img.height() - 1; y >= 0; --y) {
    for (int x = 0; x < img.width(); ++x) {
      for (int c = 0; c < channels; ++c, p += 4) {
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) {
          const int shift = little ? 8 * i : 8 * (3 - i);
          v |= static_cast<std::uint32_t>(p[i]) << shift;
        }
        img.at(c, y, x) = static_cast<double>(std::bit_cast<float>(v));
      }
    }
  }
  return img;
}

// ---------------------------------------------------------------- PNG

struct PngContext {
  std::jmp_buf jump;
  char message[256] = {};
  const std::vector<std::uint8_t>* input = nullptr;
  std::size_t offset = 0;
  std::vector<std::uint8_t>* output = nullptr;
};

void png_fail(png_structp png, png_const_charp msg) {
  auto* ctx = static_cast<PngContext*>(png_get_error_ptr(png));
  std::snprintf(ctx->message, sizeof ctx->message, "%s", msg);
  std::longjmp(ctx->jump, 1);
}

void png_warn(png_structp, png_const_charp) {}

void png_read_mem(png_structp png, png_bytep dst, png_size_t n) {
  auto* ctx = static_cast<PngContext*>(png_get_io_ptr(png));
  if (ctx->offset + n > ctx->input->size()) png_error(png, "truncated PNG stream");
  std::memcpy(dst, ctx->input->data() + ctx->offset, n);
  ctx->offset += n;
}

void png_write_mem(png_structp png, png_bytep src, png_size_t n) {
  auto* ctx = static_cast<PngContext*>(png_get_io_ptr(png));
  ctx->output->insert(ctx->output->end(), src, src + n);
}

void png_flush_mem(png_structp) {}

struct RawPng {
  png_uint_32 width = 0;
  png_uint_32 height = 0;
  int channels = 0;
  int bit_depth = 0;
  std::vector<std::uint8_t> pixels;
  std::vector<png_bytep> rows;
};

// No C++ object with a destructor may live in this frame across setjmp.
bool decode_png_raw(PngContext& ctx, RawPng& raw) {
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &ctx, png_fail, png_warn);
  if (!png) {
    std::snprintf(ctx.message, sizeof ctx.message, "libpng init failed");
    return false;
  }
  png_infop info = png_create_info_struct(png);
  if (setjmp(ctx.jump)) {
    png_destroy_read_struct(&png, &info, nullptr);
    return false;
  }
  if (!info) png_error(png, "libpng info init failed");
  png_set_read_fn(png, &ctx, png_read_mem);
  png_read_info(png, info);
  const int color = png_get_color_type(png, info);
  const int depth = png_get_bit_depth(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  if (depth == 16 && std::endian::native == std::endian::little) png_set_swap(png);
  png_read_update_info(png, info);
  raw.width = png_get_image_width(png, info);
  raw.height = png_get_image_height(png, info);
  raw.channels = png_get_channels(png, info);
  raw.bit_depth = png_get_bit_depth(png, info);
  if (raw.width == 0 || raw.height == 0 || raw.width > kMaxDimension || raw.height > kMaxDimension) {
    png_error(png, "PNG dimensions out of range");
  }
  if (raw.bit_depth != 8 && raw.bit_depth != 16) png_error(png, "unsupported PNG bit depth");
  if (raw.channels != 1 && raw.channels != 3) png_error(png, "unsupported PNG channel layout");
  const std::size_t stride = png_get_rowbytes(png, info);
  raw.pixels.resize(stride * raw.height);
  raw.rows.resize(raw.height);
  for (png_uint_32 y = 0; y < raw.height; ++y) raw.rows[y] = raw.pixels.data() + y * stride;
  png_read_image(png, raw.rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return true;
}

bool encode_png_raw(PngContext& ctx, RawPng& raw) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &ctx, png_fail, png_warn);
  if (!png) {
    std::snprintf(ctx.message, sizeof ctx.message, "libpng init failed");
    return false;
  }
  png_infop info = png_create_info_struct(png);
  if (setjmp(ctx.jump)) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  if (!info) png_error(png, "libpng info init failed");
  png_set_write_fn(png, &ctx, png_write_mem, png_flush_mem);
  png_set_IHDR(png, info, raw.width, raw.height, raw.bit_depth,
               raw.channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  if (raw.bit_depth == 16 && std::endian::native == std::endian::little) png_set_swap(png);
  png_write_image(png, raw.rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

Image decode_png(const std::vector<std::uint8_t>& bytes, const std::string& name) {
  PngContext ctx;
  ctx.input = &bytes;
  RawPng raw;
  if (!decode_png_raw(ctx, raw)) {
    throw IoError("cannot decode PNG '" + name + "': " + ctx.message);
  }
  Image img(static_cast<int>(raw.width), static_cast<int>(raw.height), raw.channels,
            raw.channels == 3 ? ImageKind::RGB : ImageKind::GRAY);
  const double maxv = raw.bit_depth == 16 ? 65535.0 : 255.0;
  for (int y = 0; y < img.height(); ++y) {
    const png_bytep row = raw.rows[static_cast<std::size_t>(y)];
    for (int x = 0; x < img.width(); ++x) {
      for (int c = 0; c < raw.channels; ++c) {
        const std::size_t i = static_cast<std::size_t>(x) * raw.channels + c;
        double v = 0.0;
        if (raw.bit_depth == 16) {
          std::uint16_t s = 0;
          std::memcpy(&s, row + 2 * i, 2);
          v = s;
        } else {
          v = row[i];
        }
        img.at(c, y, x) = v / maxv;
      }
    }
  }
  return img;
}

std::vector<std::uint8_t> encode_png(const Image& img, int bit_depth) {
  if (img.channels() != 1 && img.channels() != 3) {
    throw ArgumentError("PNG stores 1 or 3 channels, got " + std::to_string(img.channels()));
  }
  if (img.width() == 0 || img.height() == 0) throw ArgumentError("cannot encode an empty PNG");
  RawPng raw;
  raw.width = static_cast<png_uint_32>(img.width());
  raw.height = static_cast<png_uint_32>(img.height());
  raw.channels = img.channels();
  raw.bit_depth = bit_depth;
  const std::size_t bytes_per_sample = bit_depth == 16 ? 2 : 1;
  const std::size_t stride = raw.width * raw.channels * bytes_per_sample;
  raw.pixels.resize(stride * raw.height);
  raw.rows.resize(raw.height);
  const double maxv = bit_depth == 16 ? 65535.0 : 255.0;
  for (int y = 0; y < img.height(); ++y) {
    std::uint8_t* row = raw.pixels.data() + static_cast<std::size_t>(y) * stride;
    raw.rows[static_cast<std::size_t>(y)] = row;
    for (int x = 0; x < img.width(); ++x) {
      for (int c = 0; c < img.channels(); ++c) {
        const double v = img.at(c, y, x);
        const double q = std::nearbyint(clamp01(std::isnan(v) ? 0.0 : v) * maxv);
        const std::size_t i = static_cast<std::size_t>(x) * raw.channels + c;
        if (bit_depth == 16) {
          const auto s = static_cast<std::uint16_t>(q);
          std::memcpy(row + 2 * i, &s, 2);
        } else {
          row[i] = static_cast<std::uint8_t>(q);
        }
      }
    }
  }
  std::vector<std::uint8_t> out;
  PngContext ctx;
  ctx.output = &out;
  if (!encode_png_raw(ctx, raw)) throw IoError(std::string("cannot encode PNG: ") + ctx.message);
  return out;
}

bool is_png(const std::vector<std::uint8_t>& bytes) {
  return bytes.size() >= 8 && png_sig_cmp(bytes.data(), 0, 8) == 0;
}

}  // namespace

std::optional<ImageFormat> format_from_extension(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (ext == ".png") return ImageFormat::PNG8;
  if (ext == ".pfm") return ImageFormat::PFM;
  return std::nullopt;
}

Image load_image(const fs::path& path, ImageFormat format) {
  const auto bytes = read_file(path);
  if (format == ImageFormat::PFM) return decode_pfm(bytes, path.string());
  return decode_png(bytes, path.string());
}

Image load_image(const fs::path& path) {
  const auto bytes = read_file(path);
  if (is_png(bytes)) return decode_png(bytes, path.string());
  return decode_pfm(bytes, path.string());
}

void save_image(const Image& img, const fs::path& path, ImageFormat format) {
  std::vector<std::uint8_t> bytes;
  switch (format) {
    case ImageFormat::PFM: bytes = encode_pfm(img); break;
    case ImageFormat::PNG8: bytes = encode_png(img, 8); break;
    case ImageFormat::PNG16: bytes = encode_png(img, 16); break;
  }
  write_file(path, bytes);
}

}  // namespace nirfuse
