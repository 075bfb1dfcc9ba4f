#include "nirfuse/weights.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "nirfuse/error.hpp"

namespace nirfuse {

namespace {

constexpr char kMagic[4] = {'N', 'F', 'W', '1'};
constexpr std::uint32_t kMaxRank = 8;
constexpr std::size_t kMaxElements = std::size_t{1} << 31;

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  bool done() const { return pos_ == bytes_.size(); }

  std::uint32_t u32() {
    need(4, "integer");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }

  std::string text(std::size_t n) {
    need(n, "tensor name");
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }

  float f32() { return std::bit_cast<float>(u32()); }

 private:
  void need(std::size_t n, const char* what) {
    if (bytes_.size() - pos_ < n) {
      throw ParseError(std::string("weights file truncated while reading ") + what);
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

}  // namespace

std::size_t Tensor::numel() const {
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

WeightBundle WeightBundle::parse(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw ParseError("weights file does not start with the NFW1 magic");
  }
  Reader r(bytes.subspan(4));
  WeightBundle bundle;
  while (!r.done()) {
    const std::uint32_t name_len = r.u32();
    if (name_len == 0 || name_len > 4096) throw ParseError("weights file has an invalid name length");
    std::string name = r.text(name_len);
    const std::uint32_t rank = r.u32();
    if (rank > kMaxRank) throw ParseError("tensor '" + name + "' has rank above 8");
    Tensor t;
    std::size_t count = 1;
    for (std::uint32_t i = 0; i < rank; ++i) {
      const std::uint32_t d = r.u32();
      if (d == 0) throw ParseError("tensor '" + name + "' has a zero dimension");
      t.dims.push_back(d);
      count *= d;
      if (count > kMaxElements) throw ParseError("tensor '" + name + "' is too large");
    }
    t.values.resize(count);
    for (std::size_t i = 0; i < count; ++i) t.values[i] = r.f32();
    if (bundle.contains(name)) throw ParseError("duplicate tensor '" + name + "'");
    bundle.tensors_.emplace(std::move(name), std::move(t));
  }
  return bundle;
}

WeightBundle WeightBundle::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open weights file '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return parse(bytes);
}

std::vector<std::uint8_t> WeightBundle::serialize() const {
  std::vector<std::uint8_t> out(kMagic, kMagic + 4);
  for (const auto& [name, t] : tensors_) {
    put_u32(out, static_cast<std::uint32_t>(name.size()));
    out.insert(out.end(), name.begin(), name.end());
    put_u32(out, static_cast<std::uint32_t>(t.dims.size()));
    for (auto d : t.dims) put_u32(out, d);
    for (float v : t.values) put_u32(out, std::bit_cast<std::uint32_t>(v));
  }
  return out;
}

void WeightBundle::save(const std::filesystem::path& path) const {
  const auto bytes = serialize();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

void WeightBundle::set(const std::string& name, Tensor t) {
  if (t.values.size() != t.numel()) throw ArgumentError("tensor '" + name + "' value count mismatch");
  tensors_[name] = std::move(t);
}

const Tensor& WeightBundle::get(const std::string& name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw ArgumentError("weights bundle lacks tensor '" + name + "'");
  return it->second;
}

}  // namespace nirfuse
