#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace nirfuse {

/// Dense row-major tensor as stored in an NFW1 weights file.
struct Tensor {
  std::vector<std::uint32_t> dims;
  std::vector<float> values;

  std::size_t numel() const;
};

/// Named tensors from an NFW1 container. Immutable after loading, so one
/// bundle can be shared by concurrent forward passes.
///
/// Layout: the 4-byte magic "NFW1", then records until end of file, each
///   u32 name_length, name bytes (UTF-8),
///   u32 rank, rank x u32 dims,
///   prod(dims) x float32 values,
/// with every integer and float little-endian.
class WeightBundle {
 public:
  WeightBundle() = default;

  static WeightBundle load(const std::filesystem::path& path);
  static WeightBundle parse(std::span<const std::uint8_t> bytes);

  std::vector<std::uint8_t> serialize() const;
  void save(const std::filesystem::path& path) const;

  void set(const std::string& name, Tensor t);
  bool contains(const std::string& name) const { return tensors_.count(name) != 0; }
  /// Throws ArgumentError when absent.
  const Tensor& get(const std::string& name) const;
  const std::map<std::string, Tensor>& tensors() const { return tensors_; }

 private:
  std::map<std::string, Tensor> tensors_;
};

}  // namespace nirfuse
