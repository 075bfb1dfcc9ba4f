#pragma once

#include <filesystem>
#include <optional>

#include "nirfuse/image.hpp"

namespace nirfuse {

enum class ImageFormat { PNG8, PNG16, PFM };

/// Guess a format from the file extension (.png -> PNG8, .pfm -> PFM).
std::optional<ImageFormat> format_from_extension(const std::filesystem::path& path);

/// PNG loads scale to [0, 1]; 1-channel files become GRAY and 3-channel files
/// RGB. Alpha channels are dropped and palettes expanded. PNG8 and PNG16
/// both accept either bit depth on load.
Image load_image(const std::filesystem::path& path, ImageFormat format);
/// Sniffs the file signature.
Image load_image(const std::filesystem::path& path);

/// PFM stores 1 or 3 channels as little-endian float32, rows bottom-up.
/// PNG clamps to [0, 1] and rounds to the nearest code.
void save_image(const Image& img, const std::filesystem::path& path, ImageFormat format);

}  // namespace nirfuse
