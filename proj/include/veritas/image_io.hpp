#pragma once

#include <filesystem>

#include "veritas/image.hpp"

namespace veritas {

/// PNG (8/16-bit, grey/RGB, alpha dropped) or JPEG, chosen by signature.
/// Intensities are scaled to [0,1]. Throws IoError.
ImageTensor read_image(const std::filesystem::path& path);

/// 8-bit PNG with 1 or 3 channels; values are rounded from [0,1].
/// Throws IoError or InvalidArgument.
void write_png(const std::filesystem::path& path, const ImageTensor& img);

bool is_image_file(const std::filesystem::path& path);

}  // namespace veritas
