#pragma once

#include <string>
#include <vector>

#include "bbinit/core.hpp"

namespace bbinit {

/// Decode a PNG file as 8-bit RGB (palette/gray/alpha inputs are converted).
Image read_png(const std::string& path);

/// Read only the extent from a PNG header.
std::pair<int, int> read_png_size(const std::string& path);

void write_png(const std::string& path, const Image& image);

/// Grayscale PNG -> 0/1 mask (values > 127 are object).
BinaryMask read_mask_png(const std::string& path);

/// 0/1 mask -> grayscale PNG with 0 = background, 255 = object.
void write_mask_png(const std::string& path, const BinaryMask& mask);

/// 16-bit grayscale PNG from raw values in [0, 65535].
void write_gray16_png(const std::string& path, int width, int height,
                      const std::vector<std::uint16_t>& values);

}  // namespace bbinit
