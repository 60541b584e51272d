#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "patchseg/image.hpp"

namespace patchseg {

/// 8-bit RGB raster used for visual dumps (palettes, overlays).
struct RgbImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> rgb;  // 3 bytes per pixel, row-major
};

/// Reads 8-bit PGM (P5) or PNG; intensities are mapped to [0, 1]. Color
/// PNGs are converted to luma (Rec. 601 weights).
ImageGrid read_image(const std::filesystem::path& path);

/// Writes 8-bit grayscale; values are clamped to [0, 1] before quantizing.
/// Format chosen from the extension (.pgm or .png).
void write_image(const std::filesystem::path& path, const ImageGrid& img);

void write_png_rgb(const std::filesystem::path& path, const RgbImage& img);

/// Linearly maps [min, max] of the field onto [0, 1] (constant fields map to 0).
ImageGrid normalize_range(const ImageGrid& img);

/// Grayscale image with the zero crossing of phi drawn in red.
RgbImage contour_overlay(const ImageGrid& img, const ImageGrid& phi);

}  // namespace patchseg
