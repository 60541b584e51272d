#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "patchseg/eigenpatch.hpp"
#include "patchseg/labels.hpp"

namespace patchseg {

enum class TextureKind { sinusoid, checker, bandpass_noise, flat };

/// Parametric synthetic texture. Pixel value = 0.5 + contrast * pattern, where
/// sinusoid and checker patterns have unit peak and bandpass noise has the RMS
/// of a unit sinusoid (flat textures are the constant `level`).
struct TextureDescriptor {
  TextureKind kind = TextureKind::sinusoid;
  double orientation = 0.0;  // radians; sinusoid and bandpass_noise
  double frequency = 0.125;  // cycles per pixel, < 0.5
  double period = 8.0;       // checker: pixels per full cycle, >= 2
  double bandwidth = 0.35;   // bandpass_noise: Gaussian envelope sigma = 1 / (2 pi bandwidth frequency)
  std::uint64_t seed = 0;    // bandpass_noise
  double level = 0.5;        // flat
  double contrast = 0.25;

  void validate() const;
};

/// Either a synthetic descriptor or an image file tiled to size.
struct TextureSource {
  std::optional<TextureDescriptor> synthetic;
  std::filesystem::path image;
};

struct MosaicSpec {
  /// textures[i] fills template region i.
  std::vector<TextureSource> textures;
  /// "right-half" (2 regions), "cross" (5 regions) or a mask image path
  /// (pixels >= 0.5 form region 1).
  std::string template_name = "right-half";
  bool zero_mean = false;
  std::size_t size = 128;
  double noise_sd = 0.0;
  std::uint64_t seed = 1;  // pixel noise
  std::size_t patch_side = 13;  // only used to check size >= 4m

  void validate() const;
};

struct Mosaic {
  ImageGrid image;
  LabelMap truth;  // template region id per pixel
};

/// Renders one texture over a size x size canvas.
ImageGrid render_texture(const TextureSource& tex, std::size_t size);

/// Region ids of a built-in or file template. The cross layout numbers
/// its regions top 0, bottom 1, left 2, right 3, center 4.
LabelMap make_template(const std::string& name, std::size_t size);

Mosaic make_mosaic(const MosaicSpec& spec);

/// One disk per region, centered at the region centroid and clipped to the
/// region; disjoint initial masks for one-against-all runs.
std::vector<RegionMask> seed_masks(const LabelMap& regions, double radius);

/// Parses "sinusoid", "checker", "bandpass_noise" or "flat".
TextureKind parse_texture_kind(const std::string& name);
std::string texture_kind_name(TextureKind kind);

/// Ten structure-only pairs (equal mean, differing structure) used by the
/// segmentation benchmarks; deterministic.
std::vector<MosaicSpec> structure_only_pairs(std::size_t size = 128);

/// Five bandpass textures on the cross template (zero mean).
MosaicSpec cross_mosaic_spec(std::size_t size = 128);

}  // namespace patchseg
