#include "patchseg/mosaic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "patchseg/error.hpp"
#include "patchseg/image_io.hpp"

namespace patchseg {

void TextureDescriptor::validate() const {
  if (kind == TextureKind::sinusoid || kind == TextureKind::bandpass_noise) {
    if (!(frequency > 0.0 && frequency < 0.5)) throw InvalidArgument("texture frequency must lie in (0, 0.5)");
  }
  if (kind == TextureKind::checker && !(period >= 2.0)) throw InvalidArgument("checker period must be >= 2");
  if (kind == TextureKind::bandpass_noise && !(bandwidth > 0.0)) throw InvalidArgument("bandwidth must be positive");
  if (kind != TextureKind::flat && !(contrast > 0.0)) throw InvalidArgument("contrast must be positive");
}

void MosaicSpec::validate() const {
  if (textures.size() < 2) throw InvalidArgument("a mosaic needs at least two textures");
  if (size < 4 * patch_side) throw InvalidArgument("mosaic size must be at least 4m");
  if (!(noise_sd >= 0.0)) throw InvalidArgument("noise_sd must be nonnegative");
  for (const TextureSource& t : textures)
    if (t.synthetic) t.synthetic->validate();
}

TextureKind parse_texture_kind(const std::string& name) {
  if (name == "sinusoid") return TextureKind::sinusoid;
  if (name == "checker") return TextureKind::checker;
  if (name == "bandpass_noise") return TextureKind::bandpass_noise;
  if (name == "flat") return TextureKind::flat;
  throw InvalidArgument("unknown texture kind: " + name);
}

std::string texture_kind_name(TextureKind kind) {
  switch (kind) {
    case TextureKind::sinusoid: return "sinusoid";
    case TextureKind::checker: return "checker";
    case TextureKind::bandpass_noise: return "bandpass_noise";
    case TextureKind::flat: return "flat";
  }
  return "unknown";
}

namespace {

// Gabor-filtered white noise rescaled to the RMS of a unit sinusoid.
ImageGrid bandpass_pattern(const TextureDescriptor& t, std::size_t size) {
  std::mt19937_64 rng(t.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  ImageGrid noise(size, size, 0.0);
  for (double& v : noise.values()) v = normal(rng);

  const double sigma = 1.0 / (2.0 * std::numbers::pi * t.bandwidth * t.frequency);
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  const std::size_t side = 2 * static_cast<std::size_t>(radius) + 1;
  const double c = std::cos(t.orientation), s = std::sin(t.orientation);
  Patch kernel(side);
  for (int v = -radius; v <= radius; ++v)
    for (int u = -radius; u <= radius; ++u) {
      const double env = std::exp(-(u * u + v * v) / (2.0 * sigma * sigma));
      kernel(u, v) = env * std::cos(2.0 * std::numbers::pi * t.frequency * (u * c + v * s));
    }
  if (side > size) throw InvalidArgument("bandpass texture kernel exceeds the mosaic size");
  ImageGrid out = correlate(noise, kernel, BoundaryPolicy::reflect);
  double sum = 0.0, sum_sq = 0.0;
  for (double v : out.values()) {
    sum += v;
    sum_sq += v * v;
  }
  const double n = static_cast<double>(out.size());
  const double mean = sum / n;
  const double rms = std::sqrt(std::max(sum_sq / n - mean * mean, 0.0));
  const double gain = rms > 0.0 ? std::numbers::sqrt2 / 2.0 / rms : 0.0;
  for (double& v : out.values()) v = (v - mean) * gain;
  return out;
}

}  // namespace

ImageGrid render_texture(const TextureSource& tex, std::size_t size) {
  if (!tex.synthetic) {
    const ImageGrid src = read_image(tex.image);
    ImageGrid out(size, size, 0.0);
    for (std::size_t y = 0; y < size; ++y)
      for (std::size_t x = 0; x < size; ++x) out(x, y) = src(x % src.width(), y % src.height());
    return out;
  }
  const TextureDescriptor& t = *tex.synthetic;
  t.validate();
  if (t.kind == TextureKind::flat) return ImageGrid(size, size, t.level);

  ImageGrid pattern(size, size, 0.0);
  if (t.kind == TextureKind::bandpass_noise) {
    pattern = bandpass_pattern(t, size);
  } else {
    const double c = std::cos(t.orientation), s = std::sin(t.orientation);
    for (std::size_t y = 0; y < size; ++y)
      for (std::size_t x = 0; x < size; ++x) {
        const double xd = static_cast<double>(x), yd = static_cast<double>(y);
        if (t.kind == TextureKind::sinusoid) {
          pattern(x, y) = std::sin(2.0 * std::numbers::pi * t.frequency * (xd * c + yd * s));
        } else {
          const auto cell = [&](double p) { return static_cast<long>(std::floor(2.0 * p / t.period)); };
          pattern(x, y) = ((cell(xd) + cell(yd)) % 2 == 0) ? 1.0 : -1.0;
        }
      }
  }
  for (double& v : pattern.values()) v = 0.5 + t.contrast * v;
  return pattern;
}

LabelMap make_template(const std::string& name, std::size_t size) {
  LabelMap out(size, size, 0);
  if (name == "right-half") {
    for (std::size_t y = 0; y < size; ++y)
      for (std::size_t x = size / 2; x < size; ++x) out(x, y) = 1;
    return out;
  }
  if (name == "cross") {
    const double n = static_cast<double>(size);
    const double lo = n / 4.0, hi = 3.0 * n / 4.0;
    for (std::size_t y = 0; y < size; ++y)
      for (std::size_t x = 0; x < size; ++x) {
        const double px = x + 0.5, py = y + 0.5;
        if (px >= lo && px < hi && py >= lo && py < hi) {
          out(x, y) = 4;
          continue;
        }
        // Frame split along the diagonals through the image center.
        const double dx = px - n / 2.0, dy = py - n / 2.0;
        if (std::abs(dy) >= std::abs(dx)) out(x, y) = dy < 0 ? 0 : 1;
        else out(x, y) = dx < 0 ? 2 : 3;
      }
    return out;
  }
  const ImageGrid mask = read_image(name);
  if (mask.width() != size || mask.height() != size)
    throw DimensionMismatch("template image must be " + std::to_string(size) + "x" + std::to_string(size));
  for (std::size_t y = 0; y < size; ++y)
    for (std::size_t x = 0; x < size; ++x) out(x, y) = mask(x, y) >= 0.5 ? 1 : 0;
  return out;
}

Mosaic make_mosaic(const MosaicSpec& spec) {
  spec.validate();
  LabelMap truth = make_template(spec.template_name, spec.size);
  const int regions = truth.max_label() + 1;
  if (regions > static_cast<int>(spec.textures.size()))
    throw InvalidArgument("template has " + std::to_string(regions) + " regions but only " +
                          std::to_string(spec.textures.size()) + " textures were given");

  ImageGrid img(spec.size, spec.size, 0.0);
  for (int r = 0; r < regions; ++r) {
    const ImageGrid tex = render_texture(spec.textures[static_cast<std::size_t>(r)], spec.size);
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < img.size(); ++i)
      if (truth.labels()[i] == r) {
        sum += tex.values()[i];
        ++count;
      }
    const double shift = (spec.zero_mean && count > 0) ? sum / static_cast<double>(count) : 0.0;
    for (std::size_t i = 0; i < img.size(); ++i)
      if (truth.labels()[i] == r) img.values()[i] = tex.values()[i] - shift;
  }
  if (spec.noise_sd > 0.0) {
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> normal(0.0, spec.noise_sd);
    for (double& v : img.values()) v += normal(rng);
  }
  return {std::move(img), std::move(truth)};
}

std::vector<RegionMask> seed_masks(const LabelMap& regions, double radius) {
  std::vector<RegionMask> out;
  const int n = regions.max_label() + 1;
  for (int r = 0; r < n; ++r) {
    double sx = 0.0, sy = 0.0;
    std::size_t count = 0;
    for (std::size_t y = 0; y < regions.height(); ++y)
      for (std::size_t x = 0; x < regions.width(); ++x)
        if (regions(x, y) == r) {
          sx += static_cast<double>(x);
          sy += static_cast<double>(y);
          ++count;
        }
    if (count == 0) throw InvalidArgument("region " + std::to_string(r) + " is empty");
    const double cx = sx / static_cast<double>(count), cy = sy / static_cast<double>(count);
    ImageGrid g(regions.width(), regions.height(), 0.0);
    for (std::size_t y = 0; y < regions.height(); ++y)
      for (std::size_t x = 0; x < regions.width(); ++x) {
        const double dx = static_cast<double>(x) - cx, dy = static_cast<double>(y) - cy;
        if (regions(x, y) == r && dx * dx + dy * dy <= radius * radius) g(x, y) = 1.0;
      }
    out.emplace_back(std::move(g));
  }
  return out;
}

namespace {

TextureSource bandpass(double theta, double freq, double bandwidth, std::uint64_t seed) {
  TextureDescriptor t;
  t.kind = TextureKind::bandpass_noise;
  t.orientation = theta;
  t.frequency = freq;
  t.bandwidth = bandwidth;
  t.seed = seed;
  return TextureSource{t, {}};
}

}  // namespace

std::vector<MosaicSpec> structure_only_pairs(std::size_t size) {
  using std::numbers::pi;
  const std::vector<std::pair<TextureSource, TextureSource>> pairs = {
      {bandpass(0.0, 0.125, 0.35, 11), bandpass(pi / 2, 0.125, 0.35, 12)},
      {bandpass(pi / 4, 0.1, 0.35, 13), bandpass(3 * pi / 4, 0.1, 0.35, 14)},
      {bandpass(0.0, 0.08, 0.35, 15), bandpass(0.0, 0.2, 0.35, 16)},
      {bandpass(pi / 6, 0.15, 0.35, 17), bandpass(2 * pi / 3, 0.1, 0.35, 18)},
      {bandpass(pi / 2, 0.18, 0.35, 24), bandpass(0.0, 0.09, 0.35, 25)},
      {bandpass(0.0, 0.125, 0.2, 19), bandpass(pi / 3, 0.125, 0.2, 20)},
      {bandpass(pi / 4, 0.16, 0.5, 21), bandpass(-pi / 4, 0.16, 0.5, 22)},
      {bandpass(pi / 8, 0.1, 0.25, 23), bandpass(5 * pi / 8, 0.14, 0.25, 26)},
      {bandpass(0.0, 0.2, 0.3, 27), bandpass(pi / 2, 0.07, 0.3, 28)},
      {bandpass(pi / 3, 0.12, 0.35, 29), bandpass(-pi / 6, 0.12, 0.35, 30)},
  };
  std::vector<MosaicSpec> out;
  std::uint64_t seed = 100;
  for (const auto& [a, b] : pairs) {
    MosaicSpec s;
    s.textures = {a, b};
    s.zero_mean = true;
    s.size = size;
    s.seed = seed++;
    out.push_back(std::move(s));
  }
  return out;
}

MosaicSpec cross_mosaic_spec(std::size_t size) {
  using std::numbers::pi;
  MosaicSpec s;
  s.template_name = "cross";
  s.zero_mean = true;
  s.size = size;
  s.textures = {bandpass(0.0, 0.125, 0.35, 41), bandpass(pi / 2, 0.125, 0.35, 42),
                bandpass(pi / 4, 0.1, 0.35, 43), bandpass(3 * pi / 4, 0.1, 0.35, 44),
                bandpass(0.0, 0.2, 0.35, 45)};
  return s;
}

}  // namespace patchseg
