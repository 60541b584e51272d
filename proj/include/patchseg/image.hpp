#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace patchseg {

/// Real-valued scalar field on a width x height pixel lattice, row-major.
/// Holds images, error maps, level-set functions and masks alike.
class ImageGrid {
 public:
  ImageGrid(std::size_t width, std::size_t height, double fill = 0.0);
  ImageGrid(std::size_t width, std::size_t height, std::vector<double> values);

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  std::size_t size() const { return values_.size(); }

  double operator()(std::size_t x, std::size_t y) const { return values_[y * width_ + x]; }
  double& operator()(std::size_t x, std::size_t y) { return values_[y * width_ + x]; }
  double at(std::size_t x, std::size_t y) const;

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  std::span<const double> row(std::size_t y) const { return {values_.data() + y * width_, width_}; }
  std::span<double> row(std::size_t y) { return {values_.data() + y * width_, width_}; }

  bool same_shape(const ImageGrid& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }
  bool all_finite() const;

  friend bool operator==(const ImageGrid&, const ImageGrid&) = default;

 private:
  std::size_t width_;
  std::size_t height_;
  std::vector<double> values_;
};

/// Square m x m window with m odd; (u, v) offsets run over [-m/2, m/2].
class Patch {
 public:
  explicit Patch(std::size_t side);
  Patch(std::size_t side, std::vector<double> values);

  std::size_t side() const { return side_; }
  std::size_t radius() const { return side_ / 2; }
  std::size_t size() const { return values_.size(); }

  /// Offsets relative to the center.
  double operator()(int u, int v) const;
  double& operator()(int u, int v);

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  friend bool operator==(const Patch&, const Patch&) = default;

 private:
  std::size_t side_;
  std::vector<double> values_;
};

enum class BoundaryPolicy { reflect, replicate };

/// Maps a possibly out-of-range index onto [0, n). reflect mirrors about
/// the outer pixel edge (..., 1, 0 | 0, 1, ..., n-1 | n-1, n-2, ...).
std::size_t boundary_index(long long i, std::size_t n, BoundaryPolicy bp);

/// Image extended by `pad` pixels on every side according to a policy.
struct PaddedImage {
  std::size_t width;   // of the source image
  std::size_t height;
  std::size_t pad;
  std::vector<double> data;  // (width + 2 pad) x (height + 2 pad)

  std::size_t stride() const { return width + 2 * pad; }
  /// Pointer to source pixel (x, y); valid offsets reach +-pad around it.
  const double* at(long long x, long long y) const {
    return data.data() + (y + static_cast<long long>(pad)) * static_cast<long long>(stride()) +
           (x + static_cast<long long>(pad));
  }
};

PaddedImage pad_image(const ImageGrid& img, std::size_t pad, BoundaryPolicy bp);

Patch extract_patch(const ImageGrid& img, std::size_t x, std::size_t y, std::size_t m,
                    BoundaryPolicy bp = BoundaryPolicy::reflect);

double patch_dot(const Patch& a, const Patch& b);
double patch_norm(const Patch& a);

/// out(x, y) = sum_{u,v} img(x + u, y + v) k(u, v); same shape as img.
ImageGrid correlate(const ImageGrid& img, const Patch& kernel,
                    BoundaryPolicy bp = BoundaryPolicy::reflect);

/// Same as correlate on an image that was padded once by at least k.radius().
ImageGrid correlate_padded(const PaddedImage& padded, const Patch& kernel);

/// Per-pixel sum of squared intensities over the m x m window (integral image).
ImageGrid box_sum_sq(const ImageGrid& img, std::size_t m,
                     BoundaryPolicy bp = BoundaryPolicy::reflect);

/// Separable Gaussian smoothing, kernel truncated at ceil(3 sigma).
ImageGrid gaussian_blur(const ImageGrid& img, double sigma,
                        BoundaryPolicy bp = BoundaryPolicy::reflect);

ImageGrid multiply(const ImageGrid& a, const ImageGrid& b);

}  // namespace patchseg
