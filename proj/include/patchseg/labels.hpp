#pragma once

#include <cstddef>
#include <vector>

#include "patchseg/eigenpatch.hpp"
#include "patchseg/image_io.hpp"

namespace patchseg {

/// Integer region id per pixel. Two-phase results use 1 for region 1 (phi > 0)
/// and 0 for region 2.
class LabelMap {
 public:
  LabelMap(std::size_t width, std::size_t height, int fill = 0)
      : width_(width), height_(height), labels_(width * height, fill) {}
  static LabelMap from_mask(const RegionMask& mask);

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  std::size_t size() const { return labels_.size(); }
  int operator()(std::size_t x, std::size_t y) const { return labels_[y * width_ + x]; }
  int& operator()(std::size_t x, std::size_t y) { return labels_[y * width_ + x]; }
  const std::vector<int>& labels() const { return labels_; }
  std::vector<int>& labels() { return labels_; }

  int max_label() const;
  /// Pixels equal to `id` as a binary mask.
  RegionMask region(int id) const;

  friend bool operator==(const LabelMap&, const LabelMap&) = default;

 private:
  std::size_t width_;
  std::size_t height_;
  std::vector<int> labels_;
};

/// Fixed categorical palette (id 0 is dark gray).
RgbImage colorize(const LabelMap& labels);

}  // namespace patchseg
