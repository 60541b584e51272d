#include "patchseg/metrics.hpp"

#include <algorithm>

#include "patchseg/error.hpp"

namespace patchseg {

LabelMap LabelMap::from_mask(const RegionMask& mask) {
  LabelMap out(mask.width(), mask.height());
  const auto h = mask.grid().values();
  for (std::size_t i = 0; i < h.size(); ++i) out.labels_[i] = h[i] != 0.0 ? 1 : 0;
  return out;
}

int LabelMap::max_label() const { return *std::max_element(labels_.begin(), labels_.end()); }

RegionMask LabelMap::region(int id) const {
  ImageGrid g(width_, height_, 0.0);
  auto v = g.values();
  for (std::size_t i = 0; i < labels_.size(); ++i) v[i] = labels_[i] == id ? 1.0 : 0.0;
  return RegionMask(std::move(g));
}

RgbImage colorize(const LabelMap& labels) {
  static constexpr std::uint8_t kPalette[][3] = {
      {64, 64, 64},   {230, 25, 75},  {60, 180, 75},  {255, 225, 25}, {0, 130, 200},
      {245, 130, 48}, {145, 30, 180}, {70, 240, 240}, {240, 50, 230}, {210, 245, 60}};
  constexpr std::size_t kColors = sizeof(kPalette) / sizeof(kPalette[0]);
  RgbImage out{labels.width(), labels.height(), std::vector<std::uint8_t>(labels.size() * 3)};
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto id = static_cast<std::size_t>(std::max(labels.labels()[i], 0)) % kColors;
    std::copy(kPalette[id], kPalette[id] + 3, out.rgb.begin() + static_cast<long>(3 * i));
  }
  return out;
}

namespace {

bool is_binary(const LabelMap& m) {
  return std::all_of(m.labels().begin(), m.labels().end(), [](int v) { return v == 0 || v == 1; });
}

SegmentationMetrics score(const LabelMap& labels, const LabelMap& truth, bool swap) {
  const int regions = std::max(truth.max_label(), 1) + 1;
  SegmentationMetrics m;
  m.error_rate_per_region.assign(static_cast<std::size_t>(regions), 0.0);
  m.permuted = swap;
  const double n = static_cast<double>(truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) {
    int l = labels.labels()[i];
    if (swap) l = 1 - l;
    const int t = truth.labels()[i];
    if (l != t) m.error_rate_per_region[static_cast<std::size_t>(t)] += 1.0 / n;
  }
  for (double e : m.error_rate_per_region) m.total_error += e;
  return m;
}

}  // namespace

SegmentationMetrics evaluate(const LabelMap& labels, const LabelMap& truth) {
  if (labels.width() != truth.width() || labels.height() != truth.height())
    throw DimensionMismatch("label map and ground truth differ in shape");
  for (int t : truth.labels())
    if (t < 0) throw InvalidArgument("ground-truth labels must be nonnegative");
  SegmentationMetrics direct = score(labels, truth, false);
  if (is_binary(labels) && is_binary(truth)) {
    SegmentationMetrics swapped = score(labels, truth, true);
    if (swapped.total_error < direct.total_error) return swapped;
  }
  return direct;
}

double agreement(const LabelMap& a, const LabelMap& b) {
  if (a.width() != b.width() || a.height() != b.height())
    throw DimensionMismatch("label maps differ in shape");
  std::size_t same = 0;
  for (std::size_t i = 0; i < a.size(); ++i) same += a.labels()[i] == b.labels()[i];
  return static_cast<double>(same) / static_cast<double>(a.size());
}

}  // namespace patchseg
