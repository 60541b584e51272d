#pragma once

#include <vector>

#include "patchseg/labels.hpp"

namespace patchseg {

struct SegmentationMetrics {
  /// Share of all pixels that belong to true region i but were labeled otherwise.
  std::vector<double> error_rate_per_region;
  double total_error = 0.0;  // fraction of mislabeled pixels (sum of the above)
  bool permuted = false;     // two-phase only: labels were swapped to score
};

/// Pixel-wise error rate. When both maps are two-phase ({0,1}), the label
/// permutation with the smaller error is used.
SegmentationMetrics evaluate(const LabelMap& labels, const LabelMap& truth);

/// Fraction of pixels where two label maps agree.
double agreement(const LabelMap& a, const LabelMap& b);

}  // namespace patchseg
