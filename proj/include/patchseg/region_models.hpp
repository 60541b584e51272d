#pragma once

#include <optional>

#include "patchseg/eigenpatch.hpp"
#include "patchseg/image.hpp"

namespace patchseg {

/// Nonnegative per-pixel error over the whole domain.
using ErrorField = ImageGrid;

/// Everything needed to score pixels against one region.
struct RegionModel {
  std::optional<PatchBasis> basis;  // absent when the patch term is unused (alpha = 1)
  ImageGrid g;                      // smooth reconstruction
  double c = 0.0;                   // region mean
  double alpha = 0.1;               // weight of the smooth term
  double sigma = 5.0;               // Gaussian scale standing in for the smoothness penalty
};

struct PcFit {
  double c;
  ErrorField err;
};

struct PsFit {
  ImageGrid g;
  ErrorField err;
};

/// Piecewise-constant fit: region mean and (I - c)^2 everywhere.
PcFit pc_fit(const ImageGrid& img, const RegionMask& mask);

/// Piecewise-smooth fit by normalized Gaussian convolution:
/// g = G*(I H) / max(G*H, 1e-8), err = (I - g)^2.
PsFit ps_fit(const ImageGrid& img, const RegionMask& mask, double sigma,
             BoundaryPolicy bp = BoundaryPolicy::reflect);

/// (1/m^2) [box_sum_sq(I) - sum_k correlate(I, v_k)^2], clamped at 0.
ErrorField patch_error_map(const ImageGrid& img, const PatchBasis& basis,
                           BoundaryPolicy bp = BoundaryPolicy::reflect);

/// alpha * smooth_err + (1 - alpha) * patch_err, pointwise.
ErrorField coupled_error(const ErrorField& smooth_err, const ErrorField& patch_err, double alpha);

/// Coupled error of a complete model; the patch term is skipped when alpha == 1.
ErrorField coupled_error(const ImageGrid& img, const RegionModel& model,
                         BoundaryPolicy bp = BoundaryPolicy::reflect);

/// H = 1 where err1 <= err2 (ties go to region 1).
RegionMask assign_labels(const ErrorField& err1, const ErrorField& err2);

/// sum over the mask of a field.
double masked_sum(const ImageGrid& field, const RegionMask& mask);

}  // namespace patchseg
