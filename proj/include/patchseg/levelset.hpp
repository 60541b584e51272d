#pragma once

#include "patchseg/eigenpatch.hpp"
#include "patchseg/image.hpp"
#include "patchseg/region_models.hpp"

namespace patchseg {

/// Signed distance function (positive inside region 1) with the parameters
/// that generate H(phi) and drive its evolution.
struct LevelSetState {
  ImageGrid phi;
  double eps = 1.5;  // Heaviside regularization width, pixels
  double nu = 0.0;   // length penalty
  double dt = 0.1;   // time step used by evolve_step
};

double heaviside_value(double phi, double eps);
double dirac_value(double phi, double eps);

/// Signed distance to the boundary of `mask`, positive inside.
LevelSetState init_from_mask(const RegionMask& mask, double eps = 1.5, double nu = 0.0);

ImageGrid heaviside(const LevelSetState& state);
ImageGrid dirac(const LevelSetState& state);

/// Region 1 as a binary mask (phi > 0).
RegionMask inside_mask(const LevelSetState& state);

/// div(grad phi / |grad phi|) with central differences and replicated borders.
ImageGrid curvature(const LevelSetState& state);

/// Largest stable explicit step for the given forcing:
/// 0.45 / (max |e1 - e2| delta + 4 nu max delta + 1e-12).
double cfl_time_step(const LevelSetState& state, const ErrorField& e1, const ErrorField& e2);

/// phi += dt [ -(e1 - e2) delta(phi) + nu delta(phi) curvature ]
LevelSetState evolve_step(const LevelSetState& state, const ErrorField& e1, const ErrorField& e2);

/// Rebuilds phi as the signed distance to its own zero crossing. The crossing
/// is located to subpixel accuracy by linear interpolation along grid edges,
/// so the sign of every pixel is kept.
LevelSetState reinitialize(const LevelSetState& state);

/// Godunov upwind |grad phi| (reads 1 on medial-axis ridges of an exact SDF).
ImageGrid gradient_norm_upwind(const ImageGrid& phi);

struct SdfQuality {
  double far_fraction_ok;  // share of pixels with |phi| > 2 whose | |grad phi| - 1 | <= 0.2
  std::size_t far_pixels;
};

SdfQuality sdf_quality(const ImageGrid& phi);

/// Largest |after| at the sub-pixel zero crossings of `before` along grid
/// edges; for a distance-like `after` this bounds how far the front moved.
double zero_set_displacement(const ImageGrid& before, const ImageGrid& after);

}  // namespace patchseg
