#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "patchseg/labels.hpp"
#include "patchseg/levelset.hpp"
#include "patchseg/region_models.hpp"

namespace patchseg {

struct SegmentationConfig {
  std::size_t patch_side = 13;
  std::size_t bases = 8;
  double alpha = 0.1;     // weight of the piecewise-smooth term
  double nu = 100.0;      // length penalty; 1 suits smooth images
  int max_steps = 600;    // curve-evolution steps
  int refresh_every = 10; // steps between model refits
  int gd_iters = 5;       // solver sweeps per basis per refit
  double sigma = 5.0;     // smooth-fit Gaussian scale, pixels
  std::uint64_t seed = 1;
  double eps = 1.5;
  int reinit_every = 25;
  /// Error fields are expressed in units of (intensity * scale)^2 before they
  /// drive the curve; 255 makes nu comparable to 8-bit intensity conventions.
  double intensity_scale = 255.0;
  double stable_fraction = 0.0005;
  int stable_steps = 20;
  BoundaryPolicy boundary = BoundaryPolicy::reflect;

  void validate() const;
};

/// Settings for piecewise-smooth content: weak length penalty and a smoothing
/// scale of half the image side, so the smooth fit sees each region globally.
SegmentationConfig smooth_image_config(std::size_t width, std::size_t height);

struct ReinitCheck {
  int step;
  double far_fraction_ok;  // share of far pixels with | |grad phi| - 1 | <= 0.2
  double mask_agreement;   // sign agreement with the pre-reinit phi
  double displacement;     // zero-set shift in pixels
};

struct RefreshRecord {
  int step;
  double energy_before;  // with the previous models on the current mask
  double energy_after;   // with the accepted refit
};

struct SegmentationResult {
  LabelMap labels;
  std::vector<RegionModel> models;  // two-phase: {inside, outside}; one-vs-all: one per target
  std::vector<double> energy_trace; // total coupled energy at each refit
  std::vector<RefreshRecord> refreshes;
  std::vector<ReinitCheck> reinit_checks;
  std::vector<std::string> warnings;
  int steps_used = 0;
  double wall_time_per_iteration = 0.0;  // seconds per evolution step
};

struct SegmentationHooks {
  std::function<void(int step, const LevelSetState& state)> on_step;
};

/// Total coupled energy: scale^2 (sum_{H} E1 + sum_{not H} E2) + nu * boundary length.
double coupled_energy(const ErrorField& e1, const ErrorField& e2, const RegionMask& inside,
                      double nu, double intensity_scale);

/// Number of 4-neighbour pixel pairs straddling the region boundary.
double boundary_length(const RegionMask& mask);

SegmentationResult segment_two_phase(const ImageGrid& img, const RegionMask& init_mask,
                                     const SegmentationConfig& cfg,
                                     const SegmentationHooks& hooks = {});

/// n two-phase runs (target vs rest). A pixel claimed by exactly one target
/// keeps that id; unclaimed or contested pixels go to the target model with the
/// smallest coupled error (ties to the lowest id).
SegmentationResult segment_one_vs_all(const ImageGrid& img, const std::vector<RegionMask>& init_masks,
                                      const SegmentationConfig& cfg,
                                      const SegmentationHooks& hooks = {});

/// Default initialization: grid of small disks covering the image.
RegionMask circle_grid_mask(std::size_t width, std::size_t height);

}  // namespace patchseg
