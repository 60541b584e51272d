#include "patchseg/segmenter.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "patchseg/error.hpp"

namespace patchseg {

void SegmentationConfig::validate() const {
  if (patch_side % 2 == 0 || patch_side < 1) throw InvalidArgument("patch side must be odd");
  if (bases < 1 || bases > patch_side * patch_side) throw InvalidArgument("bases must be in [1, m^2]");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InvalidArgument("alpha must lie in [0, 1]");
  if (!(nu >= 0.0)) throw InvalidArgument("nu must be nonnegative");
  if (max_steps < 1 || refresh_every < 1 || gd_iters < 1 || reinit_every < 1 || stable_steps < 1)
    throw InvalidArgument("iteration counts must be positive");
  if (!(sigma > 0.0) || !(eps > 0.0) || !(intensity_scale > 0.0))
    throw InvalidArgument("sigma, eps and intensity_scale must be positive");
  if (!(stable_fraction >= 0.0)) throw InvalidArgument("stable_fraction must be nonnegative");
}

SegmentationConfig smooth_image_config(std::size_t width, std::size_t height) {
  SegmentationConfig cfg;
  cfg.nu = 1.0;
  cfg.sigma = static_cast<double>(std::max(width, height)) / 2.0;
  return cfg;
}

double boundary_length(const RegionMask& mask) {
  const ImageGrid& h = mask.grid();
  double len = 0.0;
  for (std::size_t y = 0; y < h.height(); ++y)
    for (std::size_t x = 0; x < h.width(); ++x) {
      if (x + 1 < h.width() && h(x, y) != h(x + 1, y)) len += 1.0;
      if (y + 1 < h.height() && h(x, y) != h(x, y + 1)) len += 1.0;
    }
  return len;
}

double coupled_energy(const ErrorField& e1, const ErrorField& e2, const RegionMask& inside,
                      double nu, double intensity_scale) {
  const double data = masked_sum(e1, inside) + masked_sum(e2, inside.complement());
  return intensity_scale * intensity_scale * data + nu * boundary_length(inside);
}

RegionMask circle_grid_mask(std::size_t width, std::size_t height) {
  const double radius = std::max(3.0, std::round(static_cast<double>(std::min(width, height)) / 16.0));
  const double spacing = 3.0 * radius;
  ImageGrid g(width, height, 0.0);
  for (std::size_t y = 0; y < height; ++y)
    for (std::size_t x = 0; x < width; ++x) {
      // Nearest grid center, grid offset by half a spacing from the corner.
      const double cx = (std::floor(static_cast<double>(x) / spacing) + 0.5) * spacing;
      const double cy = (std::floor(static_cast<double>(y) / spacing) + 0.5) * spacing;
      const double dx = static_cast<double>(x) - cx;
      const double dy = static_cast<double>(y) - cy;
      if (dx * dx + dy * dy <= radius * radius) g(x, y) = 1.0;
    }
  return RegionMask(std::move(g));
}

namespace {

// Current model of one region plus the error fields it induces.
class RegionFitter {
 public:
  RegionFitter(const ImageGrid& img, const SegmentationConfig& cfg, std::string name)
      : img_(img), cfg_(cfg), name_(std::move(name)),
        model_{std::nullopt, ImageGrid(img.width(), img.height(), 0.0), 0.0, cfg.alpha, cfg.sigma} {}

  // Data term of this region on `mask` with the current model.
  double data_term(const RegionMask& mask) const {
    double total = 0.0;
    if (uses_smooth() && smooth_err_) total += cfg_.alpha * masked_sum(*smooth_err_, mask);
    if (uses_patch() && patch_err_) total += (1.0 - cfg_.alpha) * masked_sum(*patch_err_, mask);
    return total;
  }

  void refit(const RegionMask& mask, std::vector<std::string>& warnings, int step) {
    const std::size_t count = mask.count();
    if (count > 0) model_.c = masked_sum(img_, mask) / static_cast<double>(count);

    if (uses_smooth()) {
      PsFit fit = ps_fit(img_, mask, cfg_.sigma, cfg_.boundary);
      if (!smooth_err_ || masked_sum(fit.err, mask) <= masked_sum(*smooth_err_, mask)) {
        model_.g = std::move(fit.g);
        smooth_err_ = std::move(fit.err);
      }
    }

    if (uses_patch()) {
      const std::size_t m = cfg_.patch_side;
      std::optional<PatchBasis> fresh;
      if (count < m * m) {
        warnings.push_back("step " + std::to_string(step) + ": " + name_ + " has " + std::to_string(count) +
                           " pixels (< m^2); patch term frozen");
      } else {
        GdConfig gd = segmentation_gd_config(cfg_.gd_iters, cfg_.seed);
        gd.boundary = cfg_.boundary;
        gd.warm_start = model_.basis;
        try {
          fresh = gd_solve_basis(img_, mask, m, cfg_.bases, gd).first;
        } catch (const DegenerateRegion&) {
          warnings.push_back("step " + std::to_string(step) + ": " + name_ +
                             " is degenerate (zero masked image); patch term frozen");
        }
      }
      if (fresh) {
        ErrorField err = patch_error_map(img_, *fresh, cfg_.boundary);
        if (!patch_err_ || masked_sum(err, mask) <= masked_sum(*patch_err_, mask)) {
          model_.basis = std::move(fresh);
          patch_err_ = std::move(err);
        }
      }
      if (!model_.basis)
        throw InvalidArgument(name_ + " is too small to learn an initial patch basis");
    }
  }

  ErrorField coupled() const {
    if (!uses_patch()) return *smooth_err_;
    if (!uses_smooth()) return *patch_err_;
    return coupled_error(*smooth_err_, *patch_err_, cfg_.alpha);
  }

  const RegionModel& model() const { return model_; }

 private:
  bool uses_smooth() const { return cfg_.alpha > 0.0; }
  bool uses_patch() const { return cfg_.alpha < 1.0; }

  const ImageGrid& img_;
  const SegmentationConfig& cfg_;
  std::string name_;
  RegionModel model_;
  std::optional<ErrorField> smooth_err_;
  std::optional<ErrorField> patch_err_;
};

ErrorField scaled(const ErrorField& e, double factor) {
  ErrorField out = e;
  for (double& v : out.values()) v *= factor;
  return out;
}

std::size_t count_changes(const RegionMask& a, const RegionMask& b) {
  std::size_t n = 0;
  const auto av = a.grid().values();
  const auto bv = b.grid().values();
  for (std::size_t i = 0; i < av.size(); ++i) n += av[i] != bv[i];
  return n;
}

}  // namespace

SegmentationResult segment_two_phase(const ImageGrid& img, const RegionMask& init_mask,
                                     const SegmentationConfig& cfg, const SegmentationHooks& hooks) {
  cfg.validate();
  if (!img.same_shape(init_mask.grid())) throw DimensionMismatch("image and initial mask differ in shape");
  if (cfg.patch_side > img.width() || cfg.patch_side > img.height())
    throw InvalidArgument("patch side exceeds image");
  const auto start = std::chrono::steady_clock::now();

  LevelSetState state = init_from_mask(init_mask, cfg.eps, cfg.nu);
  RegionFitter inside_fit(img, cfg, "region 1");
  RegionFitter outside_fit(img, cfg, "region 2");
  const double factor = cfg.intensity_scale * cfg.intensity_scale;
  const double total_pixels = static_cast<double>(img.size());

  SegmentationResult result{LabelMap(img.width(), img.height()), {}, {}, {}, {}, {}, 0, 0.0};
  std::optional<ErrorField> e1, e2;
  RegionMask labels = inside_mask(state);
  int stable = 0;

  for (int step = 0; step < cfg.max_steps; ++step) {
    if (step % cfg.refresh_every == 0) {
      const RegionMask outside = labels.complement();
      const double length = cfg.nu * boundary_length(labels);
      const bool first = !e1.has_value();
      const double before =
          first ? std::numeric_limits<double>::quiet_NaN()
                : factor * (inside_fit.data_term(labels) + outside_fit.data_term(outside)) + length;
      inside_fit.refit(labels, result.warnings, step);
      outside_fit.refit(outside, result.warnings, step);
      const double after = factor * (inside_fit.data_term(labels) + outside_fit.data_term(outside)) + length;
      result.refreshes.push_back({step, first ? after : before, after});
      result.energy_trace.push_back(after);
      e1 = scaled(inside_fit.coupled(), factor);
      e2 = scaled(outside_fit.coupled(), factor);
    }

    state.dt = cfl_time_step(state, *e1, *e2);
    state = evolve_step(state, *e1, *e2);
    result.steps_used = step + 1;

    if ((step + 1) % cfg.reinit_every == 0) {
      const RegionMask before = inside_mask(state);
      const ImageGrid phi_before = state.phi;
      state = reinitialize(state);
      const RegionMask after = inside_mask(state);
      const double agree = 1.0 - static_cast<double>(count_changes(before, after)) / total_pixels;
      result.reinit_checks.push_back({step + 1, sdf_quality(state.phi).far_fraction_ok, agree,
                                      zero_set_displacement(phi_before, state.phi)});
    }

    RegionMask next = inside_mask(state);
    const std::size_t changed = count_changes(labels, next);
    labels = std::move(next);
    if (hooks.on_step) hooks.on_step(step + 1, state);
    stable = static_cast<double>(changed) < cfg.stable_fraction * total_pixels ? stable + 1 : 0;
    if (stable >= cfg.stable_steps) break;
  }

  result.labels = LabelMap::from_mask(labels);
  result.models = {inside_fit.model(), outside_fit.model()};
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  result.wall_time_per_iteration = seconds / std::max(result.steps_used, 1);
  return result;
}

SegmentationResult segment_one_vs_all(const ImageGrid& img, const std::vector<RegionMask>& init_masks,
                                      const SegmentationConfig& cfg, const SegmentationHooks& hooks) {
  cfg.validate();
  const std::size_t n = init_masks.size();
  if (n < 2) throw InvalidArgument("one-against-all needs at least two initial masks");
  for (const RegionMask& m : init_masks)
    if (!img.same_shape(m.grid())) throw DimensionMismatch("image and initial mask differ in shape");
  for (std::size_t i = 0; i < img.size(); ++i) {
    int owners = 0;
    for (const RegionMask& m : init_masks) owners += m.grid().values()[i] != 0.0;
    if (owners > 1) throw InvalidArgument("initial masks must be disjoint");
  }

  const auto start = std::chrono::steady_clock::now();
  SegmentationResult result{LabelMap(img.width(), img.height()), {}, {}, {}, {}, {}, 0, 0.0};
  std::vector<LabelMap> claims;
  std::vector<ErrorField> errors;
  for (std::size_t i = 0; i < n; ++i) {
    const int id = static_cast<int>(i);
    try {
      SegmentationResult sub = segment_two_phase(img, init_masks[i], cfg, hooks);
      errors.push_back(coupled_error(img, sub.models.front(), cfg.boundary));
      result.models.push_back(sub.models.front());
      claims.push_back(std::move(sub.labels));
      result.energy_trace.insert(result.energy_trace.end(), sub.energy_trace.begin(), sub.energy_trace.end());
      result.refreshes.insert(result.refreshes.end(), sub.refreshes.begin(), sub.refreshes.end());
      result.reinit_checks.insert(result.reinit_checks.end(), sub.reinit_checks.begin(), sub.reinit_checks.end());
      for (const std::string& w : sub.warnings) result.warnings.push_back("region " + std::to_string(id) + ": " + w);
      result.steps_used += sub.steps_used;
    } catch (const RegionFailure&) {
      throw;
    } catch (const std::exception& e) {
      throw RegionFailure(id, e.what());
    }
  }

  for (std::size_t p = 0; p < img.size(); ++p) {
    int sole = -1;
    int claimants = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (claims[i].labels()[p] == 1) {
        ++claimants;
        sole = static_cast<int>(i);
      }
    if (claimants == 1) {
      result.labels.labels()[p] = sole;
      continue;
    }
    int best = -1;
    double best_err = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      if (claimants > 1 && claims[i].labels()[p] != 1) continue;
      const double e = errors[i].values()[p];
      if (e < best_err) {
        best_err = e;
        best = static_cast<int>(i);
      }
    }
    result.labels.labels()[p] = best;
  }

  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  result.wall_time_per_iteration = seconds / std::max(result.steps_used, 1);
  return result;
}

}  // namespace patchseg
