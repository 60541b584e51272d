#pragma once

// Optimal orthonormal patch bases for one region.
//
// For a region mask H the masked image I_H = I * H is windowed at every
// masked center; the autocorrelation operator of those windows is
//
//   Lambda(u, v; u', v') = sum_{(x,y) in H} I_H(x+u, y+v) I_H(x+u', y+v')
//
// and the projection energy of an orthonormal basis is
// U({v_k}) = sum_k v_k^T Lambda v_k. Maximizing U is the same as minimizing
// the total patch reconstruction error over the region. The greedy
// gradient-flow solver reaches the top-K eigenvectors using correlations
// only; svd_solve_basis builds Lambda explicitly as the reference.
//
// WindowMode::centered replaces I_H by the unmasked image (windows whose
// centers lie in H). That operator's top-K eigenvectors minimize the sum over
// H of the convolutional patch error map, which is what segmentation scores.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "patchseg/image.hpp"
#include "patchseg/symmetric_eigen.hpp"

namespace patchseg {

enum class WindowMode {
  masked,    // windows of I * H
  centered,  // windows of I at centers in H
};

/// Binary region indicator; every value is exactly 0 or 1.
class RegionMask {
 public:
  explicit RegionMask(ImageGrid grid);
  static RegionMask full(std::size_t width, std::size_t height);
  static RegionMask empty(std::size_t width, std::size_t height);

  const ImageGrid& grid() const { return grid_; }
  std::size_t width() const { return grid_.width(); }
  std::size_t height() const { return grid_.height(); }
  bool contains(std::size_t x, std::size_t y) const { return grid_(x, y) != 0.0; }
  std::size_t count() const;
  RegionMask complement() const;

  friend bool operator==(const RegionMask&, const RegionMask&) = default;

 private:
  ImageGrid grid_;
};

/// K orthonormal m x m patches, ordered by decreasing captured energy.
class PatchBasis {
 public:
  static constexpr double kOrthonormalTolerance = 1e-8;

  /// Validates side consistency, 1 <= K <= m^2 and orthonormality.
  explicit PatchBasis(std::vector<Patch> bases);

  std::size_t side() const { return bases_.front().side(); }
  std::size_t count() const { return bases_.size(); }
  const Patch& operator[](std::size_t k) const { return bases_[k]; }
  const std::vector<Patch>& bases() const { return bases_; }

  /// First k members (the greedy solution for k bases).
  PatchBasis leading(std::size_t k) const;

  /// max over pairs of |<v_i, v_j> - delta_ij|
  double orthonormality_defect() const;

 private:
  std::vector<Patch> bases_;
};

struct SolverReport {
  std::vector<double> energy_trace;  // projection energy after each sweep
  std::vector<double> rayleigh;      // final v_k^T Lambda v_k per basis
  int iterations_used = 0;
  int restarts = 0;
  bool converged = false;
};

struct GdConfig {
  int max_iters = 200;       // sweeps per basis
  double rel_tol = 1e-7;     // relative Rayleigh-quotient change to stop
  double step = 1.0;         // normalized step length
  std::uint64_t seed = 1;
  bool allow_restart = true;
  BoundaryPolicy boundary = BoundaryPolicy::reflect;
  WindowMode windows = WindowMode::masked;
  std::optional<PatchBasis> warm_start;
  /// Called after every update of basis `index` with the normalized iterate.
  std::function<void(std::size_t index, int iteration, std::span<const double> v)> observer;
};

/// Settings used inside segmentation: a few sweeps over centered windows.
GdConfig segmentation_gd_config(int sweeps, std::uint64_t seed);

/// sum over masked centers of sum_k correlate(I_H, v_k)^2
double projection_energy(const ImageGrid& img, const RegionMask& mask, const PatchBasis& basis,
                         BoundaryPolicy bp = BoundaryPolicy::reflect,
                         WindowMode mode = WindowMode::masked);

/// sum over masked centers of ||p - sum_k <p, v_k> v_k||^2 with p the I_H window;
/// evaluated patch by patch.
double reconstruction_error_total(const ImageGrid& img, const RegionMask& mask,
                                  const PatchBasis& basis,
                                  BoundaryPolicy bp = BoundaryPolicy::reflect,
                                  WindowMode mode = WindowMode::masked);

/// sum over masked centers of ||p||^2 (I_H windows).
double masked_patch_energy(const ImageGrid& img, const RegionMask& mask, std::size_t m,
                           BoundaryPolicy bp = BoundaryPolicy::reflect,
                           WindowMode mode = WindowMode::masked);

/// Lambda restricted to (img, mask) applied to patch vectors without forming
/// the matrix: correlate, mask, then correlate back.
class AutocorrelationOperator {
 public:
  AutocorrelationOperator(const ImageGrid& img, const RegionMask& mask, std::size_t m,
                          BoundaryPolicy bp = BoundaryPolicy::reflect,
                          WindowMode mode = WindowMode::masked);

  std::size_t side() const { return side_; }
  std::size_t dimension() const { return side_ * side_; }
  bool degenerate() const { return degenerate_; }

  /// out = Lambda v; returns v^T Lambda v.
  double apply(std::span<const double> v, std::span<double> out) const;
  /// v^T Lambda v only.
  double rayleigh(std::span<const double> v) const;
  /// Explicit m^2 x m^2 matrix (reference path).
  Matrix dense() const;

 private:
  ImageGrid masked_response(std::span<const double> v) const;

  std::size_t side_;
  PaddedImage padded_;
  std::vector<std::uint8_t> mask_;
  bool degenerate_;
};

std::pair<PatchBasis, SolverReport> gd_solve_basis(const ImageGrid& img, const RegionMask& mask,
                                                   std::size_t m, std::size_t k,
                                                   const GdConfig& cfg = {});

struct OracleBasis {
  PatchBasis basis;
  std::vector<double> eigenvalues;  // full spectrum, descending
};

OracleBasis svd_solve_basis(const ImageGrid& img, const RegionMask& mask, std::size_t m,
                            std::size_t k, BoundaryPolicy bp = BoundaryPolicy::reflect,
                            WindowMode mode = WindowMode::masked);

/// w_k = sum_h Q(k, h) v_h for an orthogonal K x K matrix Q.
PatchBasis mix_basis(const PatchBasis& basis, const Matrix& q);

}  // namespace patchseg
