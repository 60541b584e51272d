#pragma once

#include <filesystem>
#include <vector>

#include "patchseg/mosaic.hpp"
#include "patchseg/segmenter.hpp"

namespace patchseg {

struct BenchmarkCell {
  std::size_t image = 0;
  std::size_t k = 0;
  double error_gd = 0.0;    // averaged reconstruction error per pixel
  double error_svd = 0.0;
  double normalized_gd = 0.0;   // divided by the image's worst cell
  double normalized_svd = 0.0;
  double energy_gd = 0.0;       // projection energy of the GD basis
  double eigen_sum = 0.0;       // sum of the top-k oracle eigenvalues
};

struct BenchmarkReport {
  std::vector<BenchmarkCell> cells;
  std::vector<double> seconds_per_image;
  /// max over cells of |normalized_gd - normalized_svd|
  double max_normalized_gap() const;
};

/// GD and oracle bases for every image (full mask) and every k; the greedy
/// solution for k bases is the first k of one K_max solve.
BenchmarkReport run_benchmark_gd_vs_svd(const std::vector<ImageGrid>& images, std::size_t m,
                                        const std::vector<std::size_t>& ks, const GdConfig& gd = {});

struct SweepRow {
  std::size_t spec = 0;
  double alpha = 0.0;
  double error = 0.0;
  int steps = 0;
  double seconds = 0.0;
};

/// Two-phase segmentation of every mosaic at every alpha, circle-grid init.
std::vector<SweepRow> run_alpha_sweep(const std::vector<MosaicSpec>& specs, const std::vector<double>& alphas,
                                      const SegmentationConfig& base);

void write_benchmark_csv(const std::filesystem::path& path, const BenchmarkReport& report);
void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows);

}  // namespace patchseg
