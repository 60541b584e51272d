#include "patchseg/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>

#include "patchseg/error.hpp"
#include "patchseg/metrics.hpp"

namespace patchseg {

double BenchmarkReport::max_normalized_gap() const {
  double gap = 0.0;
  for (const BenchmarkCell& c : cells) gap = std::max(gap, std::abs(c.normalized_gd - c.normalized_svd));
  return gap;
}

BenchmarkReport run_benchmark_gd_vs_svd(const std::vector<ImageGrid>& images, std::size_t m,
                                        const std::vector<std::size_t>& ks, const GdConfig& gd) {
  if (ks.empty()) throw InvalidArgument("no basis counts requested");
  const std::size_t k_max = *std::max_element(ks.begin(), ks.end());
  if (*std::min_element(ks.begin(), ks.end()) < 1 || k_max > m * m)
    throw InvalidArgument("basis counts must lie in [1, m^2]");

  BenchmarkReport report;
  for (std::size_t i = 0; i < images.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    const ImageGrid& img = images[i];
    const RegionMask mask = RegionMask::full(img.width(), img.height());
    const double pixels = static_cast<double>(img.size());
    const double total = masked_patch_energy(img, mask, m, gd.boundary);
    const OracleBasis oracle = svd_solve_basis(img, mask, m, k_max, gd.boundary);
    const PatchBasis gd_basis = gd_solve_basis(img, mask, m, k_max, gd).first;

    // Residuals within the solver tolerance of the total energy count as zero,
    // so a fully captured image does not normalize rounding noise to 1.
    const auto residual = [&](double r) { return r > 1e-6 * total ? r / pixels : 0.0; };
    const std::size_t first = report.cells.size();
    double worst = 0.0;
    for (std::size_t k : ks) {
      BenchmarkCell c;
      c.image = i;
      c.k = k;
      c.energy_gd = projection_energy(img, mask, gd_basis.leading(k), gd.boundary);
      const double energy_svd = projection_energy(img, mask, oracle.basis.leading(k), gd.boundary);
      for (std::size_t j = 0; j < k; ++j) c.eigen_sum += oracle.eigenvalues[j];
      c.error_gd = residual(total - c.energy_gd);
      c.error_svd = residual(total - energy_svd);
      worst = std::max({worst, c.error_gd, c.error_svd});
      report.cells.push_back(c);
    }
    for (std::size_t j = first; j < report.cells.size(); ++j) {
      BenchmarkCell& c = report.cells[j];
      c.normalized_gd = worst > 0.0 ? c.error_gd / worst : 0.0;
      c.normalized_svd = worst > 0.0 ? c.error_svd / worst : 0.0;
    }
    report.seconds_per_image.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  }
  return report;
}

std::vector<SweepRow> run_alpha_sweep(const std::vector<MosaicSpec>& specs, const std::vector<double>& alphas,
                                      const SegmentationConfig& base) {
  for (double a : alphas)
    if (!(a >= 0.0 && a <= 1.0)) throw InvalidArgument("alpha values must lie in [0, 1]");
  std::vector<SweepRow> rows;
  for (std::size_t s = 0; s < specs.size(); ++s) {
    const Mosaic mosaic = make_mosaic(specs[s]);
    const RegionMask init = circle_grid_mask(mosaic.image.width(), mosaic.image.height());
    for (double a : alphas) {
      SegmentationConfig cfg = base;
      cfg.alpha = a;
      const auto start = std::chrono::steady_clock::now();
      const SegmentationResult r = segment_two_phase(mosaic.image, init, cfg);
      SweepRow row;
      row.spec = s;
      row.alpha = a;
      row.error = evaluate(r.labels, mosaic.truth).total_error;
      row.steps = r.steps_used;
      row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      rows.push_back(row);
    }
  }
  return rows;
}

void write_benchmark_csv(const std::filesystem::path& path, const BenchmarkReport& report) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out.precision(12);
  out << "image,k,error_gd,error_svd,normalized_gd,normalized_svd,energy_gd,eigen_sum\n";
  for (const BenchmarkCell& c : report.cells)
    out << c.image << ',' << c.k << ',' << c.error_gd << ',' << c.error_svd << ',' << c.normalized_gd << ','
        << c.normalized_svd << ',' << c.energy_gd << ',' << c.eigen_sum << '\n';
}

void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out.precision(12);
  out << "spec,alpha,error,steps,seconds\n";
  for (const SweepRow& r : rows)
    out << r.spec << ',' << r.alpha << ',' << r.error << ',' << r.steps << ',' << r.seconds << '\n';
}

}  // namespace patchseg
