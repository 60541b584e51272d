#include "patchseg/eigenpatch.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "patchseg/error.hpp"
#include "patchseg/simd/kernels.hpp"

namespace patchseg {

RegionMask::RegionMask(ImageGrid grid) : grid_(std::move(grid)) {
  for (double v : grid_.values())
    if (v != 0.0 && v != 1.0) throw InvalidArgument("region mask values must be exactly 0 or 1");
}

RegionMask RegionMask::full(std::size_t width, std::size_t height) {
  return RegionMask(ImageGrid(width, height, 1.0));
}

RegionMask RegionMask::empty(std::size_t width, std::size_t height) {
  return RegionMask(ImageGrid(width, height, 0.0));
}

std::size_t RegionMask::count() const {
  std::size_t n = 0;
  for (double v : grid_.values()) n += v != 0.0;
  return n;
}

RegionMask RegionMask::complement() const {
  ImageGrid g(grid_.width(), grid_.height(), 0.0);
  auto out = g.values();
  const auto in = grid_.values();
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] != 0.0 ? 0.0 : 1.0;
  return RegionMask(std::move(g));
}

PatchBasis::PatchBasis(std::vector<Patch> bases) : bases_(std::move(bases)) {
  if (bases_.empty()) throw InvalidArgument("a basis needs at least one patch");
  const std::size_t m = bases_.front().side();
  for (const Patch& p : bases_)
    if (p.side() != m) throw DimensionMismatch("basis patches differ in side");
  if (bases_.size() > m * m) throw InvalidArgument("more bases than patch dimensions");
  if (orthonormality_defect() > kOrthonormalTolerance)
    throw InvalidArgument("basis is not orthonormal (defect " + std::to_string(orthonormality_defect()) + ")");
}

PatchBasis PatchBasis::leading(std::size_t k) const {
  if (k == 0 || k > bases_.size()) throw InvalidArgument("leading basis count out of range");
  return PatchBasis(std::vector<Patch>(bases_.begin(), bases_.begin() + static_cast<long>(k)));
}

double PatchBasis::orthonormality_defect() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < bases_.size(); ++i)
    for (std::size_t j = i; j < bases_.size(); ++j) {
      const double d = patch_dot(bases_[i], bases_[j]) - (i == j ? 1.0 : 0.0);
      worst = std::max(worst, std::abs(d));
    }
  return worst;
}

GdConfig segmentation_gd_config(int sweeps, std::uint64_t seed) {
  GdConfig cfg;
  cfg.max_iters = sweeps;
  cfg.rel_tol = 0.0;
  cfg.seed = seed;
  cfg.windows = WindowMode::centered;
  return cfg;
}

namespace {

void check_shapes(const ImageGrid& img, const RegionMask& mask) {
  if (!img.same_shape(mask.grid())) throw DimensionMismatch("image and mask differ in shape");
}

void check_side(const ImageGrid& img, std::size_t m) {
  if (m % 2 == 0) throw InvalidArgument("patch side must be odd");
  if (m > img.width() || m > img.height()) throw InvalidArgument("patch side exceeds image");
}

ImageGrid window_source(const ImageGrid& img, const RegionMask& mask, WindowMode mode) {
  return mode == WindowMode::masked ? multiply(img, mask.grid()) : img;
}

double masked_sum_squares(const ImageGrid& field, const RegionMask& mask) {
  double acc = 0.0;
  const auto f = field.values();
  const auto h = mask.grid().values();
  for (std::size_t i = 0; i < f.size(); ++i)
    if (h[i] != 0.0) acc += f[i] * f[i];
  return acc;
}

double norm(std::span<const double> v) {
  return std::sqrt(simd::kernels().dot(v.data(), v.data(), v.size()));
}

// Two Gram-Schmidt passes keep |<v, f>| at roundoff level.
void deflate(std::vector<double>& v, const std::vector<std::vector<double>>& found) {
  const auto& k = simd::kernels();
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& f : found) k.axpy(-k.dot(v.data(), f.data(), v.size()), f.data(), v.data(), v.size());
}

Patch to_patch(std::size_t m, const std::vector<double>& v) { return Patch(m, v); }

}  // namespace

double projection_energy(const ImageGrid& img, const RegionMask& mask, const PatchBasis& basis,
                         BoundaryPolicy bp, WindowMode mode) {
  check_shapes(img, mask);
  check_side(img, basis.side());
  const PaddedImage padded = pad_image(window_source(img, mask, mode), basis.side() / 2, bp);
  double total = 0.0;
  for (const Patch& v : basis.bases()) total += masked_sum_squares(correlate_padded(padded, v), mask);
  return total;
}

double reconstruction_error_total(const ImageGrid& img, const RegionMask& mask,
                                  const PatchBasis& basis, BoundaryPolicy bp, WindowMode mode) {
  check_shapes(img, mask);
  const std::size_t m = basis.side();
  check_side(img, m);
  const PaddedImage padded = pad_image(window_source(img, mask, mode), m / 2, bp);
  const auto& k = simd::kernels();
  const auto r = static_cast<long long>(m / 2);
  std::vector<double> p(m * m);
  double total = 0.0;
  for (std::size_t y = 0; y < img.height(); ++y) {
    for (std::size_t x = 0; x < img.width(); ++x) {
      if (!mask.contains(x, y)) continue;
      for (std::size_t kv = 0; kv < m; ++kv) {
        const double* src = padded.at(static_cast<long long>(x) - r,
                                      static_cast<long long>(y) + static_cast<long long>(kv) - r);
        std::copy(src, src + m, p.begin() + static_cast<long>(kv * m));
      }
      for (const Patch& v : basis.bases()) {
        const double c = k.dot(p.data(), v.values().data(), p.size());
        k.axpy(-c, v.values().data(), p.data(), p.size());
      }
      total += k.dot(p.data(), p.data(), p.size());
    }
  }
  return total;
}

double masked_patch_energy(const ImageGrid& img, const RegionMask& mask, std::size_t m,
                           BoundaryPolicy bp, WindowMode mode) {
  check_shapes(img, mask);
  check_side(img, m);
  const ImageGrid sums = box_sum_sq(window_source(img, mask, mode), m, bp);
  double total = 0.0;
  const auto s = sums.values();
  const auto h = mask.grid().values();
  for (std::size_t i = 0; i < s.size(); ++i)
    if (h[i] != 0.0) total += s[i];
  return total;
}

AutocorrelationOperator::AutocorrelationOperator(const ImageGrid& img, const RegionMask& mask,
                                                 std::size_t m, BoundaryPolicy bp, WindowMode mode)
    : side_(m), padded_{}, mask_(img.size()), degenerate_(true) {
  check_shapes(img, mask);
  check_side(img, m);
  padded_ = pad_image(window_source(img, mask, mode), m / 2, bp);
  const auto h = mask.grid().values();
  for (std::size_t i = 0; i < h.size(); ++i) mask_[i] = h[i] != 0.0;
  degenerate_ = !(masked_patch_energy(img, mask, m, bp, mode) > 0.0);
}

ImageGrid AutocorrelationOperator::masked_response(std::span<const double> v) const {
  if (v.size() != dimension()) throw DimensionMismatch("vector length differs from patch dimension");
  ImageGrid c = correlate_padded(padded_, Patch(side_, std::vector<double>(v.begin(), v.end())));
  auto cv = c.values();
  for (std::size_t i = 0; i < cv.size(); ++i)
    if (!mask_[i]) cv[i] = 0.0;
  return c;
}

double AutocorrelationOperator::rayleigh(std::span<const double> v) const {
  const ImageGrid c = masked_response(v);
  const auto cv = c.values();
  return simd::kernels().dot(cv.data(), cv.data(), cv.size());
}

double AutocorrelationOperator::apply(std::span<const double> v, std::span<double> out) const {
  if (out.size() != dimension()) throw DimensionMismatch("output length differs from patch dimension");
  const ImageGrid c = masked_response(v);
  const auto& k = simd::kernels();
  const std::size_t m = side_;
  const auto r = static_cast<long long>(m / 2);
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t y = 0; y < padded_.height; ++y) {
    const std::uint8_t* mrow = mask_.data() + y * padded_.width;
    if (std::none_of(mrow, mrow + padded_.width, [](std::uint8_t b) { return b != 0; })) continue;
    const double* crow = c.row(y).data();
    for (std::size_t kv = 0; kv < m; ++kv) {
      const double* src = padded_.at(-r, static_cast<long long>(y) + static_cast<long long>(kv) - r);
      for (std::size_t ku = 0; ku < m; ++ku) out[kv * m + ku] += k.dot(crow, src + ku, padded_.width);
    }
  }
  const auto cv = c.values();
  return k.dot(cv.data(), cv.data(), cv.size());
}

Matrix AutocorrelationOperator::dense() const {
  const std::size_t n = dimension();
  const std::size_t m = side_;
  const auto r = static_cast<long long>(m / 2);
  const auto& k = simd::kernels();
  Matrix lambda(n, n);
  std::vector<double> p(n);
  std::vector<double> acc(n * n, 0.0);
  for (std::size_t y = 0; y < padded_.height; ++y) {
    for (std::size_t x = 0; x < padded_.width; ++x) {
      if (!mask_[y * padded_.width + x]) continue;
      for (std::size_t kv = 0; kv < m; ++kv) {
        const double* src = padded_.at(static_cast<long long>(x) - r,
                                       static_cast<long long>(y) + static_cast<long long>(kv) - r);
        std::copy(src, src + m, p.begin() + static_cast<long>(kv * m));
      }
      for (std::size_t i = 0; i < n; ++i)
        if (p[i] != 0.0) k.axpy(p[i], p.data() + i, acc.data() + i * n + i, n - i);
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) lambda(i, j) = lambda(j, i) = acc[i * n + j];
  return lambda;
}

std::pair<PatchBasis, SolverReport> gd_solve_basis(const ImageGrid& img, const RegionMask& mask,
                                                   std::size_t m, std::size_t k,
                                                   const GdConfig& cfg) {
  check_shapes(img, mask);
  check_side(img, m);
  const std::size_t n = m * m;
  if (k == 0 || k > n) throw InvalidArgument("basis count must be in [1, m^2]");
  if (cfg.warm_start && cfg.warm_start->side() != m)
    throw DimensionMismatch("warm-start basis has a different patch side");

  const AutocorrelationOperator op(img, mask, m, cfg.boundary, cfg.windows);
  if (op.degenerate()) throw DegenerateRegion("region windows are identically zero; basis undefined");
  const double trace = masked_patch_energy(img, mask, m, cfg.boundary, cfg.windows);

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  auto random_vector = [&] {
    std::vector<double> v(n);
    for (double& x : v) x = uniform(rng);
    return v;
  };

  SolverReport report;
  report.converged = true;
  std::vector<std::vector<double>> found;
  std::vector<double> w(n);
  double settled = 0.0;  // energy of bases already fixed

  for (std::size_t idx = 0; idx < k; ++idx) {
    bool restarted = false;
    std::vector<double> v;
    double rq = 0.0;
    bool step_converged = false;
    const std::size_t trace_mark = report.energy_trace.size();

    for (;;) {
      const bool warm = cfg.warm_start && idx < cfg.warm_start->count() && !restarted;
      v = warm ? std::vector<double>(cfg.warm_start->bases()[idx].values().begin(),
                                     cfg.warm_start->bases()[idx].values().end())
               : random_vector();
      deflate(v, found);
      double nv = norm(v);
      for (int tries = 0; nv < 1e-8 && tries < 16; ++tries) {
        v = random_vector();
        deflate(v, found);
        nv = norm(v);
      }
      for (double& x : v) x /= nv;

      rq = op.apply(v, w);
      double best_rq = rq;
      report.energy_trace.push_back(settled + rq);
      step_converged = false;
      for (int it = 1; it <= cfg.max_iters; ++it) {
        const double nw = norm(w);
        if (nw <= 1e-13 * trace) {
          // v lies in the null space of the deflated operator: already optimal.
          step_converged = true;
          break;
        }
        simd::kernels().axpy(cfg.step / nw, w.data(), v.data(), n);
        deflate(v, found);
        const double nv2 = norm(v);
        for (double& x : v) x /= nv2;
        if (cfg.observer) cfg.observer(idx, it, v);

        const double next = op.apply(v, w);
        ++report.iterations_used;
        report.energy_trace.push_back(settled + next);
        best_rq = std::max(best_rq, next);
        const bool small_change = std::abs(next - rq) <= cfg.rel_tol * std::max(next, 1e-300);
        rq = next;
        if (small_change) {
          step_converged = true;
          break;
        }
      }
      if (cfg.allow_restart && !restarted && rq < 0.95 * best_rq) {
        restarted = true;
        ++report.restarts;
        report.energy_trace.resize(trace_mark);
        continue;
      }
      break;
    }
    report.converged = report.converged && step_converged;
    report.rayleigh.push_back(rq);
    settled += rq;
    found.push_back(std::move(v));
  }

  std::vector<Patch> patches;
  patches.reserve(k);
  for (const auto& v : found) patches.push_back(to_patch(m, v));
  return {PatchBasis(std::move(patches)), std::move(report)};
}

OracleBasis svd_solve_basis(const ImageGrid& img, const RegionMask& mask, std::size_t m,
                            std::size_t k, BoundaryPolicy bp, WindowMode mode) {
  check_shapes(img, mask);
  check_side(img, m);
  const std::size_t n = m * m;
  if (k == 0 || k > n) throw InvalidArgument("basis count must be in [1, m^2]");
  const AutocorrelationOperator op(img, mask, m, bp, mode);
  if (op.degenerate()) throw DegenerateRegion("region windows are identically zero; basis undefined");
  SymmetricEigen eig = jacobi_eigen(op.dense());

  std::vector<Patch> patches;
  patches.reserve(k);
  for (std::size_t j = 0; j < k; ++j) {
    std::vector<double> v(n);
    std::size_t arg = 0;
    for (std::size_t i = 0; i < n; ++i) {
      v[i] = eig.vectors(i, j);
      if (std::abs(v[i]) > std::abs(v[arg])) arg = i;
    }
    if (v[arg] < 0.0)
      for (double& x : v) x = -x;
    patches.push_back(to_patch(m, v));
  }
  return {PatchBasis(std::move(patches)), std::move(eig.values)};
}

PatchBasis mix_basis(const PatchBasis& basis, const Matrix& q) {
  const std::size_t k = basis.count();
  if (q.rows() != k || q.cols() != k) throw DimensionMismatch("mixing matrix must be K x K");
  if (orthogonality_defect(q) > 1e-10) throw InvalidArgument("mixing matrix is not orthogonal");
  const std::size_t n = basis.side() * basis.side();
  std::vector<Patch> mixed;
  mixed.reserve(k);
  for (std::size_t row = 0; row < k; ++row) {
    std::vector<double> w(n, 0.0);
    for (std::size_t h = 0; h < k; ++h)
      simd::kernels().axpy(q(row, h), basis[h].values().data(), w.data(), n);
    mixed.push_back(Patch(basis.side(), std::move(w)));
  }
  return PatchBasis(std::move(mixed));
}

}  // namespace patchseg
