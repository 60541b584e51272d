#pragma once

// Test-side helpers. Oracles here are written from the definitions and do not
// call the library routine they check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "patchseg/eigenpatch.hpp"
#include "patchseg/image.hpp"

namespace testing_support {

using namespace patchseg;

inline ImageGrid random_image(std::size_t w, std::size_t h, std::uint64_t seed, double lo = 0.0,
                              double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  ImageGrid g(w, h, 0.0);
  for (double& v : g.values()) v = u(rng);
  return g;
}

inline RegionMask random_mask(std::size_t w, std::size_t h, std::uint64_t seed, double p = 0.5) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution b(p);
  ImageGrid g(w, h, 0.0);
  for (double& v : g.values()) v = b(rng) ? 1.0 : 0.0;
  return RegionMask(std::move(g));
}

// Mirror index about the outer pixel edge, written with explicit folding.
inline long long reflect_ref(long long i, long long n) {
  const long long period = 2 * n;
  long long r = i % period;
  if (r < 0) r += period;
  return r < n ? r : period - 1 - r;
}

inline long long replicate_ref(long long i, long long n) { return std::clamp(i, 0LL, n - 1); }

inline double sample_ref(const ImageGrid& img, long long x, long long y, BoundaryPolicy bp) {
  const long long w = static_cast<long long>(img.width()), h = static_cast<long long>(img.height());
  const long long xi = bp == BoundaryPolicy::reflect ? reflect_ref(x, w) : replicate_ref(x, w);
  const long long yi = bp == BoundaryPolicy::reflect ? reflect_ref(y, h) : replicate_ref(y, h);
  return img(static_cast<std::size_t>(xi), static_cast<std::size_t>(yi));
}

// Window of side m at (x, y) as a flat row-major vector.
inline std::vector<double> window_ref(const ImageGrid& img, long long x, long long y, std::size_t m,
                                      BoundaryPolicy bp) {
  const long long r = static_cast<long long>(m / 2);
  std::vector<double> p;
  for (long long v = -r; v <= r; ++v)
    for (long long u = -r; u <= r; ++u) p.push_back(sample_ref(img, x + u, y + v, bp));
  return p;
}

inline ImageGrid correlate_ref(const ImageGrid& img, const Patch& k, BoundaryPolicy bp) {
  ImageGrid out(img.width(), img.height(), 0.0);
  const int r = static_cast<int>(k.radius());
  for (std::size_t y = 0; y < img.height(); ++y)
    for (std::size_t x = 0; x < img.width(); ++x) {
      double acc = 0.0;
      for (int v = -r; v <= r; ++v)
        for (int u = -r; u <= r; ++u)
          acc += sample_ref(img, static_cast<long long>(x) + u, static_cast<long long>(y) + v, bp) * k(u, v);
      out(x, y) = acc;
    }
  return out;
}

inline double dot_ref(const std::vector<double>& a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Residual ||p - sum <p, v> v||^2 with coefficients from the original p.
inline double residual_ref(const std::vector<double>& p, const PatchBasis& basis) {
  std::vector<double> r = p;
  for (const Patch& v : basis.bases()) {
    const double c = dot_ref(p, v.values());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= c * v.values()[i];
  }
  double s = 0.0;
  for (double x : r) s += x * x;
  return s;
}

// Random orthonormal basis by modified Gram-Schmidt on uniform vectors.
inline PatchBasis random_basis(std::size_t m, std::size_t k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<std::vector<double>> vs;
  while (vs.size() < k) {
    std::vector<double> v(m * m);
    for (double& x : v) x = n(rng);
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& f : vs) {
        double c = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) c += v[i] * f[i];
        for (std::size_t i = 0; i < v.size(); ++i) v[i] -= c * f[i];
      }
    double nn = 0.0;
    for (double x : v) nn += x * x;
    nn = std::sqrt(nn);
    for (double& x : v) x /= nn;
    vs.push_back(std::move(v));
  }
  std::vector<Patch> ps;
  for (auto& v : vs) ps.emplace_back(m, std::move(v));
  return PatchBasis(std::move(ps));
}

// Random orthogonal matrix (Gram-Schmidt on Gaussian columns).
inline Matrix random_orthogonal(std::size_t k, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix q(k, k);
  for (std::size_t c = 0; c < k; ++c) {
    std::vector<double> v(k);
    for (double& x : v) x = n(rng);
    for (int pass = 0; pass < 2; ++pass)
      for (std::size_t p = 0; p < c; ++p) {
        double d = 0.0;
        for (std::size_t i = 0; i < k; ++i) d += v[i] * q(i, p);
        for (std::size_t i = 0; i < k; ++i) v[i] -= d * q(i, p);
      }
    double nn = 0.0;
    for (double x : v) nn += x * x;
    nn = std::sqrt(nn);
    for (std::size_t i = 0; i < k; ++i) q(i, c) = v[i] / nn;
  }
  return q;
}

inline double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

inline double max_abs_diff(const ImageGrid& a, const ImageGrid& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a.values()[i] - b.values()[i]));
  return d;
}

// Lambda assembled window by window from the definition.
inline Matrix lambda_ref(const ImageGrid& img, const RegionMask& mask, std::size_t m, WindowMode mode) {
  const ImageGrid src = mode == WindowMode::masked ? multiply(img, mask.grid()) : img;
  const std::size_t n = m * m;
  Matrix l(n, n);
  for (std::size_t y = 0; y < img.height(); ++y)
    for (std::size_t x = 0; x < img.width(); ++x) {
      if (!mask.contains(x, y)) continue;
      const auto p = window_ref(src, (long long)x, (long long)y, m, BoundaryPolicy::reflect);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) l(i, j) += p[i] * p[j];
    }
  return l;
}

// Sum over masked centers of ||p||^2, sum <p, v>^2 and the explicit residual.
struct Totals {
  double norm_sq = 0, projected = 0, residual = 0;
};

inline Totals totals_ref(const ImageGrid& img, const RegionMask& mask, const PatchBasis& basis, WindowMode mode) {
  const ImageGrid src = mode == WindowMode::masked ? multiply(img, mask.grid()) : img;
  Totals t;
  for (std::size_t y = 0; y < img.height(); ++y)
    for (std::size_t x = 0; x < img.width(); ++x) {
      if (!mask.contains(x, y)) continue;
      const auto p = window_ref(src, (long long)x, (long long)y, basis.side(), BoundaryPolicy::reflect);
      for (double v : p) t.norm_sq += v * v;
      for (const Patch& v : basis.bases()) t.projected += std::pow(dot_ref(p, v.values()), 2);
      t.residual += residual_ref(p, basis);
    }
  return t;
}

// Distance from v to e up to the sign of e.
inline double distance_aligned(std::span<const double> v, const std::vector<double>& e) {
  double dot = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) dot += v[i] * e[i];
  const double s = dot >= 0 ? 1.0 : -1.0;
  double d = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) d += std::pow(v[i] - s * e[i], 2);
  return std::sqrt(d);
}


}  // namespace testing_support
