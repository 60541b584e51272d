// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.
#include <immintrin.h>

#include "patchseg/simd/kernels.hpp"

namespace patchseg::simd::detail {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

void correlate_row_avx2(const double* in, const double* w, std::size_t taps,
                        double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    __m256d a0 = _mm256_loadu_pd(out + i);
    __m256d a1 = _mm256_loadu_pd(out + i + 4);
    __m256d a2 = _mm256_loadu_pd(out + i + 8);
    __m256d a3 = _mm256_loadu_pd(out + i + 12);
    const double* src = in + i;
    for (std::size_t t = 0; t < taps; ++t) {
      const __m256d wt = _mm256_broadcast_sd(w + t);
      a0 = _mm256_fmadd_pd(wt, _mm256_loadu_pd(src + t), a0);
      a1 = _mm256_fmadd_pd(wt, _mm256_loadu_pd(src + t + 4), a1);
      a2 = _mm256_fmadd_pd(wt, _mm256_loadu_pd(src + t + 8), a2);
      a3 = _mm256_fmadd_pd(wt, _mm256_loadu_pd(src + t + 12), a3);
    }
    _mm256_storeu_pd(out + i, a0);
    _mm256_storeu_pd(out + i + 4, a1);
    _mm256_storeu_pd(out + i + 8, a2);
    _mm256_storeu_pd(out + i + 12, a3);
  }
  for (; i + 4 <= n; i += 4) {
    __m256d a = _mm256_loadu_pd(out + i);
    for (std::size_t t = 0; t < taps; ++t)
      a = _mm256_fmadd_pd(_mm256_broadcast_sd(w + t), _mm256_loadu_pd(in + i + t), a);
    _mm256_storeu_pd(out + i, a);
  }
  for (; i < n; ++i) {
    double acc = out[i];
    for (std::size_t t = 0; t < taps; ++t) acc += w[t] * in[i + t];
    out[i] = acc;
  }
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d s0 = _mm256_setzero_pd();
  __m256d s1 = _mm256_setzero_pd();
  __m256d s2 = _mm256_setzero_pd();
  __m256d s3 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    s0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), s0);
    s1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), s1);
    s2 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 8), _mm256_loadu_pd(b + i + 8), s2);
    s3 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 12), _mm256_loadu_pd(b + i + 12), s3);
  }
  for (; i + 4 <= n; i += 4)
    s0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), s0);
  double acc = hsum(_mm256_add_pd(_mm256_add_pd(s0, s1), _mm256_add_pd(s2, s3)));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
  const __m256d av = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] += a * x[i];
}

void accumulate_squares_avx2(const double* x, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v = _mm256_loadu_pd(x + i);
    _mm256_storeu_pd(out + i, _mm256_fmadd_pd(v, v, _mm256_loadu_pd(out + i)));
  }
  for (; i < n; ++i) out[i] += x[i] * x[i];
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable table{Isa::avx2, correlate_row_avx2, dot_avx2, axpy_avx2,
                                 accumulate_squares_avx2};
  return table;
}

}  // namespace patchseg::simd::detail
