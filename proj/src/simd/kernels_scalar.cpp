#include "patchseg/simd/kernels.hpp"

namespace patchseg::simd::detail {
namespace {

void correlate_row_scalar(const double* in, const double* w, std::size_t taps,
                          double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    double acc = out[i];
    for (std::size_t t = 0; t < taps; ++t) acc += w[t] * in[i + t];
    out[i] = acc;
  }
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void accumulate_squares_scalar(const double* x, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] += x[i] * x[i];
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{Isa::scalar, correlate_row_scalar, dot_scalar,
                                 axpy_scalar, accumulate_squares_scalar};
  return table;
}

}  // namespace patchseg::simd::detail
