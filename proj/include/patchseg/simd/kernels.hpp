#pragma once

// Data-parallel inner loops shared by the convolution, basis solver and
// error-map code. Every kernel has a scalar reference implementation; wider
// variants are selected at runtime from what the CPU reports.

#include <cstddef>
#include <string_view>

namespace patchseg::simd {

enum class Isa { scalar, avx2 };

struct KernelTable {
  Isa isa;
  // out[i] += sum_{t < taps} w[t] * in[i + t]   for i in [0, n)
  void (*correlate_row)(const double* in, const double* w, std::size_t taps,
                        double* out, std::size_t n);
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y[i] += a * x[i]
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  // out[i] += x[i] * x[i]
  void (*accumulate_squares)(const double* x, double* out, std::size_t n);
};

bool isa_supported(Isa isa);
Isa best_isa();

/// Kernel table for a specific ISA. Throws std::invalid_argument when the
/// running CPU (or this build) cannot execute it.
const KernelTable& kernels_for(Isa isa);

/// Active table. Defaults to best_isa(), overridable with the
/// PATCHSEG_SIMD environment variable ("scalar" / "avx2") or set_active_isa.
const KernelTable& kernels();
void set_active_isa(Isa isa);

std::string_view isa_name(Isa isa);
Isa parse_isa(std::string_view name);

namespace detail {
const KernelTable& scalar_table();
#if defined(PATCHSEG_HAVE_AVX2)
const KernelTable& avx2_table();
#endif
}  // namespace detail

}  // namespace patchseg::simd
