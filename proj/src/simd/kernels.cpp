#include "patchseg/simd/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace patchseg::simd {

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(PATCHSEG_HAVE_AVX2)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

Isa best_isa() { return isa_supported(Isa::avx2) ? Isa::avx2 : Isa::scalar; }

const KernelTable& kernels_for(Isa isa) {
  if (!isa_supported(isa))
    throw std::invalid_argument("SIMD variant not supported here: " + std::string(isa_name(isa)));
#if defined(PATCHSEG_HAVE_AVX2)
  if (isa == Isa::avx2) return detail::avx2_table();
#endif
  return detail::scalar_table();
}

namespace {

Isa initial_isa() {
  if (const char* env = std::getenv("PATCHSEG_SIMD")) {
    const Isa wanted = parse_isa(env);
    if (isa_supported(wanted)) return wanted;
  }
  return best_isa();
}

std::atomic<const KernelTable*>& active_slot() {
  static std::atomic<const KernelTable*> slot{&kernels_for(initial_isa())};
  return slot;
}

}  // namespace

const KernelTable& kernels() { return *active_slot().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) { active_slot().store(&kernels_for(isa), std::memory_order_relaxed); }

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
  }
  return "unknown";
}

Isa parse_isa(std::string_view name) {
  if (name == "scalar") return Isa::scalar;
  if (name == "avx2") return Isa::avx2;
  throw std::invalid_argument("unknown SIMD variant: " + std::string(name));
}

}  // namespace patchseg::simd
