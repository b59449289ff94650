#include <atomic>
#include <cstdlib>
#include <cstring>

#include "salem/simd.hpp"

namespace salem::simd {

namespace {

Isa detect() {
  const char* env = std::getenv("SALEM_SIMD");
  if (env && std::strcmp(env, "scalar") == 0) return Isa::scalar;
  return isa_available(Isa::avx2) ? Isa::avx2 : Isa::scalar;
}

std::atomic<int>& selected() {
  static std::atomic<int> isa{static_cast<int>(detect())};
  return isa;
}

}  // namespace

const char* isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

bool isa_available(Isa isa) {
  if (isa == Isa::scalar) return true;
#if defined(SALEM_HAVE_AVX2)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa active_isa() { return static_cast<Isa>(selected().load()); }

void set_isa(Isa isa) {
  if (!isa_available(isa)) throw Error(std::string("instruction set not available: ") + isa_name(isa));
  selected() = static_cast<int>(isa);
}

#if defined(SALEM_HAVE_AVX2)
#define SALEM_DISPATCH(call)                              \
  if (active_isa() == Isa::avx2) return avx2::call;       \
  return scalar::call
#else
#define SALEM_DISPATCH(call) return scalar::call
#endif

cplx phase_sum(std::span<const double> w, double theta) { SALEM_DISPATCH(phase_sum(w, theta)); }
cplx phase_sum(std::span<const cplx> w, double theta) { SALEM_DISPATCH(phase_sum(w, theta)); }
void correlate(std::span<const double> in, std::span<const double> taps, std::span<double> out) {
  SALEM_DISPATCH(correlate(in, taps, out));
}
void frac_distance_max(std::span<const double* const> cols, std::span<const double> coef, std::span<double> acc) {
  SALEM_DISPATCH(frac_distance_max(cols, coef, acc));
}

}  // namespace salem::simd
