#pragma once

#include <span>

#include "salem/common.hpp"

namespace salem::simd {

enum class Isa { scalar, avx2 };

const char* isa_name(Isa isa);
bool isa_available(Isa isa);
// Best available instruction set unless overridden by set_isa or SALEM_SIMD=scalar.
Isa active_isa();
void set_isa(Isa isa);

// sum_c w[c] * exp(i * c * theta)
cplx phase_sum(std::span<const double> w, double theta);
cplx phase_sum(std::span<const cplx> w, double theta);

// out[i] = sum_t taps[t] * in[i + t]; requires out.size() + taps.size() - 1 <= in.size().
void correlate(std::span<const double> in, std::span<const double> taps, std::span<double> out);

// acc[s] = max(acc[s], |t_s - round(t_s)|) with t_s = sum_d coef[d] * cols[d][s].
void frac_distance_max(std::span<const double* const> cols, std::span<const double> coef, std::span<double> acc);

namespace scalar {
cplx phase_sum(std::span<const double> w, double theta);
cplx phase_sum(std::span<const cplx> w, double theta);
void correlate(std::span<const double> in, std::span<const double> taps, std::span<double> out);
void frac_distance_max(std::span<const double* const> cols, std::span<const double> coef, std::span<double> acc);
}  // namespace scalar

namespace avx2 {
cplx phase_sum(std::span<const double> w, double theta);
cplx phase_sum(std::span<const cplx> w, double theta);
void correlate(std::span<const double> in, std::span<const double> taps, std::span<double> out);
void frac_distance_max(std::span<const double* const> cols, std::span<const double> coef, std::span<double> acc);
}  // namespace avx2

}  // namespace salem::simd
