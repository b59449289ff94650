#include <cmath>

#include "salem/simd.hpp"

namespace salem::simd::scalar {

cplx phase_sum(std::span<const double> w, double theta) {
  double re = 0.0, im = 0.0;
  for (std::size_t c = 0; c < w.size(); ++c) {
    double a = static_cast<double>(c) * theta;
    re += w[c] * std::cos(a);
    im += w[c] * std::sin(a);
  }
  return {re, im};
}

cplx phase_sum(std::span<const cplx> w, double theta) {
  double re = 0.0, im = 0.0;
  for (std::size_t c = 0; c < w.size(); ++c) {
    double a = static_cast<double>(c) * theta;
    double cs = std::cos(a), sn = std::sin(a);
    re += w[c].real() * cs - w[c].imag() * sn;
    im += w[c].real() * sn + w[c].imag() * cs;
  }
  return {re, im};
}

void correlate(std::span<const double> in, std::span<const double> taps, std::span<double> out) {
  for (std::size_t i = 0; i < out.size(); ++i) {
    double acc = 0.0;
    for (std::size_t t = 0; t < taps.size(); ++t) acc += taps[t] * in[i + t];
    out[i] = acc;
  }
}

void frac_distance_max(std::span<const double* const> cols, std::span<const double> coef, std::span<double> acc) {
  for (std::size_t s = 0; s < acc.size(); ++s) {
    double t = 0.0;
    for (std::size_t d = 0; d < coef.size(); ++d) t += coef[d] * cols[d][s];
    double r = std::fabs(t - std::nearbyint(t));
    if (r > acc[s]) acc[s] = r;
  }
}

}  // namespace salem::simd::scalar
