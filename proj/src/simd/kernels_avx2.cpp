#include <immintrin.h>

#include <cmath>

#include "salem/simd.hpp"

namespace salem::simd::avx2 {

namespace {

constexpr std::size_t kReseed = 64;

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

// Lane l holds exp(i * (c0 + offs[l]) * theta).
inline void seed_lanes(std::size_t c0, const int offs[4], double theta, __m256d& zr, __m256d& zi) {
  alignas(32) double r[4], s[4];
  for (int l = 0; l < 4; ++l) {
    double a = static_cast<double>(c0 + offs[l]) * theta;
    r[l] = std::cos(a);
    s[l] = std::sin(a);
  }
  zr = _mm256_load_pd(r);
  zi = _mm256_load_pd(s);
}

inline void rotate(__m256d& zr, __m256d& zi, __m256d sr, __m256d si) {
  __m256d nr = _mm256_fmsub_pd(zr, sr, _mm256_mul_pd(zi, si));
  __m256d ni = _mm256_fmadd_pd(zr, si, _mm256_mul_pd(zi, sr));
  zr = nr;
  zi = ni;
}

}  // namespace

cplx phase_sum(std::span<const double> w, double theta) {
  static const int offs[4] = {0, 1, 2, 3};
  const std::size_t n = w.size();
  const std::size_t n4 = n & ~std::size_t{3};
  __m256d sr = _mm256_set1_pd(std::cos(4.0 * theta));
  __m256d si = _mm256_set1_pd(std::sin(4.0 * theta));
  __m256d accr = _mm256_setzero_pd(), acci = _mm256_setzero_pd();
  __m256d zr, zi;
  for (std::size_t c = 0; c < n4; c += 4) {
    if (c % kReseed == 0)
      seed_lanes(c, offs, theta, zr, zi);
    else
      rotate(zr, zi, sr, si);
    __m256d wv = _mm256_loadu_pd(w.data() + c);
    accr = _mm256_fmadd_pd(wv, zr, accr);
    acci = _mm256_fmadd_pd(wv, zi, acci);
  }
  double re = hsum(accr), im = hsum(acci);
  for (std::size_t c = n4; c < n; ++c) {
    double a = static_cast<double>(c) * theta;
    re += w[c] * std::cos(a);
    im += w[c] * std::sin(a);
  }
  return {re, im};
}

cplx phase_sum(std::span<const cplx> w, double theta) {
  // unpacklo/unpackhi of two complex pairs yield lane order 0, 2, 1, 3
  static const int offs[4] = {0, 2, 1, 3};
  const std::size_t n = w.size();
  const std::size_t n4 = n & ~std::size_t{3};
  const double* raw = reinterpret_cast<const double*>(w.data());
  __m256d sr = _mm256_set1_pd(std::cos(4.0 * theta));
  __m256d si = _mm256_set1_pd(std::sin(4.0 * theta));
  __m256d accr = _mm256_setzero_pd(), acci = _mm256_setzero_pd();
  __m256d zr, zi;
  for (std::size_t c = 0; c < n4; c += 4) {
    if (c % kReseed == 0)
      seed_lanes(c, offs, theta, zr, zi);
    else
      rotate(zr, zi, sr, si);
    __m256d a = _mm256_loadu_pd(raw + 2 * c);
    __m256d b = _mm256_loadu_pd(raw + 2 * c + 4);
    __m256d wr = _mm256_unpacklo_pd(a, b);
    __m256d wi = _mm256_unpackhi_pd(a, b);
    accr = _mm256_fmadd_pd(wr, zr, accr);
    accr = _mm256_fnmadd_pd(wi, zi, accr);
    acci = _mm256_fmadd_pd(wr, zi, acci);
    acci = _mm256_fmadd_pd(wi, zr, acci);
  }
  double re = hsum(accr), im = hsum(acci);
  for (std::size_t c = n4; c < n; ++c) {
    double ang = static_cast<double>(c) * theta;
    double cs = std::cos(ang), sn = std::sin(ang);
    re += w[c].real() * cs - w[c].imag() * sn;
    im += w[c].real() * sn + w[c].imag() * cs;
  }
  return {re, im};
}

void correlate(std::span<const double> in, std::span<const double> taps, std::span<double> out) {
  const std::size_t n = out.size();
  const std::size_t n4 = n & ~std::size_t{3};
  for (std::size_t i = 0; i < n4; i += 4) {
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t t = 0; t < taps.size(); ++t)
      acc = _mm256_fmadd_pd(_mm256_set1_pd(taps[t]), _mm256_loadu_pd(in.data() + i + t), acc);
    _mm256_storeu_pd(out.data() + i, acc);
  }
  for (std::size_t i = n4; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t t = 0; t < taps.size(); ++t) acc += taps[t] * in[i + t];
    out[i] = acc;
  }
}

void frac_distance_max(std::span<const double* const> cols, std::span<const double> coef, std::span<double> acc) {
  const std::size_t n = acc.size();
  const std::size_t n4 = n & ~std::size_t{3};
  const __m256d sign = _mm256_set1_pd(-0.0);
  for (std::size_t s = 0; s < n4; s += 4) {
    __m256d t = _mm256_setzero_pd();
    for (std::size_t d = 0; d < coef.size(); ++d)
      t = _mm256_fmadd_pd(_mm256_set1_pd(coef[d]), _mm256_loadu_pd(cols[d] + s), t);
    __m256d r = _mm256_sub_pd(t, _mm256_round_pd(t, _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC));
    r = _mm256_andnot_pd(sign, r);
    _mm256_storeu_pd(acc.data() + s, _mm256_max_pd(r, _mm256_loadu_pd(acc.data() + s)));
  }
  for (std::size_t s = n4; s < n; ++s) {
    double t = 0.0;
    for (std::size_t d = 0; d < coef.size(); ++d) t += coef[d] * cols[d][s];
    double r = std::fabs(t - std::nearbyint(t));
    if (r > acc[s]) acc[s] = r;
  }
}

}  // namespace salem::simd::avx2
