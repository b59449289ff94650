#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "salem/configsearch.hpp"
#include "salem/fractal.hpp"
#include "salem/simd.hpp"

using namespace salem;

namespace {

struct IsaGuard {
  simd::Isa saved = simd::active_isa();
  ~IsaGuard() { simd::set_isa(saved); }
};

template <class F>
auto under(simd::Isa isa, F&& f) {
  simd::set_isa(isa);
  return f();
}

cplx naive_phase(const std::vector<cplx>& w, double theta) {
  cplx s = 0.0;
  for (std::size_t c = 0; c < w.size(); ++c) s += w[c] * std::exp(cplx(0.0, c * theta));
  return s;
}

}  // namespace

TEST_SUITE("simd") {
  TEST_CASE("scalar kernels match naive definitions") {
    IsaGuard guard;
    simd::set_isa(simd::Isa::scalar);
    std::mt19937_64 gen(1);
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<cplx> w(300);
    std::vector<double> wr(300);
    for (std::size_t i = 0; i < w.size(); ++i) {
      w[i] = cplx(u(gen), u(gen));
      wr[i] = u(gen);
    }
    for (double th : {0.0, 0.3, -2.1, 3.0}) {
      CHECK(std::abs(simd::phase_sum(std::span<const cplx>(w), th) - naive_phase(w, th)) < 1e-11);
      std::vector<cplx> wc(wr.begin(), wr.end());
      CHECK(std::abs(simd::phase_sum(std::span<const double>(wr), th) - naive_phase(wc, th)) < 1e-11);
    }
    std::vector<double> in(40), taps{0.25, 0.5, 0.25}, out(38);
    for (auto& x : in) x = u(gen);
    simd::correlate(in, taps, out);
    for (std::size_t i = 0; i < out.size(); ++i)
      CHECK(out[i] == doctest::Approx(0.25 * in[i] + 0.5 * in[i + 1] + 0.25 * in[i + 2]).epsilon(1e-15));
    std::vector<double> c0{0.1, 0.7}, c1{0.4, 0.45};
    std::vector<const double*> cols{c0.data(), c1.data()};
    std::vector<double> coef{2.0, 1.0}, acc{0.0, 0.3};
    simd::frac_distance_max(cols, coef, acc);
    CHECK(acc[0] == doctest::Approx(0.4));  // 0.6 -> distance 0.4
    CHECK(acc[1] == doctest::Approx(0.3));  // 1.85 -> 0.15, keeps 0.3
  }

  TEST_CASE("avx2 kernels agree with scalar") {
    if (!simd::isa_available(simd::Isa::avx2)) {
      MESSAGE("AVX2 not available; equivalence test skipped");
      return;
    }
    IsaGuard guard;
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> u(-1, 1);
    for (std::size_t len : {0u, 1u, 3u, 4u, 7u, 64u, 65u, 131u, 1000u, 4097u}) {
      std::vector<cplx> w(len);
      std::vector<double> wr(len);
      double mass = 1.0;
      for (std::size_t i = 0; i < len; ++i) {
        w[i] = cplx(u(gen), u(gen));
        wr[i] = u(gen);
        mass += std::abs(w[i]) + std::fabs(wr[i]);
      }
      for (double th : {0.0, 0.01, 1.3, -2.9, 3.14159}) {
        auto s = under(simd::Isa::scalar, [&] { return simd::phase_sum(std::span<const cplx>(w), th); });
        auto v = under(simd::Isa::avx2, [&] { return simd::phase_sum(std::span<const cplx>(w), th); });
        CHECK(std::abs(s - v) <= 1e-12 * mass);
        auto sr = under(simd::Isa::scalar, [&] { return simd::phase_sum(std::span<const double>(wr), th); });
        auto vr = under(simd::Isa::avx2, [&] { return simd::phase_sum(std::span<const double>(wr), th); });
        CHECK(std::abs(sr - vr) <= 1e-12 * mass);
      }
    }
    for (std::size_t ntaps : {1u, 3u, 9u, 33u})
      for (std::size_t nout : {1u, 5u, 8u, 100u}) {
        std::vector<double> in(nout + ntaps - 1), taps(ntaps), a(nout), b(nout);
        for (auto& x : in) x = u(gen);
        for (auto& x : taps) x = u(gen);
        under(simd::Isa::scalar, [&] { simd::correlate(in, taps, a); return 0; });
        under(simd::Isa::avx2, [&] { simd::correlate(in, taps, b); return 0; });
        for (std::size_t i = 0; i < nout; ++i) CHECK(std::fabs(a[i] - b[i]) <= 1e-14 * ntaps);
      }
    for (std::size_t len : {1u, 4u, 5u, 1023u}) {
      std::vector<std::vector<double>> cols(3, std::vector<double>(len));
      for (auto& c : cols)
        for (auto& x : c) x = (u(gen) + 1) / 2;
      std::vector<const double*> ptr{cols[0].data(), cols[1].data(), cols[2].data()};
      std::vector<double> coef{3.0, -7.0, 11.0}, a(len, 0.0), b(len, 0.0);
      under(simd::Isa::scalar, [&] { simd::frac_distance_max(ptr, coef, a); return 0; });
      under(simd::Isa::avx2, [&] { simd::frac_distance_max(ptr, coef, b); return 0; });
      for (std::size_t i = 0; i < len; ++i) CHECK(std::fabs(a[i] - b[i]) <= 1e-12);
    }
  }

  TEST_CASE("end-to-end results do not depend on the instruction set") {
    if (!simd::isa_available(simd::Isa::avx2)) return;
    IsaGuard guard;
    auto m = gen_random_cantor(CantorParams{2, 4, 3, 3, 5, CantorMode::independent_uniform}, 64);
    auto fs = under(simd::Isa::scalar, [&] { return fourier_transform(m, 32); });
    auto fv = under(simd::Isa::avx2, [&] { return fourier_transform(m, 32); });
    for (std::size_t i = 0; i < fs.size(); ++i) CHECK(std::abs(fs.values[i] - fv.values[i]) <= 1e-12);
    auto ss = under(simd::Isa::scalar, [&] { return mollify_split(m, 4, 8); });
    auto sv = under(simd::Isa::avx2, [&] { return mollify_split(m, 4, 8); });
    for (std::size_t i = 0; i < ss.mu1.values().size(); ++i)
      CHECK(std::fabs(ss.mu1.values()[i] - sv.mu1.values()[i]) <= 1e-12);
  }

  TEST_CASE("isa control") {
    IsaGuard guard;
    CHECK(simd::isa_available(simd::Isa::scalar));
    simd::set_isa(simd::Isa::scalar);
    CHECK(simd::active_isa() == simd::Isa::scalar);
    CHECK(std::string(simd::isa_name(simd::Isa::avx2)) == "avx2");
  }
}
