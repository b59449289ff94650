#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "salem/grid.hpp"

using namespace salem;

namespace {

cplx naive_transform(const GridFunction& f, double xi, int fine) {
  // Riemann sum of the interpolant on a fine grid over its support box.
  Box s = f.support_box();
  double a = s.lo[0], b = s.hi[0], dx = (b - a) / fine;
  cplx acc = 0.0;
  for (int i = 0; i < fine; ++i) {
    double x = a + (i + 0.5) * dx;
    double v = f(std::span<const double>(&x, 1));
    acc += v * std::exp(cplx(0.0, -2.0 * std::numbers::pi * x * xi));
  }
  return acc * dx;
}

}  // namespace

TEST_SUITE("grid") {
  TEST_CASE("naive phase sum") {
    std::mt19937_64 gen(1);
    std::uniform_real_distribution<double> u(0, 1);
    const int n = 2;
    const std::size_t N = 6;
    std::vector<double> v(N * N);
    for (auto& x : v) x = u(gen);
    std::vector<double> lo{-0.3, 0.2}, h{0.1, 0.25}, xi{1.7, -2.2};
    cplx naive = 0.0;
    for (std::size_t i = 0; i < N; ++i)
      for (std::size_t j = 0; j < N; ++j) {
        double x0 = lo[0] + (i + 0.5) * h[0], x1 = lo[1] + (j + 0.5) * h[1];
        naive += v[i * N + j] * std::exp(cplx(0, -2 * std::numbers::pi * (x0 * xi[0] + x1 * xi[1])));
      }
    CHECK(std::abs(grid_phase_sum(v, n, N, lo, h, xi) - naive) < 1e-12);
  }

  TEST_CASE("interpolation") {
    GridFunction f(1, 4, Box{{0.0}, {1.0}}, {1.0, 3.0, 2.0, 0.0});
    double x = 0.125;
    CHECK(f(std::span<const double>(&x, 1)) == doctest::Approx(1.0));
    x = 0.25;
    CHECK(f(std::span<const double>(&x, 1)) == doctest::Approx(2.0));
    x = 0.0;
    CHECK(f(std::span<const double>(&x, 1)) == doctest::Approx(0.5));
    x = -0.2;
    CHECK(f(std::span<const double>(&x, 1)) == 0.0);
    x = 1.2;
    CHECK(f(std::span<const double>(&x, 1)) == 0.0);
    CHECK(f.integral() == doctest::Approx(1.5));
    CHECK(f.support_box().lo[0] == doctest::Approx(-0.125));
    CHECK(f.support_box().hi[0] == doctest::Approx(1.125));
    CHECK_THROWS_AS(GridFunction(1, 4, Box{{0.0}, {1.0}}, {1.0, 2.0}), Error);
  }

  TEST_CASE("exact transform of the interpolant") {
    std::mt19937_64 gen(2);
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<double> v(8);
    for (auto& x : v) x = u(gen);
    GridFunction f(1, 8, Box{{-0.2}, {0.6}}, v);
    for (double xi : {0.0, 0.7, 2.3, -5.1}) {
      cplx want = naive_transform(f, xi, 200000);
      CHECK(std::abs(f.transform(std::span<const double>(&xi, 1)) - want) < 1e-6);
    }
    double zero = 0.0;
    CHECK(f.transform(std::span<const double>(&zero, 1)).real() == doctest::Approx(f.integral()).epsilon(1e-14));
  }

  TEST_CASE("2-D transform is separable for product data") {
    std::vector<double> a{1, 2, 0.5, 3}, b{0.2, 1, 4, 1};
    std::vector<double> v(16);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) v[i * 4 + j] = a[i] * b[j];
    GridFunction f2(2, 4, Box::unit(2), v), fa(1, 4, Box::unit(1), a), fb(1, 4, Box::unit(1), b);
    std::vector<double> xi{1.3, -0.4};
    cplx want = fa.transform(std::span<const double>(&xi[0], 1)) * fb.transform(std::span<const double>(&xi[1], 1));
    CHECK(std::abs(f2.transform(xi) - want) < 1e-12);
  }

  TEST_CASE("measure validation") {
    CHECK_THROWS_AS(GridMeasure(1, 6, std::vector<double>(6, 1.0 / 6)), Error);
    CHECK_THROWS_AS(GridMeasure(1, 4, {0.5, 0.6, -0.1, 0.0}), Error);
    CHECK_THROWS_AS(GridMeasure(1, 4, {0.5, 0.6, 0.1, 0.0}), Error);
    auto m = GridMeasure::normalized(1, 4, {1.0, 0.0, 3.0, 0.0});
    CHECK(m.weights()[2] == doctest::Approx(0.75));
    auto mask = m.support_mask();
    CHECK(mask == std::vector<bool>{true, false, true, false});
  }

  TEST_CASE("measure transforms") {
    auto p = GridMeasure::point_mass(2, 16, 37);
    std::vector<double> xi{3.0, -5.0};
    CHECK(std::abs(p.transform(xi)) == doctest::Approx(1.0));
    std::vector<double> w(64);
    std::mt19937_64 gen(4);
    std::uniform_real_distribution<double> u(0, 1);
    for (auto& x : w) x = u(gen);
    auto m = GridMeasure::normalized(2, 8, w);
    std::vector<double> neg{-3.0, 5.0};
    CHECK(std::abs(m.transform(xi) - std::conj(m.transform(neg))) < 1e-14);
    std::vector<double> zero{0.0, 0.0};
    CHECK(std::abs(m.transform(zero) - 1.0) < 1e-14);
    // sparse and dense paths agree
    auto sparse = GridMeasure::normalized(1, 64, [] {
      std::vector<double> s(64, 0.0);
      s[3] = 1;
      s[40] = 2;
      return s;
    }());
    std::vector<double> dense_w(sparse.weights());
    cplx naive = 0.0;
    for (std::size_t c = 0; c < 64; ++c)
      naive += dense_w[c] * std::exp(cplx(0, -2 * std::numbers::pi * (c + 0.5) / 64.0 * 2.7));
    double x = 2.7;
    CHECK(std::abs(sparse.transform(std::span<const double>(&x, 1)) - naive) < 1e-13);
  }

  TEST_CASE("fourier sample lattice") {
    FourierSample s;
    s.n = 2;
    s.K = 3;
    s.spacing = 0.5;
    s.values.resize(49);
    for (std::size_t i = 0; i < s.size(); ++i) {
      auto k = s.lattice_index(i);
      CHECK(s.index(k) == i);
      auto f = s.freq(i);
      s.values[i] = cplx(f[0] + 2 * f[1], f[0] - f[1]);
    }
    CHECK(s.max_frequency() == 1.5);
    // multilinear interpolation reproduces affine data exactly
    std::vector<double> xi{0.3, -1.1};
    CHECK(std::abs(s.interpolate(xi) - cplx(0.3 - 2.2, 0.3 + 1.1)) < 1e-12);
    std::vector<double> far{1.6, 0.0};
    CHECK(s.interpolate(far) == cplx(0.0, 0.0));
  }
}
