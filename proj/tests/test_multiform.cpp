#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "salem/fractal.hpp"
#include "salem/multiform.hpp"

using namespace salem;

namespace {

GridFunction bump1(int grid = 256) {
  return GridFunction::sample(1, grid, Box{{0.1}, {0.9}}, [](std::span<const double> x) { return test::bump(x[0]); });
}

GridFunction ones(int n, int grid) { return GridFunction(n, grid, Box::unit(n), std::vector<double>(ipow(grid, n), 1.0)); }

GridFunction random_density(int n, int grid, std::mt19937_64& gen, double top) {
  std::uniform_real_distribution<double> u(0.0, top);
  std::vector<double> v(ipow(grid, n));
  for (auto& x : v) x = u(gen);
  return GridFunction(n, grid, Box::unit(n), v);
}

std::vector<Transform> transforms(const std::vector<GridFunction>& f) {
  std::vector<Transform> t;
  for (const auto& g : f) t.push_back(g.transform_fn());
  return t;
}

}  // namespace

TEST_SUITE("multiform") {
  TEST_CASE("closed-form AP volume") {
    DirectOptions o;
    o.grid = 512;
    auto r = lambda_direct(test::ap_system(), std::vector<GridFunction>(3, ones(1, 64)), o);
    CHECK(std::fabs(r.value - 0.5) <= 0.02);
    CHECK(r.method == LambdaMethod::direct);
  }

  TEST_CASE("empty support is exact zero") {
    auto s = test::counterexample_system();
    GridFunction ball = GridFunction::sample(2, 64, Box{{-0.25, 0.75}, {0.25, 1.25}}, [](std::span<const double> x) {
      return x[0] * x[0] + (x[1] - 1) * (x[1] - 1) < 0.0625 ? 1.0 : 0.0;
    });
    auto r = lambda_direct(s, std::vector<GridFunction>(3, ball));
    CHECK(r.value == 0.0);
    CHECK(r.has_flag("empty-support"));
    std::vector<Box> boxes(3, ball.support_box());
    CHECK_FALSE(support_region(s, boxes).has_value());
    auto ok = support_region(test::ap_system(), std::vector<Box>(3, Box::unit(1)));
    REQUIRE(ok.has_value());
    CHECK(ok->lo[0] <= 0.0);
    CHECK(ok->hi[0] >= 1.0);
  }

  TEST_CASE("zero function, positivity and multilinearity") {
    std::mt19937_64 gen(3);
    auto s = test::ap_system();
    auto f1 = random_density(1, 32, gen, 1.0), h = random_density(1, 32, gen, 1.0);
    auto f2 = random_density(1, 32, gen, 1.0), f3 = random_density(1, 32, gen, 1.0);
    auto zero = f1.scaled(0.0);
    CHECK(lambda_direct(s, {zero, f2, f3}).value == 0.0);
    auto a = lambda_direct(s, {f1, f2, f3}).value, b = lambda_direct(s, {h, f2, f3}).value;
    auto ab = lambda_direct(s, {f1 + h, f2, f3}).value;
    CHECK(std::fabs(ab - a - b) <= 1e-8 * std::fabs(ab));
    CHECK(a >= 0.0);
    DirectOptions mc;
    mc.monte_carlo = true;
    mc.samples = 1 << 16;
    auto rm = lambda_direct(s, {f1, f2, f3}, mc);
    CHECK(rm.method == LambdaMethod::direct_monte_carlo);
    CHECK(std::fabs(rm.value - a) <= 0.05 * a);
  }

  TEST_CASE("quantitative positivity on random densities") {
    std::mt19937_64 gen(8);
    auto par = make_parallelogram_system(1).system;
    for (int trial = 0; trial < 50; ++trial) {
      auto f = random_density(1, 16, gen, 2.0);
      if (f.integral() < 0.3) continue;
      DirectOptions o;
      o.grid = 32;
      CHECK(lambda_direct(test::ap_system(), std::vector<GridFunction>(3, f), o).value > 0.0);
      CHECK(lambda_direct(par, std::vector<GridFunction>(4, f), o).value > 0.0);
    }
  }

  TEST_CASE("representation equivalence on smooth bumps") {
    auto s = test::ap_system();
    std::vector<GridFunction> f(3, bump1());
    DirectOptions d;
    d.grid = 512;
    auto direct = lambda_direct(s, f, d);
    FourierOptions fo;
    fo.R = 32;
    fo.Q = 2048;
    auto fourier = lambda_fourier(s, transforms(f), fo);
    CHECK(std::fabs(fourier.value - direct.value) <= 0.05 * std::fabs(direct.value) + 1e-4);
    CHECK(std::fabs(fourier.imag) <= 1e-6 * (std::fabs(fourier.value) + 1));
    CHECK(fourier_constant(s) == doctest::Approx(1.0 / std::sqrt(6.0)).epsilon(1e-12));
  }

  TEST_CASE("fourier side examples") {
    auto s = test::ap_system();
    Transform one = [](std::span<const double>) { return cplx(1.0, 0.0); };
    Transform zero = [](std::span<const double>) { return cplx(0.0, 0.0); };
    FourierOptions fo;
    fo.R = 32;
    fo.Q = 256;
    auto div = lambda_fourier(s, {one, one, one}, fo);
    CHECK(div.divergent());
    CHECK(std::isinf(div.est_error));
    fo.R = 64;
    CHECK(lambda_fourier(s, {one, one, one}, fo).value > div.value);
    CHECK(lambda_fourier(s, {zero, one, one}, fo).value == 0.0);
    CHECK_THROWS_AS(lambda_fourier(s, {one, one}, fo), Error);
  }

  TEST_CASE("translated form") {
    auto s = test::ap_system();
    std::vector<GridFunction> f(3, bump1(128));
    FourierOptions fo;
    fo.R = 32;
    fo.Q = 1024;
    auto t = transforms(f);
    auto full = lambda_fourier(s, t, fo);
    auto star = lambda_star_tau(s, t, Vector::Zero(3), fo);
    CHECK(fourier_constant(s) * star.value == doctest::Approx(full.value).epsilon(1e-12));
    Vector bad(3);
    bad << 1, -2, 1;
    CHECK_FALSE(in_S_perp(s, bad));
    CHECK_THROWS_AS(lambda_star_tau(s, t, bad, fo), Error);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      Vector tau = random_tau(s, seed);
      CHECK(in_S_perp(s, tau));
      CHECK(tau.norm() == doctest::Approx(1.0));
    }
  }

  TEST_CASE("uniformity over tau") {
    auto s = test::ap_system();
    auto env = envelope_transform(1.5);
    std::vector<Transform> g(3, env);
    FourierOptions fo;
    fo.R = 256;
    fo.Q = 16384;
    double lo = INFINITY, hi = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      auto r = lambda_star_tau(s, g, random_tau(s, seed), fo);
      CHECK_FALSE(r.divergent());
      lo = std::min(lo, r.value);
      hi = std::max(hi, r.value);
    }
    CHECK(hi <= 1.1 * lo);
  }

  TEST_CASE("theta") {
    auto s = test::ap_system();
    std::vector<GridFunction> f(3, bump1(128));
    GridFunction g = ones(2, 64);
    ThetaOptions o;
    o.grid = 256;
    o.R = 24;
    o.Q = 192;
    auto th = theta_eval(s, g, f, o);
    CHECK(std::fabs(th.direct - th.fourier) <= 0.05 * std::fabs(th.direct));
    // g = 1 on the whole support region reproduces Lambda
    auto region = support_region(s, std::vector<Box>(3, f[0].support_box()));
    REQUIRE(region.has_value());
    Box wide = *region;
    for (int a = 0; a < 2; ++a) {
      wide.lo[a] -= 0.5;
      wide.hi[a] += 0.5;
    }
    GridFunction big(2, 8, wide, std::vector<double>(64, 1.0));
    DirectOptions d;
    d.grid = 256;
    auto th1 = theta_eval(s, big, f, o);
    auto lam = lambda_direct(s, f, d);
    CHECK(th1.direct == doctest::Approx(lam.value).epsilon(0.01));
    auto zf = f;
    zf[0] = zf[0].scaled(0.0);
    auto th0 = theta_eval(s, g, zf, o);
    CHECK(th0.direct == 0.0);
    CHECK(th0.fourier == 0.0);
  }

  TEST_CASE("decomposition") {
    auto s = test::ap_system();
    auto m = gen_random_cantor(CantorParams{1, 4, 2, 4, 5, CantorMode::independent_uniform}, 256);
    auto k = make_mollifier(256, 8);
    auto m1 = mollified_part(m, k), m2 = remainder_part(m, k);
    FourierOptions fo;
    fo.R = 8;
    fo.Q = 512;
    auto terms = decomposition_terms(s, m1, m2, fo);
    REQUIRE(terms.size() == 8);
    double sum = 0.0;
    for (const auto& t : terms) sum += t.value;
    auto whole = lambda_star_tau(s, std::vector<Transform>(3, m.transform_fn()), Vector::Zero(3), fo);
    CHECK(std::fabs(sum - whole.value) <= 1e-9 * std::fabs(whole.value));
    Transform zero = [](std::span<const double>) { return cplx(0.0, 0.0); };
    auto only = decomposition_terms(s, m1, zero, fo);
    CHECK(only[0].value != 0.0);
    for (int p = 1; p < 8; ++p) CHECK(only[p].value == 0.0);
  }

  TEST_CASE("hoelder-type bound") {
    // AP system: k - 1 = 2 >= 2r. Cauchy-Schwarz on the chart gives M = sqrt(3).
    auto s = test::ap_system();
    std::mt19937_64 gen(21);
    FourierOptions fo;
    fo.R = 64;
    fo.Q = 4096;
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<GridFunction> f;
      for (int j = 0; j < 3; ++j) f.push_back(random_density(1, 32, gen, 1.0));
      auto val = lambda_fourier(s, transforms(f), fo);
      double sup3 = 0.0;
      for (int i = -256; i <= 256; ++i) {
        double xi = i * 0.25;
        sup3 = std::max(sup3, std::abs(f[2].transform(std::span<const double>(&xi, 1))));
      }
      double bound = std::sqrt(3.0) * sup3 * std::sqrt(f[0].l1()) * std::sqrt(f[1].l1());
      CHECK(std::fabs(val.value) <= 1.05 * bound);
    }
  }
}
