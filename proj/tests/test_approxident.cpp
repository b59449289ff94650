#include <doctest.h>

#include <cmath>
#include <numbers>

#include "helpers.hpp"
#include "salem/approxident.hpp"

using namespace salem;

namespace {

double gaussian(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::exp(-std::numbers::pi * s);
}

}  // namespace

TEST_SUITE("approxident") {
  TEST_CASE("gaussian over planes through the origin") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      Matrix P = random_orthogonal(3, seed).topRows(1);
      auto chart = make_chart(P);
      CHECK(chart.v() == 2);
      CHECK(surface_integral(chart, gaussian, 4.0, 200) == doctest::Approx(1.0).epsilon(0.01));
      auto line = make_chart(random_orthogonal(3, seed + 10).topRows(2));
      CHECK(surface_integral(line, gaussian, 4.0, 400) == doctest::Approx(1.0).epsilon(0.01));
    }
    auto chart = make_chart(test::mat({{1, 2, 3}}));
    CHECK(surface_integral(chart, [](std::span<const double>) { return 0.0; }, 4.0, 50) == 0.0);
  }

  TEST_CASE("basis independence") {
    auto chart = make_chart(test::mat({{1, -2, 0.5}}));
    RealField F = [](std::span<const double> x) { return std::exp(-std::numbers::pi * (x[0] * x[0] + 2 * x[1] * x[1] + x[2] * x[2])); };
    double base = surface_integral(chart, F, 4.0, 400);
    double base_cp = constant_CP(chart);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      auto rot = rotated_chart(chart, seed);
      CHECK(std::fabs(constant_CP(rot) - base_cp) <= 1e-9);
    }
    auto rot = rotated_chart(chart, 99);
    // a rotated tensor grid samples different nodes; the midpoint rule converges spectrally for Gaussians
    CHECK(std::fabs(surface_integral(rot, F, 4.0, 400) - base) <= 1e-10);
    CHECK_THROWS_AS(make_chart(chart.P, chart.V_basis * 2.0, chart.complement), Error);
  }

  TEST_CASE("constant examples") {
    Matrix P(2, 4);
    P << 0, 0, 1, 0, 0, 0, 0, 1;
    auto chart = make_chart(P);
    CHECK(constant_CP(chart) == doctest::Approx(1.0).epsilon(1e-12));
    for (double c : {0.5, 3.0}) {
      auto scaled = make_chart(P * c);
      CHECK(constant_CP(scaled) == doctest::Approx(c * c).epsilon(1e-12));
      CHECK(limit_constant(scaled) == doctest::Approx(1.0 / (c * c)).epsilon(1e-12));
    }
    CHECK_THROWS_AS(make_chart(test::mat({{1, 2}, {2, 4}})), Error);
    auto ap = make_chart(test::ap_system().transpose_map());
    CHECK(constant_CP(ap) == doctest::Approx(std::sqrt(6.0)).epsilon(1e-12));
  }

  TEST_CASE("mollified limit") {
    auto chart = make_chart(test::mat({{0, 1}}));
    std::vector<double> eps{0.25, 0.125, 0.0625, 1.0 / 64};
    auto rows = mollified_limit_check(chart, gaussian, eps);
    REQUIRE(rows.size() == 4);
    CHECK(rows.back().rel_err <= 0.02);
    CHECK(rows.back().rel_err <= rows.front().rel_err);
    CHECK(rows.back().target == doctest::Approx(1.0).epsilon(1e-6));
    RealField away = [](std::span<const double> x) {
      double r = x[1] - 2.0;
      return std::fabs(r) < 1.0 ? std::exp(-1.0 / (1.0 - r * r)) * std::exp(-x[0] * x[0]) : 0.0;
    };
    auto far = mollified_limit_check(chart, away, {0.25, 0.0625, 1.0 / 64});
    CHECK(std::fabs(far.back().value) < 1e-6);
    CHECK(std::fabs(far.back().value) <= std::fabs(far.front().value));
    auto big = make_chart(Matrix::Identity(1, 5));
    CHECK_THROWS_AS(mollified_limit_check(big, gaussian, {0.1}), Error);
  }
}
