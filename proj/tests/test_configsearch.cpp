#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "helpers.hpp"
#include "salem/fractal.hpp"

using namespace salem;
using salem::test::mat;

namespace {

using Key = std::vector<long>;

// x and y scaled to integers on the lattice (c + 1/2)/N.
Key key_of(const Vector& x, const Vector& y, std::size_t N) {
  Key k;
  for (Eigen::Index i = 0; i < x.size(); ++i) k.push_back(std::lround(x(i) * N - 0.5));
  for (Eigen::Index i = 0; i < y.size(); ++i) k.push_back(std::lround(y(i) * N));
  return k;
}

std::set<Key> hit_keys(const SearchResult& r, std::size_t N) {
  std::set<Key> s;
  for (const auto& h : r.hits) s.insert(key_of(h.x, h.y, N));
  return s;
}

PointSet lattice_set(int n, std::size_t N, const std::vector<std::size_t>& cells) {
  std::vector<bool> mask(ipow(N, n), false);
  for (auto c : cells) mask[c] = true;
  return PointSet::from_mask(n, N, mask, 0.25 / static_cast<double>(N));
}

bool contains(const std::set<std::vector<long>>& cells, const std::vector<long>& c) { return cells.count(c) > 0; }

}  // namespace

TEST_SUITE("configsearch") {
  TEST_CASE("triangle factory") {
    auto f = make_triangle_system(std::numbers::pi / 2, 1.0);
    CHECK(f.system.b()[2].isApprox(mat({{0, -1}, {1, 0}})));
    CHECK(f.system.has_exact());
    auto g = make_triangle_system(std::numbers::pi, 1.0);
    CHECK(g.system.b()[2].isApprox(-Matrix::Identity(2, 2)));
    CHECK(g.system.b()[0].isZero());
    CHECK(g.system.b()[1].isIdentity());
    for (double th : {0.3, 1.0, std::numbers::pi / 2, 2.5, std::numbers::pi})
      for (double lam : {0.5, 1.0, 2.0}) CHECK(check_nondegenerate(make_triangle_system(th, lam).system).passed);
    CHECK_THROWS_AS(make_triangle_system(0.0, 1.0), Error);
    CHECK_THROWS_AS(make_triangle_system(4.0, 1.0), Error);
    CHECK_THROWS_AS(make_triangle_system(1.0, 0.0), Error);
  }

  TEST_CASE("colinear factory") {
    auto ap = make_colinear_system(1, 2.0).system;
    CHECK(ap.b()[2](0, 0) == 2.0);
    CHECK(ap.b()[0](0, 0) == 0.0);
    auto c = make_colinear_system(3, 1.5).system;
    CHECK(c.m() == 6);
    auto r = check_nondegenerate(c);
    CHECK(r.passed);
    CHECK(r.exact);
    CHECK_THROWS_AS(make_colinear_system(2, 1.0), Error);
  }

  TEST_CASE("parallelogram factory") {
    auto f = make_parallelogram_system(1);
    CHECK(f.system.b()[0].isApprox(mat({{0, 0}})));
    CHECK(f.system.b()[1].isApprox(mat({{1, 0}})));
    CHECK(f.system.b()[2].isApprox(mat({{0, 1}})));
    CHECK(f.system.b()[3].isApprox(mat({{1, 1}})));
    CHECK(check_reduced_nondegenerate(f.system));
    auto f2 = make_parallelogram_system(2);
    REQUIRE(f2.exclusions.size() == 4);
    for (const auto& e : f2.exclusions) CHECK(e.dim == 2);
    Vector y(4);
    y << 1, 2, -1, -2;  // y1 + y3 = 0: lies in the third subspace
    CHECK(f2.exclusions[2].distance(y) < 1e-12);
    CHECK(f2.exclusions[3].distance(y) == doctest::Approx(std::sqrt(10.0)));
  }

  TEST_CASE("vandermonde factory") {
    auto f = make_vandermonde_system({2, 3}, 1, 1);
    CHECK(f.system.b()[1].isApprox(mat({{2, 3}})));
    CHECK(f.system.b()[2].isApprox(mat({{4, 9}})));
    CHECK(f.system.b()[3].isApprox(mat({{8, 27}})));
    CHECK(f.exclusions.size() == 3);
    CHECK(check_reduced_nondegenerate(f.system));
    CHECK(check_nondegenerate(make_vandermonde_system({2, 3, 4, 5}, 1, 1).system).passed);
    CHECK_NOTHROW(make_vandermonde_system({2, 3, 4, 5, 6, 7}, 0, 1));
    CHECK_THROWS_AS(make_vandermonde_system({2, 3}, -1, 1), Error);
    CHECK_THROWS_AS(make_vandermonde_system({2, 2}, 1, 1), Error);
    CHECK_THROWS_AS(make_vandermonde_system({1, 3}, 1, 1), Error);
    CHECK_THROWS_AS(make_vandermonde_system({2, 3, 4}, 1, 1), Error);
  }

  TEST_CASE("vandermonde rank and polynomial criterion") {
    std::mt19937_64 gen(17);
    std::uniform_int_distribution<int> node(11, 100);
    std::uniform_int_distribution<int> coef(-9, 9);
    for (int draw = 0; draw < 200; ++draw) {
      const int n = 1 + draw % 2;
      std::vector<double> a;
      while (static_cast<int>(a.size()) < 2 * n) {
        double v = node(gen) / 10.0;  // (1, 10]
        if (std::find(a.begin(), a.end(), v) == a.end()) a.push_back(v);
      }
      const int eta = draw % 3, d = 1 + draw % 2;
      auto fam = make_vandermonde_system(a, eta, d);
      // stacked differences (B_i - B_1) for the first m/n = 3 indices have rank m - n
      RationalMatrix stack(2 * n, 2 * n);
      auto eb = fam.system.exact_b();
      for (int blk = 0; blk < 2; ++blk)
        for (int i = 0; i < n; ++i)
          for (int c = 0; c < 2 * n; ++c) stack(blk * n + i, c) = eb[blk + 1](i, c) - eb[0](i, c);
      CHECK(exact_rank(stack) == 2 * n);
      CHECK(check_reduced_nondegenerate(fam.system));
      std::vector<int> exps;
      std::vector<Rational> cs(2 * n);
      for (auto& c : cs) c = coef(gen);
      if (std::all_of(cs.begin(), cs.end(), [](const Rational& q) { return q == 0; })) cs[0] = 1;
      std::vector<Rational> pc;
      for (int i = 0; i < n; ++i) {
        exps.push_back(eta + i * d);
        pc.push_back(cs[i]);
      }
      for (int i = 0; i < n; ++i) {
        exps.push_back(eta + (n + i) * d);
        pc.push_back(cs[i] + cs[n + i]);
      }
      if (std::all_of(pc.begin(), pc.end(), [](const Rational& q) { return q == 0; })) continue;
      CHECK(count_positive_roots(exps, pc) < 2 * n);
    }
  }

  TEST_CASE("positive roots") {
    CHECK(count_positive_roots(std::vector<int>{0, 1, 2}, std::vector<double>{2, -3, 1}) == 2);
    CHECK(count_positive_roots(std::vector<int>{0, 1}, std::vector<double>{-1, 1}) == 1);
    CHECK(count_positive_roots(std::vector<int>{5}, std::vector<double>{3}) == 0);
    // (x - 1)^2 (x - 3): distinct roots only
    CHECK(count_positive_roots(std::vector<int>{0, 1, 2, 3}, std::vector<double>{-3, 7, -5, 1}) == 2);
    // roots at -1 and 0.5 only one positive
    CHECK(count_positive_roots(std::vector<int>{0, 1, 2}, std::vector<double>{-1, 1, 2}) == 1);
    CHECK(count_positive_roots(std::vector<int>{2, 4}, std::vector<double>{-1, 1}) == 1);
    CHECK_THROWS_AS(count_positive_roots(std::vector<int>{0, 1}, std::vector<double>{0, 0}), Error);
    CHECK_THROWS_AS(count_positive_roots(std::vector<int>{1, 1}, std::vector<double>{1, 2}), Error);
    CHECK_THROWS_AS(count_positive_roots(std::vector<int>{0}, std::vector<double>{1, 2}), Error);
    std::mt19937_64 gen(4);
    std::uniform_int_distribution<int> coef(-20, 20), gap(1, 4), terms(1, 6);
    for (int trial = 0; trial < 1000; ++trial) {
      int t = terms(gen);
      std::vector<int> e;
      std::vector<double> c;
      int cur = gap(gen) - 1;
      for (int i = 0; i < t; ++i) {
        e.push_back(cur);
        cur += gap(gen);
        int v = coef(gen);
        c.push_back(v == 0 ? 1 : v);
      }
      CHECK(count_positive_roots(e, c) < t);
    }
  }

  TEST_CASE("point index") {
    std::mt19937_64 gen(2);
    std::uniform_real_distribution<double> u(0, 1);
    PointSet ps;
    ps.n = 2;
    ps.tol = 0.03;
    for (int i = 0; i < 300; ++i) ps.points.push_back({u(gen), u(gen)});
    PointIndex idx(ps);
    for (int q = 0; q < 2000; ++q) {
      double p[2] = {u(gen) * 1.2 - 0.1, u(gen) * 1.2 - 0.1};
      double brute = idx.nearest_brute(p);
      auto got = idx.nearest(p);
      if (brute <= ps.tol) {
        REQUIRE(got.has_value());
        CHECK(*got == doctest::Approx(brute).epsilon(1e-15));
      } else {
        CHECK_FALSE(got.has_value());
      }
    }
    PointSet bad = ps;
    bad.points.push_back({1.5, 0.2});
    CHECK_THROWS_AS(bad.validate(), Error);
    bad = ps;
    bad.tol = 0.0;
    CHECK_THROWS_AS(bad.validate(), Error);
  }

  TEST_CASE("dense and single-point sets") {
    const std::size_t N = 8;
    std::vector<std::size_t> all(N * N);
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    auto dense = lattice_set(2, N, all);
    auto single = lattice_set(2, N, {27});
    SearchOptions o;
    o.y_steps = N;
    o.max_hits = 50;
    std::vector<ConfigurationFamily> fams{make_triangle_system(std::numbers::pi / 2, 1.0), make_colinear_system(2, 2.0),
                                          make_parallelogram_system(2)};
    for (const auto& f : fams) {
      auto r = search_configurations(f.system, dense, f.exclusions, o);
      CHECK(r.hits.size() >= 1);
      for (const auto& h : r.hits) CHECK(validate_hit(f.system, dense, f.exclusions, 1.0 / N, h).empty());
      CHECK(search_configurations(f.system, single, f.exclusions, o).hits.empty());
    }
    auto line = lattice_set(1, 32, [] {
      std::vector<std::size_t> c(32);
      for (std::size_t i = 0; i < 32; ++i) c[i] = i;
      return c;
    }());
    auto vm = make_vandermonde_system({1.5, 2.0}, 0, 1);
    SearchOptions ov;
    ov.y_steps = 32;
    ov.max_hits = 10;
    auto rv = search_configurations(vm.system, line, vm.exclusions, ov);
    CHECK(rv.hits.size() >= 1);
    for (const auto& h : rv.hits) CHECK(validate_hit(vm.system, line, vm.exclusions, 1.0 / 32, h).empty());
  }

  TEST_CASE("product cantor set against the exact oracle") {
    // product of two 1-D Cantor sets at stage 3
    auto a = cantor_cells(CantorParams{1, 4, 2, 3, 1, CantorMode::independent_uniform});
    auto b = cantor_cells(CantorParams{1, 4, 2, 3, 2, CantorMode::independent_uniform});
    const std::size_t N = 64;
    std::vector<std::size_t> cells;
    std::set<std::vector<long>> occupied;
    for (auto i : a)
      for (auto j : b) {
        cells.push_back(i * N + j);
        occupied.insert({static_cast<long>(i), static_cast<long>(j)});
      }
    auto E = lattice_set(2, N, cells);
    auto fam = make_parallelogram_system(2);
    SearchOptions o;
    o.y_steps = N;
    auto r = search_configurations(fam.system, E, fam.exclusions, o);
    // oracle: x, x + y1 and x + y2 pin y exactly; check x + y1 + y2 and the exclusions
    std::set<Key> oracle;
    const double thr = 1.0 / N;
    for (const auto& x : occupied)
      for (const auto& p : occupied)
        for (const auto& q : occupied) {
          std::vector<long> y{p[0] - x[0], p[1] - x[1], q[0] - x[0], q[1] - x[1]};
          if (std::any_of(y.begin(), y.end(), [&](long v) { return std::labs(v) > static_cast<long>(N); })) continue;
          if (!contains(occupied, {x[0] + y[0] + y[2], x[1] + y[1] + y[3]})) continue;
          double yy[4];
          for (int i = 0; i < 4; ++i) yy[i] = static_cast<double>(y[i]) / N;
          double d1 = std::hypot(yy[0], yy[1]), d2 = std::hypot(yy[2], yy[3]);
          double d3 = std::hypot(yy[0] + yy[2], yy[1] + yy[3]) / std::sqrt(2.0);
          double d4 = std::hypot(yy[0] - yy[2], yy[1] - yy[3]) / std::sqrt(2.0);
          if (!(d1 > thr && d2 > thr && d3 > thr && d4 > thr)) continue;
          Key k{x[0], x[1]};
          k.insert(k.end(), y.begin(), y.end());
          oracle.insert(k);
        }
    CHECK(oracle.size() > 0);
    CHECK(hit_keys(r, N) == oracle);
    CHECK(r.hits.size() == oracle.size());
    for (std::size_t i = 1; i < r.hits.size(); ++i) CHECK(r.hits[i - 1].max_dist <= r.hits[i].max_dist);
    // permutation of E leaves the hit set unchanged
    auto shuffled = E;
    std::mt19937_64 gen(3);
    std::shuffle(shuffled.points.begin(), shuffled.points.end(), gen);
    CHECK(hit_keys(search_configurations(fam.system, shuffled, fam.exclusions, o), N) == oracle);
    o.threads = 1;
    CHECK(hit_keys(search_configurations(fam.system, E, fam.exclusions, o), N) == oracle);
  }

  TEST_CASE("search limits") {
    auto fam = make_parallelogram_system(2);
    auto E = lattice_set(2, 8, {0, 9, 18, 27, 36, 45});
    SearchOptions o;
    o.y_steps = 8;
    o.cap = 100;
    CHECK_THROWS_AS(search_configurations(fam.system, E, fam.exclusions, o), Error);
    auto other = lattice_set(1, 8, {1, 2});
    o.cap = 100000000;
    CHECK_THROWS_AS(search_configurations(fam.system, other, fam.exclusions, o), Error);
  }

  TEST_CASE("C epsilon") {
    auto ap = test::ap_system();
    auto zero = c_epsilon_measure(ap, {{0}}, 0.2, 10000, 1);
    CHECK(zero.estimate == 1.0);
    auto r = c_epsilon_measure(ap, {{1}}, 0.2, 1000000, 2);
    CHECK(r.estimate >= r.analytic_lower_bound - 2.576 * r.std_error);
    // ||y|| <= 0.2 and ||2y|| <= 0.2 on [0,1]: measure 0.2 exactly
    CHECK(std::fabs(r.estimate - 0.2) <= 4 * r.std_error);
    CHECK(c_epsilon_measure(ap, {{1}, {3}}, 0.99, 10000, 3).estimate == 1.0);
    CHECK(c_epsilon_lower_bound(3, 1, 1, 0.2) == doctest::Approx(std::pow(0.5 * 0.1, 3)));
    CHECK_THROWS_AS(c_epsilon_measure(ap, {{1}}, 1.0, 100, 1), Error);
    CHECK_THROWS_AS(c_epsilon_measure(ap, {}, 0.2, 100, 1), Error);
    CHECK_THROWS_AS(c_epsilon_measure(ap, {{1, 2}}, 0.2, 100, 1), Error);
    auto t1 = c_epsilon_measure(make_parallelogram_system(1).system, {{1}, {2}}, 0.3, 50000, 9, 1);
    auto t4 = c_epsilon_measure(make_parallelogram_system(1).system, {{1}, {2}}, 0.3, 50000, 9, 4);
    CHECK(t1.estimate == t4.estimate);
  }

  TEST_CASE("atom count bound") {
    CHECK(atom_count_bound(0.1) == 4.0 * std::sqrt(2.0) * std::numbers::pi / 0.1);
    CHECK(atom_count_bound(0.1) == doctest::Approx(177.7).epsilon(1e-3));
    CHECK(atom_count_bound(1.0) == 4.0 * std::sqrt(2.0) * std::numbers::pi);
    CHECK(atom_count_bound(0.2) > atom_count_bound(0.3));
    CHECK_THROWS_AS(atom_count_bound(0.0), Error);
  }
}
