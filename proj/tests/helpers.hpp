#pragma once

#include <cmath>
#include <numbers>
#include <random>

#include "salem/configsearch.hpp"
#include "salem/linsys.hpp"

namespace salem::test {

inline Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(rows.size(), rows.begin()->size());
  int i = 0;
  for (const auto& r : rows) {
    int j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

inline MatrixSystem ap_system() { return build_system(1, 3, 2, {mat({{0}}), mat({{1}}), mat({{2}})}); }

inline MatrixSystem counterexample_system() {
  return MatrixSystem::from_a(2, 3, 4,
                              std::vector<Matrix>{mat({{1, 0, 0, 0}, {0, 1, 0, 0}}), mat({{0, 0, 1, 0}, {0, 0, 0, 1}}),
                                                  mat({{0, 1, 1, 0}, {1, 0, 0, 1}})});
}

inline double bump(double x, double lo = 0.1, double hi = 0.9) {
  double u = (x - 0.5 * (lo + hi)) / (0.5 * (hi - lo));
  return std::fabs(u) < 1.0 ? std::exp(-1.0 / (1.0 - u * u)) : 0.0;
}

}  // namespace salem::test
