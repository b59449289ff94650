#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <optional>
#include <string>
#include <vector>

#include "salem/common.hpp"

namespace salem {

using Rational = boost::multiprecision::cpp_rational;

// Exact value of a finite double.
Rational rationalize(double x);
double to_double(const Rational& q);
// Parses "p/q", "p", or a decimal literal such as "-1.25".
Rational parse_rational(const std::string& text);
std::string format_rational(const Rational& q);

struct RationalMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<Rational> data;

  RationalMatrix() = default;
  RationalMatrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c) {}

  Rational& operator()(int i, int j) { return data[static_cast<std::size_t>(i) * cols + j]; }
  const Rational& operator()(int i, int j) const { return data[static_cast<std::size_t>(i) * cols + j]; }

  static RationalMatrix from(const Matrix& m);
  Matrix to_double() const;
  bool is_integral() const;
};

Rational exact_det(RationalMatrix a);
int exact_rank(RationalMatrix a);

}  // namespace salem
