#include "salem/rational.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace salem {

Rational rationalize(double x) {
  if (!std::isfinite(x)) throw Error("cannot rationalise a non-finite value");
  if (x == 0.0) return Rational(0);
  int exp = 0;
  double mant = std::frexp(x, &exp);
  // mant * 2^53 is an exact integer
  auto scaled = static_cast<long long>(std::ldexp(mant, 53));
  exp -= 53;
  boost::multiprecision::cpp_int num(scaled);
  boost::multiprecision::cpp_int den(1);
  if (exp > 0)
    num <<= exp;
  else
    den <<= -exp;
  return Rational(num, den);
}

double to_double(const Rational& q) { return q.convert_to<double>(); }

namespace {

boost::multiprecision::cpp_int parse_integer(std::string s) {
  bool negative = false;
  if (!s.empty() && (s[0] == '-' || s[0] == '+')) {
    negative = s[0] == '-';
    s.erase(0, 1);
  }
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) throw std::invalid_argument(s);
  s.erase(0, std::min(s.find_first_not_of('0'), s.size() - 1));
  boost::multiprecision::cpp_int v(s);
  return negative ? boost::multiprecision::cpp_int(-v) : v;
}

}  // namespace

Rational parse_rational(const std::string& text) {
  auto slash = text.find('/');
  try {
    if (slash != std::string::npos) {
      auto p = parse_integer(text.substr(0, slash));
      auto q = parse_integer(text.substr(slash + 1));
      if (q == 0) throw Error("zero denominator in '" + text + "'");
      return Rational(p, q);
    }
    auto dot = text.find('.');
    if (dot == std::string::npos) return Rational(parse_integer(text));
    std::string digits = text.substr(0, dot) + text.substr(dot + 1);
    boost::multiprecision::cpp_int den = pow(boost::multiprecision::cpp_int(10), static_cast<unsigned>(text.size() - dot - 1));
    return Rational(parse_integer(digits), den);
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    throw Error("not a rational number: '" + text + "'");
  }
}

std::string format_rational(const Rational& q) {
  if (denominator(q) == 1) return numerator(q).str();
  return numerator(q).str() + "/" + denominator(q).str();
}

RationalMatrix RationalMatrix::from(const Matrix& m) {
  RationalMatrix out(static_cast<int>(m.rows()), static_cast<int>(m.cols()));
  for (int i = 0; i < out.rows; ++i)
    for (int j = 0; j < out.cols; ++j) out(i, j) = rationalize(m(i, j));
  return out;
}

Matrix RationalMatrix::to_double() const {
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = salem::to_double((*this)(i, j));
  return m;
}

bool RationalMatrix::is_integral() const {
  for (const auto& q : data)
    if (denominator(q) != 1) return false;
  return true;
}

Rational exact_det(RationalMatrix a) {
  if (a.rows != a.cols) throw Error("determinant of a non-square matrix");
  const int n = a.rows;
  Rational det(1);
  for (int c = 0; c < n; ++c) {
    int piv = -1;
    for (int r = c; r < n; ++r)
      if (a(r, c) != 0) {
        piv = r;
        break;
      }
    if (piv < 0) return Rational(0);
    if (piv != c) {
      for (int j = 0; j < n; ++j) std::swap(a(piv, j), a(c, j));
      det = -det;
    }
    det *= a(c, c);
    for (int r = c + 1; r < n; ++r) {
      if (a(r, c) == 0) continue;
      Rational f = a(r, c) / a(c, c);
      for (int j = c; j < n; ++j) a(r, j) -= f * a(c, j);
    }
  }
  return det;
}

int exact_rank(RationalMatrix a) {
  int rank = 0;
  for (int c = 0; c < a.cols && rank < a.rows; ++c) {
    int piv = -1;
    for (int r = rank; r < a.rows; ++r)
      if (a(r, c) != 0) {
        piv = r;
        break;
      }
    if (piv < 0) continue;
    if (piv != rank)
      for (int j = 0; j < a.cols; ++j) std::swap(a(piv, j), a(rank, j));
    for (int r = rank + 1; r < a.rows; ++r) {
      if (a(r, c) == 0) continue;
      Rational f = a(r, c) / a(rank, c);
      for (int j = c; j < a.cols; ++j) a(r, j) -= f * a(rank, j);
    }
    ++rank;
  }
  return rank;
}

}  // namespace salem
