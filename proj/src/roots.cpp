#include <algorithm>
#include <map>

#include "salem/configsearch.hpp"

namespace salem {

namespace {

using Poly = std::vector<Rational>;  // coefficient of x^i at index i

void trim(Poly& p) {
  while (!p.empty() && p.back() == 0) p.pop_back();
}

Poly derivative(const Poly& p) {
  Poly d;
  for (std::size_t i = 1; i < p.size(); ++i) d.push_back(p[i] * static_cast<long>(i));
  trim(d);
  return d;
}

Poly remainder(Poly a, const Poly& b) {
  while (a.size() >= b.size() && !a.empty()) {
    Rational f = a.back() / b.back();
    std::size_t shift = a.size() - b.size();
    for (std::size_t i = 0; i < b.size(); ++i) a[shift + i] -= f * b[i];
    a.pop_back();
    trim(a);
  }
  return a;
}

int sign(const Rational& q) { return q > 0 ? 1 : (q < 0 ? -1 : 0); }

int variations(const std::vector<int>& signs) {
  int v = 0, prev = 0;
  for (int s : signs) {
    if (s == 0) continue;
    if (prev != 0 && s != prev) ++v;
    prev = s;
  }
  return v;
}

}  // namespace

int count_positive_roots(const std::vector<int>& exponents, const std::vector<Rational>& coeffs) {
  if (exponents.size() != coeffs.size()) throw Error("exponents and coefficients differ in length");
  for (std::size_t i = 0; i < exponents.size(); ++i) {
    if (exponents[i] < 0) throw Error("exponents must be non-negative");
    if (i > 0 && exponents[i] <= exponents[i - 1]) throw Error("exponents must be strictly increasing");
  }
  int lowest = -1;
  for (std::size_t i = 0; i < coeffs.size(); ++i)
    if (coeffs[i] != 0) {
      lowest = exponents[i];
      break;
    }
  if (lowest < 0) throw Error("all coefficients are zero");
  Poly p(exponents.back() - lowest + 1, Rational(0));
  for (std::size_t i = 0; i < coeffs.size(); ++i)
    if (coeffs[i] != 0) p[exponents[i] - lowest] = coeffs[i];
  trim(p);
  if (p.size() <= 1) return 0;
  std::vector<Poly> seq{p, derivative(p)};
  for (;;) {
    Poly r = remainder(seq[seq.size() - 2], seq.back());
    if (r.empty()) break;
    for (auto& c : r) c = -c;
    // scale to a monic-magnitude leading coefficient to keep sizes small
    Rational lead = r.back() > 0 ? r.back() : Rational(-r.back());
    for (auto& c : r) c /= lead;
    seq.push_back(std::move(r));
  }
  std::vector<int> at_zero, at_inf;
  for (const auto& q : seq) {
    at_zero.push_back(sign(q[0]));
    at_inf.push_back(sign(q.back()));
  }
  return variations(at_zero) - variations(at_inf);
}

int count_positive_roots(const std::vector<int>& exponents, const std::vector<double>& coeffs) {
  std::vector<Rational> q;
  q.reserve(coeffs.size());
  for (double c : coeffs) q.push_back(rationalize(c));
  return count_positive_roots(exponents, q);
}

}  // namespace salem
