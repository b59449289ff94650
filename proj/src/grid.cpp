#include "salem/grid.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "salem/simd.hpp"

namespace salem {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double sinc(double t) {
  if (t == 0.0) return 1.0;
  double a = std::numbers::pi * t;
  return std::sin(a) / a;
}

cplx phase(double angle) { return {std::cos(angle), std::sin(angle)}; }

}  // namespace

std::size_t ipow(std::size_t base, int exp) {
  std::size_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

void unravel(std::size_t index, int n, std::size_t N, std::vector<std::size_t>& out) {
  out.resize(n);
  for (int a = n - 1; a >= 0; --a) {
    out[a] = index % N;
    index /= N;
  }
}

cplx grid_phase_sum(std::span<const double> values, int n, std::size_t N, std::span<const double> lo,
                    std::span<const double> h, std::span<const double> xi) {
  const int last = n - 1;
  const double theta_last = -kTwoPi * h[last] * xi[last];
  const cplx off_last = phase(-kTwoPi * (lo[last] + 0.5 * h[last]) * xi[last]);
  if (n == 1) return off_last * simd::phase_sum(values, theta_last);
  std::size_t rows = values.size() / N;
  std::vector<cplx> cur(rows);
  for (std::size_t r = 0; r < rows; ++r) cur[r] = simd::phase_sum(values.subspan(r * N, N), theta_last) * off_last;
  for (int axis = last - 1; axis >= 0; --axis) {
    const double theta = -kTwoPi * h[axis] * xi[axis];
    const cplx off = phase(-kTwoPi * (lo[axis] + 0.5 * h[axis]) * xi[axis]);
    rows /= N;
    std::vector<cplx> next(rows);
    for (std::size_t r = 0; r < rows; ++r)
      next[r] = simd::phase_sum(std::span<const cplx>(cur).subspan(r * N, N), theta) * off;
    cur.swap(next);
  }
  return cur[0];
}

GridFunction::GridFunction(int n, std::size_t N, Box domain, std::vector<double> values)
    : n_(n), N_(N), domain_(std::move(domain)), values_(std::move(values)) {
  if (n < 1 || N < 1) throw Error("grid function needs n >= 1 and N >= 1");
  if (domain_.dim() != n || static_cast<int>(domain_.hi.size()) != n) throw Error("grid function domain has wrong dimension");
  if (values_.size() != ipow(N, n))
    throw Error("grid function expects " + std::to_string(ipow(N, n)) + " values, got " + std::to_string(values_.size()));
  h_.resize(n);
  for (int a = 0; a < n; ++a) {
    if (!(domain_.hi[a] > domain_.lo[a])) throw Error("grid function domain is empty");
    h_[a] = (domain_.hi[a] - domain_.lo[a]) / static_cast<double>(N);
  }
  for (double v : values_)
    if (!std::isfinite(v)) throw Error("grid function has non-finite samples");
}

GridFunction GridFunction::sample(int n, std::size_t N, Box domain, const RealField& f) {
  std::vector<double> vals(ipow(N, n));
  std::vector<std::size_t> idx;
  std::vector<double> x(n);
  for (std::size_t i = 0; i < vals.size(); ++i) {
    unravel(i, n, N, idx);
    for (int a = 0; a < n; ++a)
      x[a] = domain.lo[a] + (static_cast<double>(idx[a]) + 0.5) * (domain.hi[a] - domain.lo[a]) / static_cast<double>(N);
    vals[i] = f(x);
  }
  return GridFunction(n, N, std::move(domain), std::move(vals));
}

double GridFunction::operator()(std::span<const double> x) const {
  long i0[8];
  double t[8];
  for (int a = 0; a < n_; ++a) {
    double u = (x[a] - domain_.lo[a]) / h_[a] - 0.5;
    if (u <= -1.0 || u >= static_cast<double>(N_)) return 0.0;
    double f = std::floor(u);
    i0[a] = static_cast<long>(f);
    t[a] = u - f;
  }
  double acc = 0.0;
  const long NN = static_cast<long>(N_);
  for (unsigned corner = 0; corner < (1u << n_); ++corner) {
    double w = 1.0;
    std::size_t flat = 0;
    bool inside = true;
    for (int a = 0; a < n_; ++a) {
      bool up = (corner >> (n_ - 1 - a)) & 1u;
      long c = i0[a] + (up ? 1 : 0);
      if (c < 0 || c >= NN) {
        inside = false;
        break;
      }
      w *= up ? t[a] : 1.0 - t[a];
      flat = flat * N_ + static_cast<std::size_t>(c);
    }
    if (inside && w != 0.0) acc += w * values_[flat];
  }
  return acc;
}

Box GridFunction::support_box() const {
  Box b = domain_;
  for (int a = 0; a < n_; ++a) {
    b.lo[a] -= 0.5 * h_[a];
    b.hi[a] += 0.5 * h_[a];
  }
  return b;
}

cplx GridFunction::transform(std::span<const double> xi) const {
  double envelope = 1.0;
  for (int a = 0; a < n_; ++a) {
    double s = sinc(h_[a] * xi[a]);
    envelope *= h_[a] * s * s;
  }
  if (envelope == 0.0) return {0.0, 0.0};
  return envelope * grid_phase_sum(values_, n_, N_, domain_.lo, h_, xi);
}

Transform GridFunction::transform_fn() const {
  return [self = *this](std::span<const double> xi) { return self.transform(xi); };
}

double GridFunction::integral() const {
  double vol = 1.0;
  for (double h : h_) vol *= h;
  double s = 0.0;
  for (double v : values_) s += v;
  return s * vol;
}

double GridFunction::l1() const {
  double vol = 1.0;
  for (double h : h_) vol *= h;
  double s = 0.0;
  for (double v : values_) s += std::fabs(v);
  return s * vol;
}

double GridFunction::l2() const {
  double vol = 1.0;
  for (double h : h_) vol *= h;
  double s = 0.0;
  for (double v : values_) s += v * v;
  return std::sqrt(s * vol);
}

double GridFunction::sup() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::fabs(v));
  return m;
}

GridFunction GridFunction::operator+(const GridFunction& other) const {
  if (other.n_ != n_ || other.N_ != N_ || other.domain_.lo != domain_.lo || other.domain_.hi != domain_.hi)
    throw Error("cannot add grid functions on different grids");
  std::vector<double> v = values_;
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += other.values_[i];
  return GridFunction(n_, N_, domain_, std::move(v));
}

GridFunction GridFunction::scaled(double factor) const {
  std::vector<double> v = values_;
  for (double& x : v) x *= factor;
  return GridFunction(n_, N_, domain_, std::move(v));
}

GridMeasure::GridMeasure(int n, std::size_t N, std::vector<double> weights)
    : n_(n), N_(N), weights_(std::move(weights)) {
  if (n < 1) throw Error("measure dimension must be positive");
  if (N < 1 || (N & (N - 1)) != 0) throw Error("cells per axis must be a power of two");
  if (weights_.size() != ipow(N, n))
    throw Error("measure expects " + std::to_string(ipow(N, n)) + " weights, got " + std::to_string(weights_.size()));
  double sum = 0.0;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    double w = weights_[i];
    if (!std::isfinite(w) || w < 0.0) throw Error("measure weights must be finite and non-negative");
    sum += w;
    if (w > 0.0) support_.push_back(i);
  }
  if (std::fabs(sum - 1.0) > 1e-12 + 1e-16 * static_cast<double>(weights_.size()))
    throw Error("measure weights sum to " + std::to_string(sum) + ", expected 1");
}

GridMeasure GridMeasure::normalized(int n, std::size_t N, std::vector<double> weights) {
  double sum = 0.0;
  for (double w : weights) sum += w;
  if (!(sum > 0.0)) throw Error("measure has no mass");
  for (double& w : weights) w /= sum;
  return GridMeasure(n, N, std::move(weights));
}

GridMeasure GridMeasure::point_mass(int n, std::size_t N, std::size_t cell) {
  std::vector<double> w(ipow(N, n), 0.0);
  w.at(cell) = 1.0;
  return GridMeasure(n, N, std::move(w));
}

GridMeasure GridMeasure::uniform(int n, std::size_t N) {
  std::size_t cells = ipow(N, n);
  return normalized(n, N, std::vector<double>(cells, 1.0));
}

std::vector<bool> GridMeasure::support_mask() const {
  std::vector<bool> mask(weights_.size(), false);
  for (auto i : support_) mask[i] = true;
  return mask;
}

cplx GridMeasure::transform(std::span<const double> xi) const {
  const double h = 1.0 / static_cast<double>(N_);
  if (support_.size() * 8 < weights_.size()) {
    std::vector<std::size_t> idx;
    double re = 0.0, im = 0.0;
    for (auto i : support_) {
      unravel(i, n_, N_, idx);
      double dot = 0.0;
      for (int a = 0; a < n_; ++a) dot += (static_cast<double>(idx[a]) + 0.5) * h * xi[a];
      double ang = -kTwoPi * dot;
      re += weights_[i] * std::cos(ang);
      im += weights_[i] * std::sin(ang);
    }
    return {re, im};
  }
  std::vector<double> lo(n_, 0.0), hs(n_, h);
  return grid_phase_sum(weights_, n_, N_, lo, hs, xi);
}

Transform GridMeasure::transform_fn() const {
  return [self = *this](std::span<const double> xi) { return self.transform(xi); };
}

GridFunction GridMeasure::density() const {
  double scale = static_cast<double>(ipow(N_, n_));
  std::vector<double> v = weights_;
  for (double& x : v) x *= scale;
  return GridFunction(n_, N_, Box::unit(n_), std::move(v));
}

std::vector<int> FourierSample::lattice_index(std::size_t i) const {
  std::vector<int> k(n);
  const std::size_t s = side();
  for (int a = n - 1; a >= 0; --a) {
    k[a] = static_cast<int>(i % s) - K;
    i /= s;
  }
  return k;
}

std::vector<double> FourierSample::freq(std::size_t i) const {
  auto k = lattice_index(i);
  std::vector<double> xi(n);
  for (int a = 0; a < n; ++a) xi[a] = spacing * k[a];
  return xi;
}

double FourierSample::norm(std::size_t i) const {
  auto k = lattice_index(i);
  double s = 0.0;
  for (int a = 0; a < n; ++a) s += static_cast<double>(k[a]) * k[a];
  return spacing * std::sqrt(s);
}

std::size_t FourierSample::index(std::span<const int> k) const {
  std::size_t i = 0;
  for (int a = 0; a < n; ++a) {
    if (k[a] < -K || k[a] > K) throw Error("frequency outside the sampled lattice");
    i = i * side() + static_cast<std::size_t>(k[a] + K);
  }
  return i;
}

cplx FourierSample::interpolate(std::span<const double> xi) const {
  long i0[8];
  double t[8];
  const long top = 2L * K;
  for (int a = 0; a < n; ++a) {
    double u = xi[a] / spacing + K;
    if (u < 0.0 || u > static_cast<double>(top)) return {0.0, 0.0};
    double f = std::floor(u);
    i0[a] = static_cast<long>(f);
    t[a] = u - f;
  }
  cplx acc = 0.0;
  for (unsigned corner = 0; corner < (1u << n); ++corner) {
    double w = 1.0;
    std::size_t flat = 0;
    bool inside = true;
    for (int a = 0; a < n; ++a) {
      bool up = (corner >> (n - 1 - a)) & 1u;
      long c = i0[a] + (up ? 1 : 0);
      double wa = up ? t[a] : 1.0 - t[a];
      if (wa == 0.0) {
        inside = false;
        break;
      }
      if (c > top) {
        inside = false;
        break;
      }
      w *= wa;
      flat = flat * side() + static_cast<std::size_t>(c);
    }
    if (inside) acc += w * values[flat];
  }
  return acc;
}

Transform FourierSample::interpolator() const {
  return [self = *this](std::span<const double> xi) { return self.interpolate(xi); };
}

}  // namespace salem
