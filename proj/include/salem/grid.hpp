#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "salem/common.hpp"

namespace salem {

using RealField = std::function<double(std::span<const double>)>;
using Transform = std::function<cplx(std::span<const double>)>;

// Row-major helpers for an N^n cube (last axis fastest).
std::size_t ipow(std::size_t base, int exp);
void unravel(std::size_t index, int n, std::size_t N, std::vector<std::size_t>& out);

// sum_c v_c exp(-2 pi i x_c . xi) over an N^n grid with x_c = lo + (c + 1/2) h.
cplx grid_phase_sum(std::span<const double> values, int n, std::size_t N, std::span<const double> lo,
                    std::span<const double> h, std::span<const double> xi);

// Cell-centre samples on a box, extended to R^n by tensor hat interpolation
// and zero outside the lattice.
class GridFunction {
 public:
  GridFunction() = default;
  GridFunction(int n, std::size_t N, Box domain, std::vector<double> values);
  static GridFunction sample(int n, std::size_t N, Box domain, const RealField& f);

  int n() const { return n_; }
  std::size_t N() const { return N_; }
  const Box& domain() const { return domain_; }
  const std::vector<double>& values() const { return values_; }
  double h(int axis) const { return h_[axis]; }
  double center(int axis, std::size_t c) const { return domain_.lo[axis] + (static_cast<double>(c) + 0.5) * h_[axis]; }

  double operator()(std::span<const double> x) const;
  // Closed support of the interpolant: domain widened by h/2.
  Box support_box() const;
  // Exact transform of the interpolant.
  cplx transform(std::span<const double> xi) const;
  Transform transform_fn() const;
  double integral() const;
  double l1() const;
  double l2() const;
  double sup() const;

  GridFunction operator+(const GridFunction& other) const;
  GridFunction scaled(double factor) const;

 private:
  int n_ = 0;
  std::size_t N_ = 0;
  Box domain_;
  std::vector<double> h_;
  std::vector<double> values_;
};

// Probability masses at the cell centres of [0,1]^n, N cells per axis.
class GridMeasure {
 public:
  GridMeasure() = default;
  GridMeasure(int n, std::size_t N, std::vector<double> weights);
  static GridMeasure normalized(int n, std::size_t N, std::vector<double> weights);
  static GridMeasure point_mass(int n, std::size_t N, std::size_t cell);
  static GridMeasure uniform(int n, std::size_t N);

  int n() const { return n_; }
  std::size_t N() const { return N_; }
  std::size_t cells() const { return weights_.size(); }
  const std::vector<double>& weights() const { return weights_; }
  std::vector<bool> support_mask() const;
  const std::vector<std::size_t>& support() const { return support_; }
  double h() const { return 1.0 / static_cast<double>(N_); }

  cplx transform(std::span<const double> xi) const;
  Transform transform_fn() const;
  // Density w / h^n on [0,1]^n.
  GridFunction density() const;

 private:
  int n_ = 0;
  std::size_t N_ = 0;
  std::vector<double> weights_;
  std::vector<std::size_t> support_;
};

// Values on the lattice spacing * k, k in [-K, K]^n, row-major, last axis fastest.
struct FourierSample {
  int n = 0;
  int K = 0;
  double spacing = 1.0;
  std::vector<cplx> values;

  std::size_t size() const { return values.size(); }
  std::size_t side() const { return static_cast<std::size_t>(2 * K + 1); }
  double max_frequency() const { return K * spacing; }
  std::vector<int> lattice_index(std::size_t i) const;
  std::vector<double> freq(std::size_t i) const;
  double norm(std::size_t i) const;
  std::size_t index(std::span<const int> k) const;
  cplx at(std::span<const int> k) const { return values[index(k)]; }
  // Multilinear interpolation on the lattice; zero outside it.
  cplx interpolate(std::span<const double> xi) const;
  Transform interpolator() const;
};

}  // namespace salem
