#pragma once

#include <cstdint>
#include <vector>

#include "salem/common.hpp"
#include "salem/grid.hpp"

namespace salem {

// V = null(P) with orthonormal basis, plus an orthonormal completion.
struct SurfaceChart {
  Matrix P;           // p x d
  Matrix V_basis;     // d x v
  Matrix complement;  // d x p

  int d() const { return static_cast<int>(P.cols()); }
  int p() const { return static_cast<int>(P.rows()); }
  int v() const { return static_cast<int>(V_basis.cols()); }
};

SurfaceChart make_chart(const Matrix& P, double tolerance = 1e-12);
SurfaceChart make_chart(const Matrix& P, const Matrix& V_basis, const Matrix& complement);
// Same subspaces, bases rotated by seeded random orthogonal matrices.
SurfaceChart rotated_chart(const SurfaceChart& chart, std::uint64_t seed);
Matrix random_orthogonal(int size, std::uint64_t seed);

double surface_integral(const SurfaceChart& chart, const RealField& F, double R, int Q);

// |det Q| with Q e_j = P alpha_{v+j}.
double constant_CP(const SurfaceChart& chart, double tolerance = 1e-12);
// lim eps^{-p} int F(xi) Phi_hat(P xi / eps) dxi = limit_constant * Phi(0) * int_V F.
double limit_constant(const SurfaceChart& chart, double tolerance = 1e-12);

struct LimitRow {
  double eps = 0.0;
  double value = 0.0;
  double target = 0.0;
  double rel_err = 0.0;
};

struct LimitOptions {
  double R = 4.0;       // half-width along V and outer extent across it
  int Q_surface = 200;  // nodes per V axis
  int Q_band = 64;      // nodes per axis inside the kernel band
  int Q_outer = 32;     // nodes per axis on each side outside it
  double band = 6.0;    // band half-width in units of eps / sigma_min(Q)
  RealField Phi_hat;    // empty: Gaussian exp(-pi |u|^2)
  double budget = 5e7;
};

std::vector<LimitRow> mollified_limit_check(const SurfaceChart& chart, const RealField& F,
                                            const std::vector<double>& eps_list, const LimitOptions& options = {});

}  // namespace salem
