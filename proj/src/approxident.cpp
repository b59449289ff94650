#include "salem/approxident.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>
#include <cmath>
#include <numbers>
#include <random>

#include "salem/parallel.hpp"

namespace salem {

namespace {

void check_chart(const SurfaceChart& c) {
  const int d = c.d(), p = c.p();
  if (c.V_basis.rows() != d || c.complement.rows() != d || c.complement.cols() != p || c.V_basis.cols() != d - p)
    throw Error("surface chart bases have inconsistent shapes");
  Matrix full(d, d);
  full << c.V_basis, c.complement;
  if (!(full.transpose() * full - Matrix::Identity(d, d)).isZero(1e-9)) throw Error("surface chart basis is not orthonormal");
  double scale = std::max(1.0, c.P.norm());
  if (c.V_basis.cols() > 0 && (c.P * c.V_basis).norm() > 1e-9 * scale) throw Error("V basis is not in the null space of P");
}

// Per-axis composite midpoint nodes: fine band [-w, w], coarse on [w, Z] each side.
void band_nodes(double w, double Z, int q_band, int q_outer, std::vector<double>& x, std::vector<double>& wt) {
  x.clear();
  wt.clear();
  if (Z > w) {
    double step = (Z - w) / q_outer;
    for (int i = 0; i < q_outer; ++i) {
      x.push_back(-Z + (i + 0.5) * step);
      wt.push_back(step);
    }
  }
  double step = 2.0 * w / q_band;
  for (int i = 0; i < q_band; ++i) {
    x.push_back(-w + (i + 0.5) * step);
    wt.push_back(step);
  }
  if (Z > w) {
    double s2 = (Z - w) / q_outer;
    for (int i = 0; i < q_outer; ++i) {
      x.push_back(w + (i + 0.5) * s2);
      wt.push_back(s2);
    }
  }
}

}  // namespace

SurfaceChart make_chart(const Matrix& P, double tolerance) {
  const int p = static_cast<int>(P.rows()), d = static_cast<int>(P.cols());
  if (p < 1 || p > d) throw Error("chart matrix P must be p x d with 1 <= p <= d");
  Eigen::JacobiSVD<Matrix> svd(P, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  if (!(s(p - 1) > tolerance * s(0))) throw Error("chart matrix P is not of full rank p");
  SurfaceChart c;
  c.P = P;
  c.complement = svd.matrixV().leftCols(p);
  c.V_basis = svd.matrixV().rightCols(d - p);
  return c;
}

SurfaceChart make_chart(const Matrix& P, const Matrix& V_basis, const Matrix& complement) {
  SurfaceChart c{P, V_basis, complement};
  check_chart(c);
  return c;
}

Matrix random_orthogonal(int size, std::uint64_t seed) {
  if (size == 0) return Matrix(0, 0);
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  Matrix g(size, size);
  for (int i = 0; i < size; ++i)
    for (int j = 0; j < size; ++j) g(i, j) = nd(gen);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(size, size);
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < size; ++i)
    if (r(i, i) < 0) q.col(i) = -q.col(i);
  return q;
}

SurfaceChart rotated_chart(const SurfaceChart& chart, std::uint64_t seed) {
  SurfaceChart c = chart;
  if (c.v() > 0) c.V_basis = chart.V_basis * random_orthogonal(c.v(), seed);
  c.complement = chart.complement * random_orthogonal(c.p(), seed ^ 0x9e3779b97f4a7c15ULL);
  return c;
}

double surface_integral(const SurfaceChart& chart, const RealField& F, double R, int Q) {
  const int v = chart.v(), d = chart.d();
  if (Q < 1 || !(R > 0)) throw Error("surface integral needs R > 0 and Q >= 1");
  if (std::pow(static_cast<double>(Q), v) > 1e9) throw Error("surface integral quadrature budget exceeded");
  if (v == 0) {
    std::vector<double> zero(d, 0.0);
    return F(zero);
  }
  const double step = 2.0 * R / Q;
  const std::size_t inner = ipow(static_cast<std::size_t>(Q), v - 1);
  std::vector<double> slots(Q);
  parallel_for(static_cast<std::size_t>(Q), [&](std::size_t first) {
    std::vector<double> x(v), xi(d);
    std::vector<std::size_t> idx;
    double acc = 0.0;
    for (std::size_t r = 0; r < inner; ++r) {
      unravel(r, v - 1, static_cast<std::size_t>(Q), idx);
      x[0] = -R + (first + 0.5) * step;
      for (int a = 1; a < v; ++a) x[a] = -R + (idx[a - 1] + 0.5) * step;
      Eigen::Map<Vector>(xi.data(), d) = chart.V_basis * Eigen::Map<const Vector>(x.data(), v);
      acc += F(xi);
    }
    slots[first] = acc;
  });
  return pairwise_sum(slots) * std::pow(step, v);
}

double constant_CP(const SurfaceChart& chart, double tolerance) {
  Matrix Q = chart.P * chart.complement;
  double det = std::fabs(Q.determinant());
  double scale = std::pow(std::max(chart.P.norm(), 1e-300), chart.p());
  if (!(det > tolerance * scale)) throw Error("|det Q| is below tolerance: P is not of full rank");
  return det;
}

double limit_constant(const SurfaceChart& chart, double tolerance) { return 1.0 / constant_CP(chart, tolerance); }

std::vector<LimitRow> mollified_limit_check(const SurfaceChart& chart, const RealField& F,
                                            const std::vector<double>& eps_list, const LimitOptions& opt) {
  const int d = chart.d(), p = chart.p(), v = chart.v();
  if (d > 4) throw Error("mollified limit quadrature budget exceeded: d = " + std::to_string(d) + " > 4");
  RealField phi_hat = opt.Phi_hat;
  if (!phi_hat)
    phi_hat = [](std::span<const double> u) {
      double s = 0.0;
      for (double x : u) s += x * x;
      return std::exp(-std::numbers::pi * s);
    };
  const Matrix Q = chart.P * chart.complement;
  Eigen::JacobiSVD<Matrix> svd(Q);
  const double smin = svd.singularValues()(p - 1);
  const double target = limit_constant(chart) * surface_integral(chart, F, opt.R, opt.Q_surface);

  std::vector<LimitRow> rows;
  for (double eps : eps_list) {
    if (!(eps > 0)) throw Error("mollifier scale eps must be positive");
    std::vector<double> zx, zw;
    band_nodes(opt.band * eps / smin, opt.R, opt.Q_band, opt.Q_outer, zx, zw);
    const std::size_t zn = zx.size();
    const std::size_t nz = ipow(zn, p);
    const std::size_t nx = ipow(static_cast<std::size_t>(opt.Q_surface), v);
    if (static_cast<double>(nz) * static_cast<double>(nx) > opt.budget)
      throw Error("mollified limit quadrature budget exceeded");
    const double xstep = 2.0 * opt.R / opt.Q_surface;
    const double scale = std::pow(eps, -p);
    std::vector<double> slots(nz);
    parallel_for(nz, [&](std::size_t zi) {
      std::vector<std::size_t> zidx, xidx;
      unravel(zi, p, zn, zidx);
      Vector z(p), x(v), u(p), xi(d);
      double wz = 1.0;
      for (int a = 0; a < p; ++a) {
        z(a) = zx[zidx[a]];
        wz *= zw[zidx[a]];
      }
      u = Q * z / eps;
      double k = phi_hat(std::span<const double>(u.data(), p));
      if (k == 0.0) return;
      Vector base = chart.complement * z;
      double acc = 0.0;
      for (std::size_t xi_i = 0; xi_i < nx; ++xi_i) {
        unravel(xi_i, v, static_cast<std::size_t>(opt.Q_surface), xidx);
        for (int a = 0; a < v; ++a) x(a) = -opt.R + (xidx[a] + 0.5) * xstep;
        xi = base + chart.V_basis * x;
        acc += F(std::span<const double>(xi.data(), d));
      }
      slots[zi] = acc * wz * k;
    });
    LimitRow row;
    row.eps = eps;
    row.value = pairwise_sum(slots) * scale * std::pow(xstep, v);
    row.target = target;
    row.rel_err = std::fabs(row.value - target) / std::max(std::fabs(target), 1e-300);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace salem
