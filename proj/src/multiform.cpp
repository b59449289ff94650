#include "salem/multiform.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include "salem/approxident.hpp"
#include "salem/parallel.hpp"
#include "salem/rng.hpp"

namespace salem {

std::string to_string(LambdaMethod method) {
  switch (method) {
    case LambdaMethod::direct: return "direct";
    case LambdaMethod::direct_monte_carlo: return "direct-monte-carlo";
    case LambdaMethod::fourier: return "fourier";
    case LambdaMethod::fourier_monte_carlo: return "fourier-monte-carlo";
    case LambdaMethod::star_tau: return "star-tau";
    case LambdaMethod::star_tau_monte_carlo: return "star-tau-monte-carlo";
  }
  return "unknown";
}

bool LambdaResult::has_flag(const std::string& f) const {
  return std::find(flags.begin(), flags.end(), f) != flags.end();
}

namespace {

struct Interval {
  double lo, hi;
};

double widen_down(double v) { return v - 1e-12 * (1.0 + std::fabs(v)); }
double widen_up(double v) { return v + 1e-12 * (1.0 + std::fabs(v)); }

struct Constraint {
  std::vector<double> a;
  double lo, hi;
};

}  // namespace

std::optional<Box> support_region(const MatrixSystem& s, const std::vector<Box>& boxes, const std::optional<Box>& extra) {
  const int n = s.n(), k = s.k(), m = s.m();
  if (static_cast<int>(boxes.size()) != k) throw Error("support region needs one box per point map");
  for (const auto& b : boxes)
    if (b.dim() != n) throw Error("support box has wrong dimension");
  if (extra && extra->dim() != m) throw Error("extra box must live in R^m");
  std::vector<Constraint> cons;
  for (int j = 0; j < k; ++j) {
    if (boxes[j].empty()) return std::nullopt;
    for (int i = 0; i < n; ++i) {
      Constraint c;
      c.a.resize(m);
      for (int col = 0; col < m; ++col) c.a[col] = s.a(j)(i, col);
      c.lo = boxes[j].lo[i];
      c.hi = boxes[j].hi[i];
      cons.push_back(std::move(c));
    }
  }
  Matrix A = s.stacked([&] {
    std::vector<int> all(k);
    for (int j = 0; j < k; ++j) all[j] = j;
    return all;
  }());
  Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (sv.size() < m || !(sv(m - 1) > 1e-12 * sv(0))) throw Error("point maps do not bound the variable x");
  Matrix pinv = svd.matrixV() * sv.cwiseInverse().asDiagonal() * svd.matrixU().transpose();
  Vector yc(n * k), yr(n * k);
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < n; ++i) {
      yc(n * j + i) = 0.5 * (boxes[j].lo[i] + boxes[j].hi[i]);
      yr(n * j + i) = 0.5 * (boxes[j].hi[i] - boxes[j].lo[i]);
    }
  Vector xc = pinv * yc;
  Vector xr = pinv.cwiseAbs() * yr;
  std::vector<Interval> x(m);
  for (int c = 0; c < m; ++c) x[c] = {widen_down(xc(c) - xr(c)), widen_up(xc(c) + xr(c))};
  if (extra) {
    if (extra->empty()) return std::nullopt;
    for (int c = 0; c < m; ++c) {
      x[c].lo = std::max(x[c].lo, extra->lo[c]);
      x[c].hi = std::min(x[c].hi, extra->hi[c]);
      if (x[c].lo > x[c].hi) return std::nullopt;
    }
  }
  for (int sweep = 0; sweep < 200; ++sweep) {
    bool changed = false;
    for (const auto& con : cons) {
      for (int c = 0; c < m; ++c) {
        if (con.a[c] == 0.0) continue;
        double rlo = 0.0, rhi = 0.0;
        for (int o = 0; o < m; ++o) {
          if (o == c || con.a[o] == 0.0) continue;
          double p1 = con.a[o] * x[o].lo, p2 = con.a[o] * x[o].hi;
          rlo += std::min(p1, p2);
          rhi += std::max(p1, p2);
        }
        double tlo = widen_down(con.lo - rhi), thi = widen_up(con.hi - rlo);
        double q1 = tlo / con.a[c], q2 = thi / con.a[c];
        double nlo = widen_down(std::min(q1, q2)), nhi = widen_up(std::max(q1, q2));
        double width = x[c].hi - x[c].lo;
        if (nlo > x[c].lo + 1e-9 * (width + 1e-300)) {
          x[c].lo = nlo;
          changed = true;
        }
        if (nhi < x[c].hi - 1e-9 * (width + 1e-300)) {
          x[c].hi = nhi;
          changed = true;
        }
        if (x[c].lo > x[c].hi) return std::nullopt;
      }
    }
    if (!changed) break;
  }
  Box out;
  for (const auto& iv : x) {
    out.lo.push_back(iv.lo);
    out.hi.push_back(iv.hi);
  }
  return out;
}

namespace {

double tensor_direct(const MatrixSystem& s, const std::vector<GridFunction>& f, const GridFunction* g, const Box& region,
                     int G, int threads) {
  const int n = s.n(), k = s.k(), m = s.m();
  std::vector<double> step(m);
  double vol = 1.0;
  for (int a = 0; a < m; ++a) {
    step[a] = (region.hi[a] - region.lo[a]) / G;
    vol *= step[a];
  }
  if (vol == 0.0) return 0.0;
  const std::size_t inner = ipow(static_cast<std::size_t>(G), m - 1);
  std::vector<double> slots(G, 0.0);
  parallel_for(
      static_cast<std::size_t>(G),
      [&](std::size_t first) {
        std::vector<double> x(m), y(n);
        std::vector<std::size_t> idx;
        double acc = 0.0;
        for (std::size_t r = 0; r < inner; ++r) {
          unravel(r, m - 1, static_cast<std::size_t>(G), idx);
          x[0] = region.lo[0] + (first + 0.5) * step[0];
          for (int a = 1; a < m; ++a) x[a] = region.lo[a] + (idx[a - 1] + 0.5) * step[a];
          double prod = g ? (*g)(x) : 1.0;
          for (int j = 0; j < k && prod != 0.0; ++j) {
            const Matrix& A = s.a(j);
            for (int i = 0; i < n; ++i) {
              double v = 0.0;
              for (int c = 0; c < m; ++c) v += A(i, c) * x[c];
              y[i] = v;
            }
            prod *= f[j](y);
          }
          if (!std::isfinite(prod)) throw Error("non-finite integrand sample");
          acc += prod;
        }
        slots[first] = acc;
      },
      threads);
  return pairwise_sum(slots) * vol;
}

void check_functions(const MatrixSystem& s, const std::vector<GridFunction>& f) {
  if (static_cast<int>(f.size()) != s.k())
    throw Error("expected " + std::to_string(s.k()) + " functions, got " + std::to_string(f.size()));
  for (const auto& fj : f)
    if (fj.n() != s.n()) throw Error("function dimension does not match the system");
}

}  // namespace

LambdaResult lambda_direct(const MatrixSystem& s, const std::vector<GridFunction>& f, const DirectOptions& opt) {
  check_functions(s, f);
  const int n = s.n(), k = s.k(), m = s.m();
  LambdaResult res;
  res.method = opt.monte_carlo ? LambdaMethod::direct_monte_carlo : LambdaMethod::direct;
  res.Q = opt.monte_carlo ? 0 : opt.grid;
  std::vector<Box> boxes;
  for (const auto& fj : f) boxes.push_back(fj.support_box());
  auto region = support_region(s, boxes);
  if (!region) {
    res.flags.push_back("empty-support");
    return res;
  }
  if (!opt.monte_carlo) {
    if (m > 4) throw Error("tensor quadrature supports m <= 4 (m = " + std::to_string(m) + "); use the Monte Carlo path");
    if (opt.grid < 2) throw Error("direct quadrature grid must be >= 2");
    res.value = tensor_direct(s, f, nullptr, *region, opt.grid, opt.threads);
    double coarse = tensor_direct(s, f, nullptr, *region, opt.grid / 2, opt.threads);
    res.est_error = std::fabs(res.value - coarse);
    return res;
  }
  res.flags.push_back("monte-carlo");
  const std::size_t chunk = 4096;
  const std::size_t chunks = (opt.samples + chunk - 1) / chunk;
  double vol = 1.0;
  for (int a = 0; a < m; ++a) vol *= region->hi[a] - region->lo[a];
  std::vector<double> sums(chunks, 0.0), sq(chunks, 0.0);
  parallel_for(
      chunks,
      [&](std::size_t c) {
        std::vector<double> x(m), y(n);
        std::size_t end = std::min(opt.samples, (c + 1) * chunk);
        for (std::size_t i = c * chunk; i < end; ++i) {
          for (int a = 0; a < m; ++a)
            x[a] = region->lo[a] + counter_uniform(opt.seed, i, a) * (region->hi[a] - region->lo[a]);
          double prod = 1.0;
          for (int j = 0; j < k && prod != 0.0; ++j) {
            for (int r = 0; r < n; ++r) {
              double v = 0.0;
              for (int col = 0; col < m; ++col) v += s.a(j)(r, col) * x[col];
              y[r] = v;
            }
            prod *= f[j](y);
          }
          if (!std::isfinite(prod)) throw Error("non-finite integrand sample");
          sums[c] += prod;
          sq[c] += prod * prod;
        }
      },
      opt.threads);
  const double N = static_cast<double>(opt.samples);
  double mean = pairwise_sum(sums) / N;
  double var = std::max(0.0, pairwise_sum(sq) / N - mean * mean);
  res.value = vol * mean;
  res.est_error = vol * std::sqrt(var / N);
  return res;
}

double fourier_constant(const MatrixSystem& s) { return limit_constant(make_chart(s.transpose_map())); }

namespace {

using NodeEval = std::function<void(const double* eta, cplx* out)>;

struct StarSums {
  std::vector<cplx> full, half;
  bool monte_carlo = false;
};

StarSums star_sums(const SubspaceBasis& basis, const Vector& tau, const FourierOptions& opt, int outputs,
                   const NodeEval& eval) {
  const int D = basis.dim, d = basis.ambient;
  const double R = opt.R;
  if (!(R > 0)) throw Error("truncation radius must be positive");
  StarSums out;
  out.full.assign(outputs, 0.0);
  out.half.assign(outputs, 0.0);
  const double R2 = R * R, H2 = 0.25 * R * R;
  if (D <= 3) {
    if (opt.Q < 2) throw Error("quadrature needs Q >= 2");
    if (std::pow(static_cast<double>(opt.Q), D) > 4e9) throw Error("chart quadrature budget exceeded");
    const std::size_t Q = static_cast<std::size_t>(opt.Q);
    const double step = 2.0 * R / opt.Q;
    const std::size_t inner = ipow(Q, D - 1);
    std::vector<std::vector<cplx>> sf(Q), sh(Q);
    parallel_for(
        Q,
        [&](std::size_t first) {
          std::vector<cplx> af(outputs, 0.0), ah(outputs, 0.0), val(outputs);
          std::vector<std::size_t> idx;
          Vector sv(D), eta(d);
          for (std::size_t r = 0; r < inner; ++r) {
            unravel(r, D - 1, Q, idx);
            sv(0) = -R + (first + 0.5) * step;
            for (int a = 1; a < D; ++a) sv(a) = -R + (idx[a - 1] + 0.5) * step;
            double rr = sv.squaredNorm();
            if (rr > R2) continue;
            eta = basis.vectors * sv + tau;
            eval(eta.data(), val.data());
            for (int o = 0; o < outputs; ++o) af[o] += val[o];
            if (rr <= H2)
              for (int o = 0; o < outputs; ++o) ah[o] += val[o];
          }
          sf[first] = std::move(af);
          sh[first] = std::move(ah);
        },
        opt.threads);
    const double w = std::pow(step, D);
    for (int o = 0; o < outputs; ++o) {
      std::vector<cplx> a(Q), b(Q);
      for (std::size_t i = 0; i < Q; ++i) {
        a[i] = sf[i][o];
        b[i] = sh[i][o];
      }
      out.full[o] = pairwise_sum(a) * w;
      out.half[o] = pairwise_sum(b) * w;
    }
    return out;
  }
  out.monte_carlo = true;
  const std::size_t chunk = 4096;
  const std::size_t chunks = (opt.samples + chunk - 1) / chunk;
  std::vector<std::vector<cplx>> sf(chunks), sh(chunks);
  parallel_for(
      chunks,
      [&](std::size_t c) {
        std::vector<cplx> af(outputs, 0.0), ah(outputs, 0.0), val(outputs);
        Vector sv(D), eta(d);
        std::size_t end = std::min(opt.samples, (c + 1) * chunk);
        for (std::size_t i = c * chunk; i < end; ++i) {
          for (int a = 0; a < D; ++a) sv(a) = -R + 2.0 * R * counter_uniform(opt.seed, i, a);
          double rr = sv.squaredNorm();
          if (rr > R2) continue;
          eta = basis.vectors * sv + tau;
          eval(eta.data(), val.data());
          for (int o = 0; o < outputs; ++o) af[o] += val[o];
          if (rr <= H2)
            for (int o = 0; o < outputs; ++o) ah[o] += val[o];
        }
        sf[c] = std::move(af);
        sh[c] = std::move(ah);
      },
      opt.threads);
  const double w = std::pow(2.0 * R, D) / static_cast<double>(opt.samples);
  for (int o = 0; o < outputs; ++o) {
    std::vector<cplx> a(chunks), b(chunks);
    for (std::size_t i = 0; i < chunks; ++i) {
      a[i] = sf[i][o];
      b[i] = sh[i][o];
    }
    out.full[o] = pairwise_sum(a) * w;
    out.half[o] = pairwise_sum(b) * w;
  }
  return out;
}

LambdaResult finish(cplx full, cplx half, double constant, LambdaMethod method, const FourierOptions& opt, bool mc) {
  LambdaResult res;
  res.method = method;
  res.R = opt.R;
  res.Q = mc ? 0 : opt.Q;
  res.value = constant * full.real();
  res.imag = constant * full.imag();
  res.half_value = constant * half.real();
  const double diff = std::fabs(res.value - res.half_value);
  if (mc) res.flags.push_back("monte-carlo");
  if (diff > 0.25 * std::fabs(res.half_value)) {
    res.est_error = std::numeric_limits<double>::infinity();
    res.flags.push_back("divergent");
  } else {
    res.est_error = diff;
    if (diff > 0.10 * std::fabs(res.value)) res.flags.push_back("truncation-warning");
  }
  return res;
}

void check_transforms(const MatrixSystem& s, std::size_t count) {
  if (static_cast<int>(count) != s.k())
    throw Error("expected " + std::to_string(s.k()) + " transforms, got " + std::to_string(count));
}

NodeEval product_eval(const MatrixSystem& s, const std::vector<Transform>& g) {
  const int n = s.n(), k = s.k();
  return [&g, n, k](const double* eta, cplx* out) {
    cplx p = 1.0;
    for (int j = 0; j < k && p != 0.0; ++j) p *= g[j](std::span<const double>(eta + n * j, n));
    out[0] = p;
  };
}

}  // namespace

LambdaResult lambda_fourier(const MatrixSystem& s, const std::vector<Transform>& fhat, const FourierOptions& opt) {
  check_transforms(s, fhat.size());
  auto basis = subspace_S_basis(s);
  const double C = fourier_constant(s);
  Vector tau = Vector::Zero(basis.ambient);
  auto sums = star_sums(basis, tau, opt, 1, product_eval(s, fhat));
  return finish(sums.full[0], sums.half[0], C,
                sums.monte_carlo ? LambdaMethod::fourier_monte_carlo : LambdaMethod::fourier, opt, sums.monte_carlo);
}

bool in_S_perp(const MatrixSystem& s, const Vector& tau) {
  auto basis = subspace_S_basis(s);
  if (tau.size() != basis.ambient) return false;
  return (basis.vectors.transpose() * tau).norm() <= 1e-9 * std::max(1.0, tau.norm());
}

Vector random_tau(const MatrixSystem& s, std::uint64_t seed, double norm) {
  auto basis = subspace_S_basis(s);
  Vector v(basis.ambient);
  for (int i = 0; i < basis.ambient; ++i) {
    double u1 = counter_uniform(seed, i, 0), u2 = counter_uniform(seed, i, 1);
    v(i) = std::sqrt(-2.0 * std::log(1.0 - u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }
  v -= basis.vectors * (basis.vectors.transpose() * v);
  double len = v.norm();
  if (len == 0.0) throw Error("S-perp is trivial");
  return v * (norm / len);
}

LambdaResult lambda_star_tau(const MatrixSystem& s, const std::vector<Transform>& g, const Vector& tau,
                             const FourierOptions& opt) {
  check_transforms(s, g.size());
  auto basis = subspace_S_basis(s);
  if (tau.size() != basis.ambient) throw Error("tau has wrong length");
  if ((basis.vectors.transpose() * tau).norm() > 1e-9 * std::max(1.0, tau.norm()))
    throw Error("tau is not orthogonal to S");
  auto sums = star_sums(basis, tau, opt, 1, product_eval(s, g));
  return finish(sums.full[0], sums.half[0], 1.0,
                sums.monte_carlo ? LambdaMethod::star_tau_monte_carlo : LambdaMethod::star_tau, opt, sums.monte_carlo);
}

std::vector<LambdaResult> decomposition_terms(const MatrixSystem& s, const Transform& mu1_hat, const Transform& mu2_hat,
                                              const FourierOptions& opt) {
  const int n = s.n(), k = s.k();
  if (k > 16) throw Error("too many points for a 2^k decomposition");
  const int patterns = 1 << k;
  auto basis = subspace_S_basis(s);
  Vector tau = Vector::Zero(basis.ambient);
  NodeEval eval = [&](const double* eta, cplx* out) {
    std::vector<cplx> a(k), b(k);
    for (int j = 0; j < k; ++j) {
      std::span<const double> blk(eta + n * j, n);
      a[j] = mu1_hat(blk);
      b[j] = mu2_hat(blk);
    }
    for (int p = 0; p < patterns; ++p) {
      cplx prod = 1.0;
      for (int j = 0; j < k; ++j) prod *= ((p >> j) & 1) ? b[j] : a[j];
      out[p] = prod;
    }
  };
  auto sums = star_sums(basis, tau, opt, patterns, eval);
  std::vector<LambdaResult> out;
  for (int p = 0; p < patterns; ++p)
    out.push_back(finish(sums.full[p], sums.half[p], 1.0,
                         sums.monte_carlo ? LambdaMethod::star_tau_monte_carlo : LambdaMethod::star_tau, opt,
                         sums.monte_carlo));
  return out;
}

ThetaResult theta_eval(const MatrixSystem& s, const GridFunction& g, const std::vector<GridFunction>& f,
                       const ThetaOptions& opt) {
  check_functions(s, f);
  const int n = s.n(), k = s.k(), m = s.m(), d = n * k;
  if (g.n() != m) throw Error("weight g must be a function on R^m");
  ThetaResult out;
  std::vector<Box> boxes;
  for (const auto& fj : f) boxes.push_back(fj.support_box());
  auto region = support_region(s, boxes, g.support_box());
  if (region) {
    if (m > 4) throw Error("tensor quadrature supports m <= 4");
    out.direct = tensor_direct(s, f, &g, *region, opt.grid, opt.threads);
  }

  if (d > 4) throw Error("frequency lattice for theta supports nk <= 4");
  const std::size_t Q = static_cast<std::size_t>(opt.Q);
  if (std::pow(static_cast<double>(Q), d) > 4e8) throw Error("theta frequency lattice budget exceeded");
  const double R = opt.R, delta = 2.0 * R / opt.Q;
  auto node = [&](std::size_t t) { return -R + (static_cast<double>(t) + 0.5) * delta; };

  const std::size_t block = ipow(Q, n);
  std::vector<std::vector<cplx>> table(k, std::vector<cplx>(block));
  for (int j = 0; j < k; ++j)
    parallel_for(
        block,
        [&](std::size_t b) {
          std::vector<std::size_t> idx;
          std::vector<double> xi(n);
          unravel(b, n, Q, idx);
          for (int i = 0; i < n; ++i) xi[i] = node(idx[i]);
          table[j][b] = f[j].transform(xi);
        },
        opt.threads);

  const Matrix P = s.transpose_map();
  // g_hat(-P xi): tabulated on integer keys P t when P is integral
  bool integral = true;
  for (Eigen::Index i = 0; i < P.size(); ++i)
    if (P.data()[i] != std::floor(P.data()[i])) integral = false;
  std::vector<long> kmin(m, 0), kspan(m, 1);
  std::size_t table_size = 1;
  if (integral) {
    for (int c = 0; c < m; ++c) {
      long lo = 0, hi = 0;
      for (int l = 0; l < d; ++l) {
        long v = static_cast<long>(P(c, l)) * static_cast<long>(Q - 1);
        (v < 0 ? lo : hi) += v;
      }
      kmin[c] = lo;
      kspan[c] = hi - lo + 1;
      table_size *= static_cast<std::size_t>(kspan[c]);
      if (table_size > 30000000) integral = false;
    }
  }
  Vector offset = P * Vector::Constant(d, -R + 0.5 * delta);
  auto ghat_at = [&](const std::vector<long>& key) {
    std::vector<double> arg(m);
    for (int c = 0; c < m; ++c) arg[c] = -(offset(c) + delta * static_cast<double>(key[c]));
    return g.transform(arg);
  };
  std::vector<cplx> gtab;
  if (integral) {
    gtab.resize(table_size);
    parallel_for(
        table_size,
        [&](std::size_t i) {
          std::vector<long> key(m);
          std::size_t rem = i;
          for (int c = m - 1; c >= 0; --c) {
            key[c] = kmin[c] + static_cast<long>(rem % static_cast<std::size_t>(kspan[c]));
            rem /= static_cast<std::size_t>(kspan[c]);
          }
          gtab[i] = ghat_at(key);
        },
        opt.threads);
  }

  const std::size_t inner = ipow(Q, d - 1);
  std::vector<cplx> slots(Q);
  parallel_for(
      Q,
      [&](std::size_t first) {
        std::vector<std::size_t> idx(d), rest;
        std::vector<long> key(m);
        cplx acc = 0.0;
        for (std::size_t r = 0; r < inner; ++r) {
          unravel(r, d - 1, Q, rest);
          idx[0] = first;
          for (int l = 1; l < d; ++l) idx[l] = rest[l - 1];
          cplx prod = 1.0;
          for (int j = 0; j < k && prod != 0.0; ++j) {
            std::size_t b = 0;
            for (int i = 0; i < n; ++i) b = b * Q + idx[n * j + i];
            prod *= table[j][b];
          }
          if (prod == 0.0) continue;
          if (integral) {
            for (int c = 0; c < m; ++c) {
              long v = 0;
              for (int l = 0; l < d; ++l) v += static_cast<long>(P(c, l)) * static_cast<long>(idx[l]);
              key[c] = v;
            }
            std::size_t flat = 0;
            for (int c = 0; c < m; ++c) flat = flat * static_cast<std::size_t>(kspan[c]) + static_cast<std::size_t>(key[c] - kmin[c]);
            prod *= gtab[flat];
          } else {
            std::vector<double> arg(m);
            for (int c = 0; c < m; ++c) {
              double v = 0.0;
              for (int l = 0; l < d; ++l) v += P(c, l) * node(idx[l]);
              arg[c] = -v;
            }
            prod *= g.transform(arg);
          }
          acc += prod;
        }
        slots[first] = acc;
      },
      opt.threads);
  cplx total = pairwise_sum(slots) * std::pow(delta, d);
  out.fourier = total.real();
  out.fourier_imag = total.imag();
  return out;
}

Transform envelope_transform(double beta) {
  return [beta](std::span<const double> kappa) {
    double s = 0.0;
    for (double x : kappa) s += x * x;
    return cplx(std::pow(1.0 + std::sqrt(s), -beta / 2.0), 0.0);
  };
}

}  // namespace salem
