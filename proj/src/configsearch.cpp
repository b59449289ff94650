#include "salem/configsearch.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>

#include "salem/parallel.hpp"
#include "salem/rng.hpp"
#include "salem/simd.hpp"

namespace salem {

ExceptionalSubspace ExceptionalSubspace::from_matrix(const Matrix& matrix, double tolerance) {
  if (matrix.cols() == 0) throw Error("exceptional subspace matrix has no columns");
  ExceptionalSubspace e;
  e.matrix = matrix;
  Eigen::JacobiSVD<Matrix> svd(matrix, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(0) > 0.0 && s(i) > tolerance * s(0)) ++rank;
  if (rank == 0) throw Error("exceptional subspace must have dimension below m - n");
  e.dim = static_cast<int>(matrix.cols()) - rank;
  e.rowspace = svd.matrixV().leftCols(rank);
  return e;
}

double ExceptionalSubspace::distance(const Vector& y) const { return (rowspace.transpose() * y).norm(); }

namespace {

std::vector<ExceptionalSubspace> exclusions_from(const std::vector<Matrix>& ms) {
  std::vector<ExceptionalSubspace> out;
  for (const auto& m : ms) out.push_back(ExceptionalSubspace::from_matrix(m));
  return out;
}

RationalMatrix rational_identity(int n, const Rational& scale) {
  RationalMatrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = scale;
  return m;
}

}  // namespace

ConfigurationFamily make_triangle_system(double theta, double lam) {
  if (!(theta > 0.0) || theta > std::numbers::pi) throw Error("triangle angle must lie in (0, pi]");
  if (!(lam > 0.0) || !std::isfinite(lam)) throw Error("triangle ratio must be positive");
  std::vector<RationalMatrix> exact;
  const Rational l = rationalize(lam);
  Rational c, s;
  bool snapped = false;
  if (theta == std::numbers::pi / 2) {
    c = 0;
    s = 1;
    snapped = true;
  } else if (theta == std::numbers::pi) {
    c = -1;
    s = 0;
    snapped = true;
  }
  ConfigurationFamily fam{MatrixSystem(), exclusions_from({Matrix::Identity(2, 2)})};
  if (snapped) {
    RationalMatrix b3(2, 2);
    b3(0, 0) = l * c;
    b3(0, 1) = -l * s;
    b3(1, 0) = l * s;
    b3(1, 1) = l * c;
    fam.system = MatrixSystem::from_b(2, 3, 4, std::vector<RationalMatrix>{RationalMatrix(2, 2), rational_identity(2, 1), b3});
  } else {
    Matrix b3(2, 2);
    b3 << lam * std::cos(theta), -lam * std::sin(theta), lam * std::sin(theta), lam * std::cos(theta);
    fam.system = MatrixSystem::from_b(2, 3, 4, std::vector<Matrix>{Matrix::Zero(2, 2), Matrix::Identity(2, 2), b3});
  }
  return fam;
}

ConfigurationFamily make_colinear_system(int n, double lam) {
  if (n < 1) throw Error("dimension must be positive");
  if (!(lam > 1.0) || !std::isfinite(lam)) throw Error("colinear ratio must exceed 1 (lambda = 1 is degenerate)");
  const Rational l = rationalize(lam);
  auto sys = MatrixSystem::from_b(
      n, 3, 2 * n, std::vector<RationalMatrix>{RationalMatrix(n, n), rational_identity(n, 1), rational_identity(n, l)});
  return {sys, exclusions_from({Matrix::Identity(n, n)})};
}

ConfigurationFamily make_parallelogram_system(int n) {
  if (n < 1) throw Error("dimension must be positive");
  std::vector<RationalMatrix> b(4, RationalMatrix(n, 2 * n));
  for (int i = 0; i < n; ++i) {
    b[1](i, i) = 1;
    b[2](i, n + i) = 1;
    b[3](i, i) = 1;
    b[3](i, n + i) = 1;
  }
  Matrix v1 = Matrix::Zero(n, 2 * n), v2 = v1, v3 = v1, v4 = v1;
  for (int i = 0; i < n; ++i) {
    v1(i, i) = 1;
    v2(i, n + i) = 1;
    v3(i, i) = 1;
    v3(i, n + i) = 1;
    v4(i, i) = 1;
    v4(i, n + i) = -1;
  }
  return {MatrixSystem::from_b(n, 4, 3 * n, std::move(b)), exclusions_from({v1, v2, v3, v4})};
}

ConfigurationFamily make_vandermonde_system(const std::vector<double>& a, int eta, int d) {
  if (a.empty() || a.size() % 2 != 0) throw Error("Vandermonde system needs 2n nodes");
  if (eta < 0) throw Error("Vandermonde exponent offset eta must be >= 0");
  if (d < 1) throw Error("Vandermonde exponent step d must be >= 1");
  const int n = static_cast<int>(a.size() / 2);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(a[i] > 1.0) || !std::isfinite(a[i])) throw Error("Vandermonde nodes must be finite and > 1");
    for (std::size_t j = 0; j < i; ++j)
      if (a[i] == a[j]) throw Error("Vandermonde nodes must be distinct");
  }
  std::vector<RationalMatrix> b(4, RationalMatrix(n, 2 * n));
  for (int col = 0; col < 2 * n; ++col) {
    const Rational q = rationalize(a[col]);
    for (int blk = 0; blk < 3; ++blk)
      for (int i = 0; i < n; ++i) {
        unsigned e = static_cast<unsigned>(eta + (blk * n + i) * d);
        Rational p = 1;
        for (unsigned t = 0; t < e; ++t) p *= q;
        b[blk + 1](i, col) = p;
      }
  }
  auto sys = MatrixSystem::from_b(n, 4, 3 * n, std::move(b));
  return {sys, exclusions_from({sys.b()[1], sys.b()[2], sys.b()[3]})};
}

void PointSet::validate() const {
  if (n < 1) throw Error("point set dimension must be positive");
  if (!(tol > 0.0)) throw Error("point set tolerance must be positive");
  for (const auto& p : points) {
    if (static_cast<int>(p.size()) != n) throw Error("point has wrong dimension");
    for (double x : p)
      if (!(x >= 0.0 && x <= 1.0)) throw Error("points must lie in [0,1]^n");
  }
}

PointSet PointSet::from_mask(int n, std::size_t N, const std::vector<bool>& occupied, double tol) {
  if (occupied.size() != ipow(N, n)) throw Error("occupancy grid has wrong size");
  PointSet ps;
  ps.n = n;
  const double h = 1.0 / static_cast<double>(N);
  ps.tol = tol > 0.0 ? tol : 1.5 * h * std::sqrt(static_cast<double>(n));
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < occupied.size(); ++i) {
    if (!occupied[i]) continue;
    unravel(i, n, N, idx);
    std::vector<double> p(n);
    for (int a = 0; a < n; ++a) p[a] = (static_cast<double>(idx[a]) + 0.5) * h;
    ps.points.push_back(std::move(p));
  }
  return ps;
}

PointSet PointSet::from_measure(const GridMeasure& measure, double tol) {
  return from_mask(measure.n(), measure.N(), measure.support_mask(), tol);
}

PointIndex::PointIndex(const PointSet& set) : set_(&set) {
  set.validate();
  const int n = set.n;
  lo_.assign(n, std::numeric_limits<double>::infinity());
  hi_.assign(n, -std::numeric_limits<double>::infinity());
  for (const auto& p : set.points)
    for (int a = 0; a < n; ++a) {
      lo_[a] = std::min(lo_[a], p[a]);
      hi_[a] = std::max(hi_[a], p[a]);
    }
  cell_ = set.tol;
  if (set.points.empty()) return;
  for (;;) {
    std::size_t total = 1;
    dims_.assign(n, 1);
    for (int a = 0; a < n; ++a) {
      dims_[a] = static_cast<std::size_t>(std::floor((hi_[a] - lo_[a]) / cell_)) + 1;
      total *= dims_[a];
    }
    if (total <= (std::size_t{1} << 22)) break;
    cell_ *= 2.0;
  }
  std::size_t total = 1;
  for (auto dm : dims_) total *= dm;
  buckets_.assign(total, {});
  for (std::size_t i = 0; i < set.points.size(); ++i) {
    std::size_t flat = 0;
    for (int a = 0; a < n; ++a) {
      auto c = static_cast<std::size_t>(std::floor((set.points[i][a] - lo_[a]) / cell_));
      flat = flat * dims_[a] + std::min(c, dims_[a] - 1);
    }
    buckets_[flat].push_back(i);
  }
}

std::optional<double> PointIndex::nearest(const double* p) const {
  const int n = set_->n;
  if (set_->points.empty()) return std::nullopt;
  const double tol = set_->tol;
  long lo[8], hi[8];
  for (int a = 0; a < n; ++a) {
    double u = (p[a] - lo_[a]) / cell_;
    long c0 = static_cast<long>(std::floor(u - tol / cell_));
    long c1 = static_cast<long>(std::floor(u + tol / cell_));
    lo[a] = std::max(c0, 0L);
    hi[a] = std::min(c1, static_cast<long>(dims_[a]) - 1);
    if (lo[a] > hi[a]) return std::nullopt;
  }
  double best = std::numeric_limits<double>::infinity();
  long cur[8];
  for (int a = 0; a < n; ++a) cur[a] = lo[a];
  for (;;) {
    std::size_t flat = 0;
    for (int a = 0; a < n; ++a) flat = flat * dims_[a] + static_cast<std::size_t>(cur[a]);
    for (auto i : buckets_[flat]) {
      double s = 0.0;
      for (int a = 0; a < n; ++a) {
        double dlt = set_->points[i][a] - p[a];
        s += dlt * dlt;
      }
      best = std::min(best, s);
    }
    int a = n - 1;
    while (a >= 0 && cur[a] == hi[a]) {
      cur[a] = lo[a];
      --a;
    }
    if (a < 0) break;
    ++cur[a];
  }
  best = std::sqrt(best);
  if (best <= tol) return best;
  return std::nullopt;
}

double PointIndex::nearest_brute(const double* p) const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& q : set_->points) {
    double s = 0.0;
    for (int a = 0; a < set_->n; ++a) s += (q[a] - p[a]) * (q[a] - p[a]);
    best = std::min(best, s);
  }
  return std::sqrt(best);
}

namespace {

bool hit_less(const ConfigurationHit& a, const ConfigurationHit& b) {
  if (a.max_dist != b.max_dist) return a.max_dist < b.max_dist;
  for (Eigen::Index i = 0; i < a.x.size(); ++i)
    if (a.x(i) != b.x(i)) return a.x(i) < b.x(i);
  for (Eigen::Index i = 0; i < a.y.size(); ++i)
    if (a.y(i) != b.y(i)) return a.y(i) < b.y(i);
  return false;
}

}  // namespace

SearchResult search_configurations(const MatrixSystem& s, const PointSet& E,
                                   const std::vector<ExceptionalSubspace>& exclusions, const SearchOptions& opt) {
  if (E.n != s.n()) throw Error("point set dimension does not match the system");
  if (opt.y_steps < 1) throw Error("y grid resolution must be >= 1");
  const int n = s.n(), k = s.k(), D = s.m() - s.n();
  for (const auto& e : exclusions)
    if (e.matrix.cols() != D) throw Error("exceptional subspace lives in the wrong dimension");
  const auto& B = s.b();
  const double threshold = opt.exclusion_threshold >= 0.0 ? opt.exclusion_threshold : 1.0 / opt.y_steps;
  const double cutoff = threshold * (1.0 + 1e-9);
  PointIndex index(E);
  std::vector<double> blo(n), bhi(n);
  for (int a = 0; a < n; ++a) {
    blo[a] = index.lo()[a] - E.tol;
    bhi[a] = index.hi()[a] + E.tol;
  }
  // rad[t][j*n+i] = sum_{l >= t} |B_j(i, l)|
  std::vector<std::vector<double>> rad(D + 1, std::vector<double>(n * k, 0.0));
  for (int t = D - 1; t >= 0; --t)
    for (int j = 0; j < k; ++j)
      for (int i = 0; i < n; ++i) rad[t][j * n + i] = rad[t + 1][j * n + i] + std::fabs(B[j](i, t));
  std::vector<int> fixed_at(k, D);
  for (int j = 0; j < k; ++j)
    for (int t = D; t >= 0; --t) {
      bool zero = true;
      for (int i = 0; i < n; ++i) zero = zero && rad[t][j * n + i] == 0.0;
      if (!zero) break;
      fixed_at[j] = t;
    }
  const int steps = opt.y_steps;
  const int values = 2 * steps + 1;

  std::atomic<std::size_t> evaluations{0};
  std::atomic<bool> over{false};
  std::vector<std::vector<ConfigurationHit>> per_x(E.points.size());

  parallel_for(
      E.points.size(),
      [&](std::size_t xi) {
        if (over) return;
        std::vector<std::vector<double>> partial(D + 1, std::vector<double>(n * k));
        for (int j = 0; j < k; ++j)
          for (int i = 0; i < n; ++i) partial[0][j * n + i] = E.points[xi][i];
        std::vector<int> yi(D, 0);
        std::vector<double> dist(k, 0.0);
        std::size_t local = 0;
        auto& hits = per_x[xi];
        auto flush = [&] {
          if (evaluations.fetch_add(local) + local > opt.cap) over = true;
          local = 0;
        };
        std::function<void(int)> visit = [&](int t) {
          if (over || (opt.max_hits && hits.size() >= opt.max_hits)) return;
          if (++local >= 4096) flush();
          const auto& p = partial[t];
          for (int j = 0; j < k; ++j) {
            if (fixed_at[j] == t) {
              auto dd = index.nearest(&p[j * n]);
              if (!dd) return;
              dist[j] = *dd;
            } else if (fixed_at[j] > t) {
              for (int i = 0; i < n; ++i) {
                double r = rad[t][j * n + i];
                if (p[j * n + i] + r < blo[i] || p[j * n + i] - r > bhi[i]) return;
              }
            }
          }
          if (t == D) {
            bool nonzero = false;
            for (int v : yi) nonzero = nonzero || v != 0;
            if (!nonzero) return;
            Vector y(D);
            for (int l = 0; l < D; ++l) y(l) = static_cast<double>(yi[l]) / steps;
            ConfigurationHit h;
            h.excluded_margin = std::numeric_limits<double>::infinity();
            for (const auto& e : exclusions) {
              double mgn = e.distance(y);
              if (!(mgn > cutoff)) return;
              h.margins.push_back(mgn);
              h.excluded_margin = std::min(h.excluded_margin, mgn);
            }
            h.x = Eigen::Map<const Vector>(E.points[xi].data(), n);
            h.y = y;
            h.dists = dist;
            h.max_dist = *std::max_element(dist.begin(), dist.end());
            for (int j = 0; j < k; ++j) h.realized.push_back(h.x + B[j] * y);
            hits.push_back(std::move(h));
            return;
          }
          for (int v = -steps; v <= steps; ++v) {
            yi[t] = v;
            double yv = static_cast<double>(v) / steps;
            for (int j = 0; j < k; ++j)
              for (int i = 0; i < n; ++i) partial[t + 1][j * n + i] = p[j * n + i] + B[j](i, t) * yv;
            visit(t + 1);
          }
          yi[t] = 0;
        };
        (void)values;
        visit(0);
        flush();
      },
      opt.threads);
  if (over) throw Error("configuration search exceeded the cap of " + std::to_string(opt.cap) + " candidate evaluations");

  SearchResult res;
  res.evaluations = evaluations;
  for (auto& hs : per_x)
    for (auto& h : hs) {
      if (opt.max_hits && res.hits.size() >= opt.max_hits) {
        res.truncated = true;
        break;
      }
      res.hits.push_back(std::move(h));
    }
  std::sort(res.hits.begin(), res.hits.end(), hit_less);
  return res;
}

std::string validate_hit(const MatrixSystem& s, const PointSet& E, const std::vector<ExceptionalSubspace>& exclusions,
                         double threshold, const ConfigurationHit& hit) {
  const int k = s.k(), D = s.m() - s.n();
  if (hit.y.size() != D) return "y has wrong length";
  if (hit.y.norm() == 0.0) return "y is zero";
  PointIndex index(E);
  double worst = 0.0;
  for (int j = 0; j < k; ++j) {
    Vector p = hit.x + s.b()[j] * hit.y;
    if (static_cast<int>(hit.realized.size()) != k || (p - hit.realized[j]).norm() > 1e-12)
      return "realized point " + std::to_string(j) + " is inconsistent";
    double dd = index.nearest_brute(p.data());
    if (dd > E.tol) return "realized point " + std::to_string(j) + " is farther than tol from E";
    worst = std::max(worst, dd);
  }
  if (std::fabs(worst - hit.max_dist) > 1e-12) return "max_dist is inconsistent";
  if (hit.margins.size() != exclusions.size()) return "margin count is inconsistent";
  for (std::size_t i = 0; i < exclusions.size(); ++i) {
    // distance to V via an explicit null-space projection
    Eigen::JacobiSVD<Matrix> svd(exclusions[i].matrix, Eigen::ComputeFullV);
    Matrix null = svd.matrixV().rightCols(exclusions[i].dim);
    Vector resid = hit.y - null * (null.transpose() * hit.y);
    double dv = resid.norm();
    if (!(dv > threshold)) return "y is within the exclusion threshold of subspace " + std::to_string(i);
    if (std::fabs(dv - hit.margins[i]) > 1e-9) return "margin is inconsistent";
  }
  return {};
}

double c_epsilon_lower_bound(int k, int dim_y, int K, double eps) {
  double e = eps / dim_y;
  double c = 0.5 * std::pow(e / 2.0, K);
  return std::pow(c, k * dim_y);
}

CEpsilonResult c_epsilon_measure(const MatrixSystem& s, const std::vector<std::vector<long>>& v, double eps,
                                 std::size_t samples, std::uint64_t seed, int threads) {
  const int n = s.n(), k = s.k(), m = s.m(), D = m - n;
  if (!(eps > 0.0 && eps < 1.0)) throw Error("eps must lie in (0, 1)");
  if (v.empty()) throw Error("need at least one test vector");
  if (samples == 0) throw Error("need at least one sample");
  for (const auto& vl : v)
    if (static_cast<int>(vl.size()) != n) throw Error("test vectors must lie in Z^n");
  // y-part of A_j^t v_l
  std::vector<std::vector<double>> coef;
  for (int j = 0; j < k; ++j)
    for (const auto& vl : v) {
      std::vector<double> c(D, 0.0);
      for (int col = 0; col < D; ++col)
        for (int i = 0; i < n; ++i) c[col] += s.a(j)(i, n + col) * static_cast<double>(vl[i]);
      coef.push_back(std::move(c));
    }
  const std::size_t batch = 1024;
  const std::size_t batches = (samples + batch - 1) / batch;
  std::vector<double> counts(batches, 0.0);
  parallel_for(
      batches,
      [&](std::size_t b) {
        std::size_t begin = b * batch, end = std::min(samples, begin + batch), len = end - begin;
        std::vector<std::vector<double>> cols(D, std::vector<double>(len));
        for (int d = 0; d < D; ++d)
          for (std::size_t s2 = 0; s2 < len; ++s2) cols[d][s2] = counter_uniform(seed, begin + s2, d);
        std::vector<const double*> ptrs(D);
        for (int d = 0; d < D; ++d) ptrs[d] = cols[d].data();
        std::vector<double> acc(len, 0.0);
        for (const auto& c : coef) simd::frac_distance_max(ptrs, c, acc);
        double cnt = 0.0;
        for (double a : acc)
          if (a <= eps) cnt += 1.0;
        counts[b] = cnt;
      },
      threads);
  CEpsilonResult r;
  r.samples = samples;
  const double N = static_cast<double>(samples);
  r.estimate = pairwise_sum(counts) / N;
  r.std_error = std::sqrt(r.estimate * (1.0 - r.estimate) / N);
  r.analytic_lower_bound = c_epsilon_lower_bound(k, D, static_cast<int>(v.size()), eps);
  return r;
}

double atom_count_bound(double eps) {
  if (!(eps > 0.0 && eps <= 1.0)) throw Error("eps must lie in (0, 1]");
  return 4.0 * std::sqrt(2.0) * std::numbers::pi / eps;
}

}  // namespace salem
