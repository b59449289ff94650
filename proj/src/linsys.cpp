#include "salem/linsys.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "salem/parallel.hpp"

namespace salem {

namespace {

bool all_integral(const std::vector<Matrix>& ms) {
  for (const auto& m : ms)
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      double v = m.data()[i];
      if (!(std::fabs(v) < 9.0e15) || v != std::floor(v)) return false;
    }
  return true;
}

std::vector<RationalMatrix> to_exact(const std::vector<Matrix>& ms) {
  std::vector<RationalMatrix> out;
  out.reserve(ms.size());
  for (const auto& m : ms) out.push_back(RationalMatrix::from(m));
  return out;
}

std::vector<Matrix> to_float(const std::vector<RationalMatrix>& ms) {
  std::vector<Matrix> out;
  out.reserve(ms.size());
  for (const auto& m : ms) out.push_back(m.to_double());
  return out;
}

void check_finite(const std::vector<Matrix>& ms) {
  for (const auto& m : ms)
    if (!m.allFinite()) throw Error("matrix system has non-finite entries");
}

std::size_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::size_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::size_t>(n - k + i) / static_cast<std::size_t>(i);
  return r;
}

}  // namespace

StructuralIntegers derive_r_nprime(int n, int k, int m) {
  if (n < 1) throw Error("n must be positive");
  if (k < 3) throw Error("k must be at least 3");
  if (m < n) throw Error("m < n: configurations are overdetermined");
  if (m >= n * k) throw Error("m >= nk: no structural integer r exists");
  const int excess = n * k - m;
  const int r = (excess + n - 1) / n;
  return {r, excess - n * (r - 1)};
}

std::vector<std::vector<int>> combinations(int n, int k) {
  std::vector<std::vector<int>> out;
  if (k < 0 || k > n) return out;
  std::vector<int> c(k);
  std::iota(c.begin(), c.end(), 0);
  for (;;) {
    out.push_back(c);
    int i = k - 1;
    while (i >= 0 && c[i] == n - k + i) --i;
    if (i < 0) break;
    ++c[i];
    for (int j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
  }
  return out;
}

double relative_sigma_min(const Matrix& m) {
  if (m.size() == 0) return 1.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& s = svd.singularValues();
  double smax = s(0);
  if (smax == 0.0) return 0.0;
  return s(s.size() - 1) / smax;
}

bool full_rank(const Matrix& m, double tolerance) {
  if (m.rows() != m.cols()) {
    Eigen::JacobiSVD<Matrix> svd(m);
    const auto& s = svd.singularValues();
    Eigen::Index need = std::min(m.rows(), m.cols());
    return s.size() == need && s(0) > 0.0 && s(need - 1) > tolerance * s(0);
  }
  return relative_sigma_min(m) > tolerance;
}

MatrixSystem MatrixSystem::from_b(int n, int k, int m, std::vector<Matrix> b) {
  auto sr = derive_r_nprime(n, k, m);
  if (static_cast<int>(b.size()) != k)
    throw Error("expected " + std::to_string(k) + " matrices B_j, got " + std::to_string(b.size()));
  for (std::size_t j = 0; j < b.size(); ++j)
    if (b[j].rows() != n || b[j].cols() != m - n)
      throw Error("B_" + std::to_string(j + 1) + " has shape " + std::to_string(b[j].rows()) + "x" +
                  std::to_string(b[j].cols()) + ", expected " + std::to_string(n) + "x" + std::to_string(m - n));
  check_finite(b);
  MatrixSystem s;
  s.n_ = n;
  s.k_ = k;
  s.m_ = m;
  s.r_ = sr.r;
  s.nprime_ = sr.nprime;
  s.identity_form_ = true;
  for (const auto& bj : b) {
    Matrix aj(n, m);
    aj.leftCols(n).setIdentity();
    aj.rightCols(m - n) = bj;
    s.a_.push_back(aj);
  }
  s.b_ = std::move(b);
  s.finish();
  return s;
}

MatrixSystem MatrixSystem::from_b(int n, int k, int m, std::vector<RationalMatrix> b) {
  MatrixSystem s = from_b(n, k, m, to_float(b));
  s.exact_a_.clear();
  for (const auto& bj : b) {
    RationalMatrix aj(n, m);
    for (int i = 0; i < n; ++i) {
      aj(i, i) = 1;
      for (int c = 0; c < m - n; ++c) aj(i, n + c) = bj(i, c);
    }
    s.exact_a_.push_back(std::move(aj));
  }
  return s;
}

MatrixSystem MatrixSystem::from_a(int n, int k, int m, std::vector<Matrix> a) {
  auto sr = derive_r_nprime(n, k, m);
  if (static_cast<int>(a.size()) != k)
    throw Error("expected " + std::to_string(k) + " matrices A_j, got " + std::to_string(a.size()));
  for (std::size_t j = 0; j < a.size(); ++j)
    if (a[j].rows() != n || a[j].cols() != m)
      throw Error("A_" + std::to_string(j + 1) + " has wrong shape, expected " + std::to_string(n) + "x" +
                  std::to_string(m));
  check_finite(a);
  MatrixSystem s;
  s.n_ = n;
  s.k_ = k;
  s.m_ = m;
  s.r_ = sr.r;
  s.nprime_ = sr.nprime;
  s.identity_form_ = true;
  for (const auto& aj : a)
    if (!aj.leftCols(n).isIdentity(0.0)) s.identity_form_ = false;
  s.a_ = std::move(a);
  if (s.identity_form_)
    for (const auto& aj : s.a_) s.b_.push_back(aj.rightCols(m - n));
  s.finish();
  return s;
}

MatrixSystem MatrixSystem::from_a(int n, int k, int m, std::vector<RationalMatrix> a) {
  MatrixSystem s = from_a(n, k, m, to_float(a));
  s.exact_a_ = std::move(a);
  return s;
}

void MatrixSystem::finish() {
  if (all_integral(a_)) exact_a_ = to_exact(a_);
}

const std::vector<Matrix>& MatrixSystem::b() const {
  if (!identity_form_) throw Error("system is not of the form A_j = (I B_j)");
  return b_;
}

std::vector<RationalMatrix> MatrixSystem::exact_b() const {
  if (!identity_form_) throw Error("system is not of the form A_j = (I B_j)");
  if (!has_exact()) throw Error("system has no exact entries");
  std::vector<RationalMatrix> out;
  for (const auto& aj : exact_a_) {
    RationalMatrix bj(n_, m_ - n_);
    for (int i = 0; i < n_; ++i)
      for (int c = 0; c < m_ - n_; ++c) bj(i, c) = aj(i, n_ + c);
    out.push_back(std::move(bj));
  }
  return out;
}

Matrix MatrixSystem::stacked(const std::vector<int>& J) const {
  Matrix out(n_ * static_cast<int>(J.size()), m_);
  for (std::size_t i = 0; i < J.size(); ++i) out.middleRows(n_ * static_cast<int>(i), n_) = a_.at(J[i]);
  return out;
}

Matrix MatrixSystem::transpose_map() const {
  Matrix out(m_, n_ * k_);
  for (int j = 0; j < k_; ++j) out.middleCols(n_ * j, n_) = a_[j].transpose();
  return out;
}

RationalMatrix MatrixSystem::exact_transpose_map() const {
  if (!has_exact()) throw Error("system has no exact entries");
  RationalMatrix out(m_, n_ * k_);
  for (int j = 0; j < k_; ++j)
    for (int i = 0; i < n_; ++i)
      for (int c = 0; c < m_; ++c) out(c, n_ * j + i) = exact_a_[j](i, c);
  return out;
}

bool MatrixSystem::in_dimension_range() const {
  return n_ * ((k_ + 2) / 2) <= m_ && m_ < n_ * k_;
}

bool MatrixSystem::integral() const { return has_exact() && std::all_of(exact_a_.begin(), exact_a_.end(), [](const auto& a) { return a.is_integral(); }); }

MatrixSystem MatrixSystem::permuted(const std::vector<int>& order) const {
  if (static_cast<int>(order.size()) != k_) throw Error("permutation has wrong length");
  MatrixSystem s = *this;
  for (int j = 0; j < k_; ++j) {
    s.a_[j] = a_.at(order[j]);
    if (identity_form_) s.b_[j] = b_.at(order[j]);
    if (has_exact()) s.exact_a_[j] = exact_a_.at(order[j]);
  }
  return s;
}

MatrixSystem MatrixSystem::scaled_b(double factor) const {
  std::vector<Matrix> nb;
  for (const auto& bj : b()) nb.push_back(bj * factor);
  if (has_exact()) {
    Rational f = rationalize(factor);
    auto eb = exact_b();
    for (auto& bj : eb)
      for (auto& q : bj.data) q *= f;
    return from_b(n_, k_, m_, std::move(eb));
  }
  return from_b(n_, k_, m_, std::move(nb));
}

MatrixSystem build_system(int n, int k, int m, std::vector<Matrix> b) {
  return MatrixSystem::from_b(n, k, m, std::move(b));
}

std::size_t nondegeneracy_test_count(const MatrixSystem& s) {
  const int n = s.n(), k = s.k(), r = s.r(), np = s.nprime();
  return binomial(k, k - r) * static_cast<std::size_t>(r) * binomial(n, n - np);
}

namespace {

struct Candidate {
  double metric = std::numeric_limits<double>::infinity();
  std::vector<int> J;
  int j = -1;
  std::vector<int> rows;
  std::size_t tested = 0;
};

}  // namespace

NondegeneracyReport check_nondegenerate(const MatrixSystem& s, const NondegeneracyOptions& opt) {
  const int n = s.n(), k = s.k(), m = s.m(), r = s.r(), np = s.nprime();
  const std::size_t count = nondegeneracy_test_count(s);
  if (count > opt.cap)
    throw Error("non-degeneracy enumeration needs " + std::to_string(count) + " matrix tests, above the cap of " +
                std::to_string(opt.cap));
  const bool exact = opt.allow_exact && s.has_exact() && m <= 12;
  const auto Js = combinations(k, k - r);
  const auto row_sets = combinations(n, n - np);
  std::vector<Candidate> best(Js.size());

  parallel_for(
      Js.size(),
      [&](std::size_t idx) {
        const auto& J = Js[idx];
        Candidate& c = best[idx];
        const int base = n * (k - r);
        Matrix mat(m, m);
        mat.topRows(base) = s.stacked(J);
        RationalMatrix emat;
        if (exact) {
          emat = RationalMatrix(m, m);
          for (std::size_t t = 0; t < J.size(); ++t)
            for (int i = 0; i < n; ++i)
              for (int col = 0; col < m; ++col) emat(n * static_cast<int>(t) + i, col) = s.exact_a()[J[t]](i, col);
        }
        for (int j = 0; j < k; ++j) {
          if (std::find(J.begin(), J.end(), j) != J.end()) continue;
          for (const auto& rows : row_sets) {
            double metric;
            if (exact) {
              for (std::size_t t = 0; t < rows.size(); ++t)
                for (int col = 0; col < m; ++col) emat(base + static_cast<int>(t), col) = s.exact_a()[j](rows[t], col);
              metric = std::fabs(to_double(exact_det(emat)));
            } else {
              for (std::size_t t = 0; t < rows.size(); ++t) mat.row(base + static_cast<int>(t)) = s.a(j).row(rows[t]);
              metric = relative_sigma_min(mat);
            }
            ++c.tested;
            if (metric < c.metric) {
              c.metric = metric;
              c.J = J;
              c.j = j;
              c.rows = rows;
            }
          }
        }
      },
      opt.threads);

  NondegeneracyReport rep;
  rep.exact = exact;
  rep.tolerance = exact ? 0.0 : opt.tolerance;
  rep.min_abs_det = std::numeric_limits<double>::infinity();
  for (const auto& c : best) {
    rep.tested += c.tested;
    if (c.metric < rep.min_abs_det) {
      rep.min_abs_det = c.metric;
      rep.worst_J = c.J;
      rep.worst_j = c.j;
      rep.worst_rows = c.rows;
    }
  }
  rep.passed = rep.min_abs_det > rep.tolerance;
  return rep;
}

NondegeneracyReport check_nondegenerate(const MatrixSystem& system, double tolerance) {
  NondegeneracyOptions opt;
  opt.tolerance = tolerance;
  return check_nondegenerate(system, opt);
}

bool check_reduced_nondegenerate(const MatrixSystem& s, double tolerance) {
  const int n = s.n(), k = s.k(), m = s.m();
  if (m != n * ((k + 2) / 2))
    throw Error("reduced condition needs m = n*ceil((k+1)/2); got m=" + std::to_string(m));
  if (!s.identity_form()) throw Error("reduced condition needs A_j = (I B_j)");
  const int p = m / n;
  const int d = m - n;
  const bool exact = s.has_exact() && d <= 12;
  std::vector<RationalMatrix> eb;
  if (exact) eb = s.exact_b();
  for (const auto& idx : combinations(k, p)) {
    if (exact) {
      RationalMatrix st(d, d);
      for (int t = 1; t < p; ++t)
        for (int i = 0; i < n; ++i)
          for (int c = 0; c < d; ++c) st(n * (t - 1) + i, c) = eb[idx[t]](i, c) - eb[idx[0]](i, c);
      if (exact_rank(st) != d) return false;
    } else {
      Matrix st(d, d);
      for (int t = 1; t < p; ++t) st.middleRows(n * (t - 1), n) = s.b()[idx[t]] - s.b()[idx[0]];
      if (!full_rank(st, tolerance)) return false;
    }
  }
  return true;
}

SubspaceBasis subspace_S_basis(const MatrixSystem& s, double tolerance) {
  const int m = s.m(), d = s.n() * s.k();
  Matrix P = s.transpose_map();
  Eigen::JacobiSVD<Matrix> svd(P, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > tolerance * sv(0)) ++rank;
  if (rank < m)
    throw Error("stacked map (A_1^t | ... | A_k^t) has rank " + std::to_string(rank) + " < m = " + std::to_string(m));
  Matrix V = svd.matrixV().rightCols(d - m);
  for (int c = 0; c < V.cols(); ++c) {
    for (int pass = 0; pass < 2; ++pass)
      for (int p = 0; p < c; ++p) V.col(c) -= V.col(p).dot(V.col(c)) * V.col(p);
    V.col(c).normalize();
    for (int i = 0; i < d; ++i) {
      if (std::fabs(V(i, c)) > 1e-12) {
        if (V(i, c) < 0) V.col(c) = -V.col(c);
        break;
      }
    }
  }
  return {d, d - m, V};
}

bool coordinate_chart_check(const MatrixSystem& s, const std::vector<int>& J, const std::vector<int>& Jprime,
                            double tolerance) {
  const int n = s.n(), k = s.k(), m = s.m(), r = s.r(), np = s.nprime();
  if (static_cast<int>(J.size()) != r) throw Error("chart index list J must have r = " + std::to_string(r) + " entries");
  if (static_cast<int>(Jprime.size()) != np)
    throw Error("chart coordinate list J' must have n' = " + std::to_string(np) + " entries");
  for (std::size_t i = 0; i < J.size(); ++i) {
    if (J[i] < 0 || J[i] >= k) throw Error("chart index out of range");
    for (std::size_t t = 0; t < i; ++t)
      if (J[t] == J[i]) throw Error("chart indices must be distinct");
  }
  for (std::size_t i = 0; i < Jprime.size(); ++i) {
    if (Jprime[i] < 0 || Jprime[i] >= n) throw Error("chart coordinate out of range");
    for (std::size_t t = 0; t < i; ++t)
      if (Jprime[t] == Jprime[i]) throw Error("chart coordinates must be distinct");
  }
  const int d = n * k;
  auto unit_rows = [&](auto&& put) {
    int row = m;
    for (int t = 0; t + 1 < r; ++t)
      for (int i = 0; i < n; ++i) put(row++, n * J[t] + i);
    for (int c : Jprime) put(row++, n * J[r - 1] + c);
  };
  if (s.has_exact() && d <= 16) {
    RationalMatrix M(d, d);
    RationalMatrix P = s.exact_transpose_map();
    for (int i = 0; i < m; ++i)
      for (int c = 0; c < d; ++c) M(i, c) = P(i, c);
    unit_rows([&](int row, int col) { M(row, col) = 1; });
    return exact_rank(M) == d;
  }
  Matrix M = Matrix::Zero(d, d);
  M.topRows(m) = s.transpose_map();
  unit_rows([&](int row, int col) { M(row, col) = 1.0; });
  return full_rank(M, tolerance);
}

}  // namespace salem
