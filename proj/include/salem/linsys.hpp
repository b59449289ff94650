#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "salem/common.hpp"
#include "salem/rational.hpp"

namespace salem {

struct StructuralIntegers {
  int r = 0;
  int nprime = 0;
};

StructuralIntegers derive_r_nprime(int n, int k, int m);

// k point maps x -> A_j x, A_j of size n x m. Identity-form systems have
// A_j = (I_n  B_j); general systems are built from A_j directly.
class MatrixSystem {
 public:
  static MatrixSystem from_b(int n, int k, int m, std::vector<Matrix> b);
  static MatrixSystem from_b(int n, int k, int m, std::vector<RationalMatrix> b);
  static MatrixSystem from_a(int n, int k, int m, std::vector<Matrix> a);
  static MatrixSystem from_a(int n, int k, int m, std::vector<RationalMatrix> a);

  int n() const { return n_; }
  int k() const { return k_; }
  int m() const { return m_; }
  int r() const { return r_; }
  int nprime() const { return nprime_; }
  bool identity_form() const { return identity_form_; }
  bool has_exact() const { return !exact_a_.empty(); }

  const std::vector<Matrix>& a() const { return a_; }
  const Matrix& a(int j) const { return a_[j]; }
  // Requires identity form.
  const std::vector<Matrix>& b() const;
  const std::vector<RationalMatrix>& exact_a() const { return exact_a_; }
  std::vector<RationalMatrix> exact_b() const;

  // (A_{J_1}; ...; A_{J_s}) stacked by rows: (n * |J|) x m.
  Matrix stacked(const std::vector<int>& J) const;
  // The m x nk map xi -> sum_j A_j^t xi_j.
  Matrix transpose_map() const;
  RationalMatrix exact_transpose_map() const;
  bool in_dimension_range() const;
  bool integral() const;

  MatrixSystem permuted(const std::vector<int>& order) const;
  MatrixSystem scaled_b(double factor) const;

 private:
  void finish();

  int n_ = 0, k_ = 0, m_ = 0, r_ = 0, nprime_ = 0;
  bool identity_form_ = true;
  std::vector<Matrix> a_;
  std::vector<Matrix> b_;
  std::vector<RationalMatrix> exact_a_;
};

MatrixSystem build_system(int n, int k, int m, std::vector<Matrix> b);

struct NondegeneracyReport {
  bool passed = false;
  std::vector<int> worst_J;
  int worst_j = -1;
  std::vector<int> worst_rows;
  // Exact path: smallest |det|. Float path: smallest sigma_min / sigma_max.
  double min_abs_det = 0.0;
  double tolerance = 0.0;
  bool exact = false;
  std::size_t tested = 0;
};

struct NondegeneracyOptions {
  double tolerance = 1e-9;
  std::size_t cap = 1000000;
  bool allow_exact = true;
  int threads = 0;
};

std::size_t nondegeneracy_test_count(const MatrixSystem& system);
NondegeneracyReport check_nondegenerate(const MatrixSystem& system, const NondegeneracyOptions& options = {});
NondegeneracyReport check_nondegenerate(const MatrixSystem& system, double tolerance);

bool check_reduced_nondegenerate(const MatrixSystem& system, double tolerance = 1e-9);

struct SubspaceBasis {
  int ambient = 0;
  int dim = 0;
  Matrix vectors;  // ambient x dim, orthonormal columns
};

SubspaceBasis subspace_S_basis(const MatrixSystem& system, double tolerance = 1e-12);

// J: r block indices, the last one being the partially used block; Jprime:
// nprime coordinates of that block.
bool coordinate_chart_check(const MatrixSystem& system, const std::vector<int>& J, const std::vector<int>& Jprime,
                            double tolerance = 1e-9);

// Relative rank test: sigma_min > tolerance * sigma_max.
bool full_rank(const Matrix& m, double tolerance);
double relative_sigma_min(const Matrix& m);

// Lexicographic enumeration of k-subsets of {0..n-1}.
std::vector<std::vector<int>> combinations(int n, int k);

}  // namespace salem
