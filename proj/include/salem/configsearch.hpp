#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "salem/grid.hpp"
#include "salem/linsys.hpp"
#include "salem/rational.hpp"

namespace salem {

// V = {y : matrix y = 0}.
struct ExceptionalSubspace {
  Matrix matrix;
  int dim = 0;
  Matrix rowspace;  // orthonormal basis of V-perp, (m-n) x (m-n-dim)

  static ExceptionalSubspace from_matrix(const Matrix& matrix, double tolerance = 1e-12);
  double distance(const Vector& y) const;
};

struct ConfigurationFamily {
  MatrixSystem system;
  std::vector<ExceptionalSubspace> exclusions;
};

ConfigurationFamily make_triangle_system(double theta, double lam);
ConfigurationFamily make_colinear_system(int n, double lam);
ConfigurationFamily make_parallelogram_system(int n);
ConfigurationFamily make_vandermonde_system(const std::vector<double>& a, int eta, int d);

struct PointSet {
  int n = 0;
  std::vector<std::vector<double>> points;
  double tol = 0.0;

  void validate() const;
  // Cell centres of the occupied cells; tol defaults to 1.5 cell diagonals.
  static PointSet from_mask(int n, std::size_t N, const std::vector<bool>& occupied, double tol = 0.0);
  static PointSet from_measure(const GridMeasure& measure, double tol = 0.0);
};

// Bucketed nearest-point lookup.
class PointIndex {
 public:
  PointIndex(const PointSet& set);
  // Distance to the nearest point within tol, if any.
  std::optional<double> nearest(const double* p) const;
  double nearest_brute(const double* p) const;
  const std::vector<double>& lo() const { return lo_; }
  const std::vector<double>& hi() const { return hi_; }

 private:
  const PointSet* set_;
  double cell_;
  std::vector<double> lo_, hi_;
  std::vector<std::int64_t> base_;
  std::vector<std::size_t> dims_;
  std::vector<std::vector<std::size_t>> buckets_;
};

struct ConfigurationHit {
  Vector x;
  Vector y;
  std::vector<Vector> realized;
  std::vector<double> dists;
  double max_dist = 0.0;
  std::vector<double> margins;  // distance of y to each exceptional subspace
  double excluded_margin = 0.0; // min of margins (infinity when none)
};

struct SearchOptions {
  int y_steps = 8;                   // y grid is i / y_steps, |i| <= y_steps
  double exclusion_threshold = -1.0; // negative: one y-grid spacing
  std::size_t cap = 100000000;
  std::size_t max_hits = 0;          // 0: unlimited
  int threads = 0;
};

struct SearchResult {
  std::vector<ConfigurationHit> hits;
  std::size_t evaluations = 0;
  bool truncated = false;
};

SearchResult search_configurations(const MatrixSystem& system, const PointSet& E,
                                   const std::vector<ExceptionalSubspace>& exclusions,
                                   const SearchOptions& options = {});

// Re-derives every invariant of a hit from scratch; returns an empty string when valid.
std::string validate_hit(const MatrixSystem& system, const PointSet& E, const std::vector<ExceptionalSubspace>& exclusions,
                         double threshold, const ConfigurationHit& hit);

int count_positive_roots(const std::vector<int>& exponents, const std::vector<double>& coeffs);
int count_positive_roots(const std::vector<int>& exponents, const std::vector<Rational>& coeffs);

struct CEpsilonResult {
  double estimate = 0.0;
  double std_error = 0.0;
  double analytic_lower_bound = 0.0;
  std::size_t samples = 0;
};

// v holds K integer vectors in Z^n.
CEpsilonResult c_epsilon_measure(const MatrixSystem& system, const std::vector<std::vector<long>>& v, double eps,
                                 std::size_t samples, std::uint64_t seed, int threads = 0);
double c_epsilon_lower_bound(int k, int dim_y, int K, double eps);

double atom_count_bound(double eps);

}  // namespace salem
