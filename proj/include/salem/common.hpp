#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace salem {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using cplx = std::complex<double>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Axis-aligned box [lo, hi] in R^n.
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;

  int dim() const { return static_cast<int>(lo.size()); }
  bool empty() const {
    for (std::size_t i = 0; i < lo.size(); ++i)
      if (!(lo[i] <= hi[i])) return true;
    return false;
  }
  static Box unit(int n) { return {std::vector<double>(n, 0.0), std::vector<double>(n, 1.0)}; }
};

}  // namespace salem
