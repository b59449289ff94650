#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "salem/grid.hpp"

namespace salem {

enum class CantorMode { independent_uniform, radial_product };

CantorMode parse_cantor_mode(const std::string& s);
std::string to_string(CantorMode mode);

struct CantorParams {
  int n = 1;
  int M = 4;
  int T = 2;
  int stages = 4;
  std::uint64_t seed = 0;
  CantorMode mode = CantorMode::independent_uniform;
};

struct RadialOptions {
  int radial_samples = 4;  // sub-samples per retained radial cell
  int angular = 0;         // samples per angle in the first orthant; 0 picks 2N
};

// Retained cells at resolution M^stages, row-major.
std::vector<std::size_t> cantor_cells(const CantorParams& params);
GridMeasure gen_random_cantor(const CantorParams& params, std::size_t N);
// radial.n is ignored; the radial factor is always one-dimensional.
GridMeasure gen_radial_product(const CantorParams& radial, int n, std::size_t N, const RadialOptions& options = {});

// Lattice (1/oversample) Z^n truncated to sup-norm <= xi_max.
FourierSample fourier_transform(const GridMeasure& measure, double xi_max, int oversample = 1);

struct BallScale {
  double radius = 0.0;
  double max_ratio = 0.0;    // max_x mu(B(x, r)) / r^alpha at this radius
  double running_sup = 0.0;  // max over radii >= this one
};

struct BallConstant {
  double C = 0.0;
  double radius_at_max = 0.0;
  std::vector<BallScale> scales;  // coarse to fine
};

BallConstant ball_condition_constant(const GridMeasure& measure, double alpha);

struct Annulus {
  double lo = 0.0;
  double hi = 0.0;
  double max_abs = 0.0;
  std::size_t samples = 0;
};

struct DecayFit {
  double beta_hat = 0.0;
  double C_hat = 0.0;
  double window_lo = 0.0;
  double window_hi = 0.0;
  bool clamped = false;
  std::vector<Annulus> annuli;
};

DecayFit decay_exponent_fit(const FourierSample& sample, double window_lo, double window_hi);

// Product bump kernel tabulated at spacing 1/N_grid, each axis supported on
// |x| < 1/(2 N_moll), taps normalised to sum 1.
struct Mollifier {
  std::size_t grid = 0;
  int scale = 0;
  int half = 0;
  std::vector<double> taps;  // taps[t + half], t in [-half, half]

  double transform_1d(double xi) const;
  double transform(std::span<const double> xi) const;
  // Sup norm of the unit-scale kernel phi, where phi_N(x) = N^n phi(N x).
  double sup_unit(int n) const;
};

Mollifier make_mollifier(std::size_t grid, int n_moll);

struct MollifySplit {
  GridFunction mu1;     // density of mu * phi on the widened grid
  FourierSample mu2_hat;
  Mollifier kernel;
  // Cell masses of mu1 (same layout as mu1.values()).
  std::vector<double> mu1_masses;
};

MollifySplit mollify_split(const GridMeasure& measure, int n_moll, double xi_max, int oversample = 1);

// Frequency-domain pieces of the split: mu_hat * phi_hat and mu_hat * (1 - phi_hat).
Transform mollified_part(const GridMeasure& measure, const Mollifier& kernel);
Transform remainder_part(const GridMeasure& measure, const Mollifier& kernel);

}  // namespace salem
