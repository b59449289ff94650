#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "salem/grid.hpp"
#include "salem/linsys.hpp"

namespace salem {

enum class LambdaMethod { direct, direct_monte_carlo, fourier, fourier_monte_carlo, star_tau, star_tau_monte_carlo };

std::string to_string(LambdaMethod method);

struct LambdaResult {
  double value = 0.0;
  double imag = 0.0;
  LambdaMethod method = LambdaMethod::direct;
  double R = 0.0;     // truncation radius (Fourier side)
  int Q = 0;          // nodes per axis, or direct grid size
  double est_error = 0.0;
  double half_value = 0.0;  // Fourier side: value at radius R/2
  std::vector<std::string> flags;

  bool has_flag(const std::string& f) const;
  bool divergent() const { return has_flag("divergent"); }
};

// Box containing {x : A_j x in boxes[j] for all j, x in extra}, or nullopt when
// interval propagation proves the set empty.
std::optional<Box> support_region(const MatrixSystem& system, const std::vector<Box>& boxes,
                                  const std::optional<Box>& extra = std::nullopt);

struct DirectOptions {
  int grid = 256;
  bool monte_carlo = false;
  std::size_t samples = 1u << 20;
  std::uint64_t seed = 0;
  int threads = 0;
};

LambdaResult lambda_direct(const MatrixSystem& system, const std::vector<GridFunction>& f,
                           const DirectOptions& options = {});

struct FourierOptions {
  double R = 64.0;
  int Q = 4096;
  std::size_t samples = 1u << 20;  // Monte Carlo path (dim S > 3)
  std::uint64_t seed = 0;
  int threads = 0;
};

// Constant relating Lambda to the surface integral over S.
double fourier_constant(const MatrixSystem& system);

LambdaResult lambda_fourier(const MatrixSystem& system, const std::vector<Transform>& fhat,
                            const FourierOptions& options = {});
LambdaResult lambda_star_tau(const MatrixSystem& system, const std::vector<Transform>& g, const Vector& tau,
                             const FourierOptions& options = {});
// Is tau orthogonal to S within 1e-9 (relative to max(1, |tau|))?
bool in_S_perp(const MatrixSystem& system, const Vector& tau);
// Seeded random unit vector in S-perp.
Vector random_tau(const MatrixSystem& system, std::uint64_t seed, double norm = 1.0);

// Bit j of the pattern index selects mu2_hat for slot j.
std::vector<LambdaResult> decomposition_terms(const MatrixSystem& system, const Transform& mu1_hat,
                                              const Transform& mu2_hat, const FourierOptions& options = {});

struct ThetaOptions {
  int grid = 256;    // direct quadrature nodes per axis
  double R = 16.0;   // frequency box half-width
  int Q = 128;       // frequency nodes per axis
  int threads = 0;
};

struct ThetaResult {
  double direct = 0.0;
  double fourier = 0.0;
  double fourier_imag = 0.0;
};

ThetaResult theta_eval(const MatrixSystem& system, const GridFunction& g, const std::vector<GridFunction>& f,
                       const ThetaOptions& options = {});

// (1 + |kappa|)^{-beta/2}
Transform envelope_transform(double beta);

}  // namespace salem
