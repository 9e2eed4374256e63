#pragma once

#include <cstddef>

#include "eprcs/types.hpp"

namespace eprcs {

/// Discretization shared by both particles. Position pixel j sits at
/// x_offset + (j - n/2) dx, momentum pixel m at k_offset + (m - n/2) dk, and
/// n dx dk = 2 pi so one unitary DFT maps between the two domains.
struct GridSpec {
  std::size_t n = 0;
  double dx = 0.0;  // mm
  double dk = 0.0;  // rad/mm
  double x_offset = 0.0;
  double k_offset = 0.0;

  /// Throws BadOrder / std::invalid_argument on a broken grid.
  void validate() const;

  double x(std::size_t j) const;
  double k(std::size_t m) const;
  double position_window() const { return static_cast<double>(n) * dx; }
  double momentum_window() const { return static_cast<double>(n) * dk; }

  bool operator==(const GridSpec&) const = default;
};

/// Grid with the given position pixel; dk follows from n dx dk = 2 pi.
GridSpec fft_grid(std::size_t n, double dx, double x_offset = 0.0,
                  double k_offset = 0.0);

/// Double-Gaussian source parameters, all lengths in mm.
struct SpdcParams {
  double crystal_length = 0.0;
  double pump_wavelength = 0.0;
  double pump_sigma = 0.0;

  void validate() const;

  /// L_z = 1 mm, lambda_p = 400 nm, sigma_p = 0.85 mm.
  static SpdcParams supplement();

  bool operator==(const SpdcParams&) const = default;
};

/// sqrt(9 L lambda / (20 pi)). Accepts L = 0.
double sigma_minus(double crystal_length, double pump_wavelength);
double sigma_minus(const SpdcParams& params);

/// Intensity standard deviations of |psi|^2 along its principal axes.
struct StateWidths {
  double position_difference;  // x1 - x2: sqrt(2) sigma_-
  double position_sum;         // x1 + x2: 2 sigma_p
  double momentum_difference;  // k1 - k2: 1 / (sqrt(2) sigma_-)
  double momentum_sum;         // k1 + k2: 1 / (2 sigma_p)
};

StateWidths state_widths(const SpdcParams& params);

/// Number of principal-axis standard deviations that fit inside each
/// half-window (the smaller of the two axes in each domain).
struct Coverage {
  double position = 0.0;
  double momentum = 0.0;
};

Coverage coverage(const SpdcParams& params, const GridSpec& grid);

/// FFT-compatible grid covering coverage_sigmas in both domains; throws
/// InfeasibleGrid when no dx satisfies both, BadOrder when n is not 2^k.
GridSpec choose_grid(const SpdcParams& params, std::size_t n,
                     double coverage_sigmas);

/// Grid that maximizes the worse of the two coverages. Never infeasible; used
/// for states too entangled to be windowed at the requested n.
GridSpec balanced_grid(const SpdcParams& params, std::size_t n);

/// psi(x1, x2) sampled on the grid, normalized so sum |psi|^2 dx^2 = 1.
struct BiphotonAmplitude {
  ComplexMatrix values;
  GridSpec grid;
};

BiphotonAmplitude build_state(const SpdcParams& params, const GridSpec& grid);

/// Nonnegative n x n array summing to one.
struct JointDistribution {
  RealMatrix values;
  GridSpec grid;
  Domain domain = Domain::position;

  /// Normalizes `weights` to unit sum; throws AllZero when the sum is zero
  /// and std::invalid_argument on negative or non-finite entries.
  static JointDistribution from_weights(RealMatrix weights, GridSpec grid,
                                        Domain domain);
};

JointDistribution position_joint(const BiphotonAmplitude& state);
JointDistribution momentum_joint(const BiphotonAmplitude& state);

/// Momentum-space amplitude in discrete normalization (sum |.|^2 equals the
/// position-space sum |psi|^2).
ComplexMatrix momentum_amplitude(const BiphotonAmplitude& state);

/// Single-particle marginal of particle 1 (row sums).
Eigen::VectorXd signal_marginal(const JointDistribution& joint);

/// h(x) + h(k) in nats for particle 1, estimated as
/// H_discrete(x) + H_discrete(k) + log dx + log dk.
double differential_entropy_sum(const BiphotonAmplitude& state);

}  // namespace eprcs
