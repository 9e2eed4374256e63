#include "eprcs/spdc_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>

#include "eprcs/errors.hpp"
#include "eprcs/grid_transform.hpp"

namespace eprcs {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_power_of_two(std::size_t n) {
  if (!is_power_of_two(n)) {
    throw BadOrder("grid size " + std::to_string(n) +
                   " is not a power of two");
  }
}

double shannon_nats(const Eigen::VectorXd& p) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) h -= p[i] * std::log(p[i]);
  }
  return h;
}

}  // namespace

void GridSpec::validate() const {
  require_power_of_two(n);
  if (!(dx > 0.0) || !(dk > 0.0) || !std::isfinite(dx) || !std::isfinite(dk)) {
    throw std::invalid_argument("grid pixel widths must be positive");
  }
  const double product = static_cast<double>(n) * dx * dk;
  if (std::abs(product / kTwoPi - 1.0) > 1e-12) {
    std::ostringstream os;
    os << "grid is not Fourier compatible: n*dx*dk = " << product;
    throw std::invalid_argument(os.str());
  }
}

double GridSpec::x(std::size_t j) const {
  return x_offset +
         (static_cast<double>(j) - static_cast<double>(n / 2)) * dx;
}

double GridSpec::k(std::size_t m) const {
  return k_offset +
         (static_cast<double>(m) - static_cast<double>(n / 2)) * dk;
}

GridSpec fft_grid(std::size_t n, double dx, double x_offset, double k_offset) {
  require_power_of_two(n);
  GridSpec g{n, dx, kTwoPi / (static_cast<double>(n) * dx), x_offset,
             k_offset};
  g.validate();
  return g;
}

void SpdcParams::validate() const {
  if (!(crystal_length > 0.0) || !(pump_wavelength > 0.0) ||
      !(pump_sigma > 0.0)) {
    throw std::invalid_argument(
        "crystal length, pump wavelength and pump sigma must be positive");
  }
}

SpdcParams SpdcParams::supplement() { return {1.0, 400e-6, 0.85}; }

double sigma_minus(double crystal_length, double pump_wavelength) {
  return std::sqrt(9.0 * crystal_length * pump_wavelength /
                   (20.0 * std::numbers::pi));
}

double sigma_minus(const SpdcParams& params) {
  return sigma_minus(params.crystal_length, params.pump_wavelength);
}

StateWidths state_widths(const SpdcParams& params) {
  params.validate();
  const double sm = sigma_minus(params);
  const double sp = params.pump_sigma;
  return {std::numbers::sqrt2 * sm, 2.0 * sp, 1.0 / (std::numbers::sqrt2 * sm),
          1.0 / (2.0 * sp)};
}

namespace {

struct Extents {
  double position;  // largest principal-axis std in position
  double momentum;
};

Extents extents(const SpdcParams& params) {
  const StateWidths w = state_widths(params);
  return {std::max(w.position_difference, w.position_sum),
          std::max(w.momentum_difference, w.momentum_sum)};
}

}  // namespace

Coverage coverage(const SpdcParams& params, const GridSpec& grid) {
  const Extents e = extents(params);
  // half-window / (axis std / 2): the c-sigma point of an axis at 45 degrees
  // sits at c*std/2 along each particle coordinate.
  return {grid.position_window() / e.position,
          grid.momentum_window() / e.momentum};
}

GridSpec balanced_grid(const SpdcParams& params, std::size_t n) {
  require_power_of_two(n);
  const Extents e = extents(params);
  const double nd = static_cast<double>(n);
  return fft_grid(n, std::sqrt(kTwoPi * e.position / (nd * e.momentum)));
}

GridSpec choose_grid(const SpdcParams& params, std::size_t n,
                     double coverage_sigmas) {
  require_power_of_two(n);
  if (!(coverage_sigmas > 0.0)) {
    throw std::invalid_argument("coverage_sigmas must be positive");
  }
  const Extents e = extents(params);
  const double nd = static_cast<double>(n);
  const double dx_min = coverage_sigmas * e.position / nd;
  const double dk_min = coverage_sigmas * e.momentum / nd;
  const double dx_max = kTwoPi / (nd * dk_min);
  if (dx_min > dx_max * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "no grid with n=" << n << " covers " << coverage_sigmas
       << " sigma in both domains (needs dx >= " << dx_min
       << " mm and dx <= " << dx_max << " mm); increase n";
    throw InfeasibleGrid(os.str());
  }
  // The geometric mean of [dx_min, dx_max] equalizes the two coverages.
  return balanced_grid(params, n);
}

BiphotonAmplitude build_state(const SpdcParams& params, const GridSpec& grid) {
  params.validate();
  grid.validate();
  const double sm = sigma_minus(params);
  const double sp = params.pump_sigma;
  const double diff_scale = 1.0 / (8.0 * sm * sm);
  const double sum_scale = 1.0 / (16.0 * sp * sp);

  const std::size_t n = grid.n;
  ComplexMatrix psi(n, n);
  double norm = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x1 = grid.x(i);
    for (std::size_t j = 0; j < n; ++j) {
      const double x2 = grid.x(j);
      const double d = x1 - x2;
      const double s = x1 + x2;
      const double v = std::exp(-d * d * diff_scale - s * s * sum_scale);
      psi(i, j) = v;
      norm += v * v;
    }
  }
  norm *= grid.dx * grid.dx;
  if (!(norm > 0.0)) {
    throw std::domain_error("state underflows on this grid");
  }
  psi /= std::sqrt(norm);
  return {std::move(psi), grid};
}

JointDistribution JointDistribution::from_weights(RealMatrix weights,
                                                  GridSpec grid,
                                                  Domain domain) {
  if (!weights.allFinite()) {
    throw std::invalid_argument("distribution has non-finite entries");
  }
  if ((weights.array() < 0.0).any()) {
    throw std::invalid_argument("distribution has negative entries");
  }
  const double total = weights.sum();
  if (!(total > 0.0)) {
    throw AllZero("distribution has zero total mass");
  }
  weights /= total;
  return {std::move(weights), grid, domain};
}

JointDistribution position_joint(const BiphotonAmplitude& state) {
  return JointDistribution::from_weights(state.values.cwiseAbs2(), state.grid,
                                         Domain::position);
}

ComplexMatrix momentum_amplitude(const BiphotonAmplitude& state) {
  return GridTransform(state.grid).to_momentum(state.values);
}

JointDistribution momentum_joint(const BiphotonAmplitude& state) {
  return JointDistribution::from_weights(
      momentum_amplitude(state).cwiseAbs2(), state.grid, Domain::momentum);
}

Eigen::VectorXd signal_marginal(const JointDistribution& joint) {
  return joint.values.rowwise().sum();
}

double differential_entropy_sum(const BiphotonAmplitude& state) {
  const double hx = shannon_nats(signal_marginal(position_joint(state)));
  const double hk = shannon_nats(signal_marginal(momentum_joint(state)));
  return hx + hk + std::log(state.grid.dx) + std::log(state.grid.dk);
}

}  // namespace eprcs
