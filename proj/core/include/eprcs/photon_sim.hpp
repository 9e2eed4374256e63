#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

#include "eprcs/grid_transform.hpp"
#include "eprcs/random_filters.hpp"
#include "eprcs/rng.hpp"
#include "eprcs/spdc_model.hpp"

namespace eprcs {

enum class Port : std::uint8_t { transmit = 0, reject = 1 };

/// Two-particle port combination; index order TT, TR, RT, RR with the signal
/// port first.
constexpr std::size_t combo_index(Port signal, Port idler) {
  return 2 * static_cast<std::size_t>(signal) + static_cast<std::size_t>(idler);
}
constexpr Port combo_signal(std::size_t c) { return static_cast<Port>(c / 2); }
constexpr Port combo_idler(std::size_t c) { return static_cast<Port>(c % 2); }
inline constexpr std::array<const char*, 4> kComboNames = {"TT", "TR", "RT",
                                                           "RR"};

/// Momentum masks (f for the signal, g for the idler) followed by position
/// masks (b1, b2).
struct FilterSet {
  BinaryMask momentum_signal;
  BinaryMask momentum_idler;
  BinaryMask position_signal;
  BinaryMask position_idler;
};

/// Physical masks for measurement i of a plan: mask_from_signs of the four
/// local sensing vectors.
FilterSet filter_set(const SensingPlan& plan, std::size_t i);

/// p[position combo][momentum combo], rows and columns ordered TT, TR, RT, RR.
struct PortProbabilities {
  std::array<std::array<double, 4>, 4> p{};
  double total() const;
};

/// Expected-count model for non-ideal detection. Defaults are ideal.
struct DetectorModel {
  double pair_efficiency = 1.0;   // probability both photons are registered
  double dark_coincidences = 0.0; // mean accidental counts per port and set
};

struct CoincidenceRecord {
  std::array<std::array<std::uint64_t, 4>, 4> counts{};
  double mean_flux = 0.0;
  std::uint64_t total() const;
};

/// Sequential momentum-then-position filtering of one biphoton state. Caches
/// the momentum amplitude so repeated filter sets only pay for the inverse
/// transforms.
class PhotonSimulator {
 public:
  explicit PhotonSimulator(const BiphotonAmplitude& state);

  /// Exact 16-port probabilities: momentum masks act on psi(k1,k2), the
  /// filtered amplitude propagates back to position, position masks split
  /// the intensity. The ports partition the state, so they sum to one.
  PortProbabilities port_probabilities(const FilterSet& fs) const;

  /// |F^-1{psi(k1,k2) f(k1) g(k2)}|^2, normalized.
  JointDistribution perturbed_position_distribution(const BinaryMask& f,
                                                    const BinaryMask& g) const;

  const GridSpec& grid() const { return transform_.grid(); }
  std::size_t n() const { return transform_.grid().n; }

 private:
  ComplexMatrix filtered_position(const Eigen::VectorXd& f,
                                  const Eigen::VectorXd& g) const;

  GridTransform transform_;
  ComplexMatrix momentum_;
  double norm_ = 1.0;
};

PortProbabilities port_probabilities(const BiphotonAmplitude& state,
                                     const FilterSet& fs);

JointDistribution perturbed_position_distribution(const BiphotonAmplitude& state,
                                                  const BinaryMask& f,
                                                  const BinaryMask& g);

/// Independent Poisson draws with mean mean_flux * p (plus detector model).
CoincidenceRecord sample_counts(const PortProbabilities& p, double mean_flux,
                                Rng& rng, const DetectorModel& detector = {});

/// Fitted correlation width: intensity standard deviation along x1 - x2 of
/// the ridge, in mm. Each anti-diagonal slice gets a quadratic baseline from
/// its flanks (3-7 expected widths out) and a Gaussian on the baseline-
/// subtracted core; slices are averaged by core mass. `expected_sigma` (mm)
/// sets the core and flank windows. Returns NaN if no slice could be fitted.
double fit_correlation_width(const RealMatrix& joint, double dx,
                             double expected_sigma);

}  // namespace eprcs
