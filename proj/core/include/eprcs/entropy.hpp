#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>

#include "eprcs/spdc_model.hpp"
#include "eprcs/types.hpp"

namespace eprcs {

/// Zeroes entries below fraction * max(signal), clamps negative survivors and
/// renormalizes. Throws AllZero when max(signal) <= 0 or nothing survives,
/// std::invalid_argument when fraction is outside [0, 1).
JointDistribution threshold_normalize(const RealMatrix& signal, double fraction,
                                      const GridSpec& grid, Domain domain);

/// Shannon entropy in bits of a nonnegative array summing to one.
double shannon_entropy(const RealMatrix& p);

/// H(particle-1 marginal) or H(particle-2 marginal), bits.
double marginal_entropy(const JointDistribution& joint, Particle particle);

/// H(A|B) = H(A,B) - H(B) in bits, where B is `conditioned_on`. Empty
/// conditioning columns contribute nothing.
double conditional_entropy(const JointDistribution& joint,
                           Particle conditioned_on = Particle::idler);

/// I = H(A) + H(B) - H(A,B), bits.
double mutual_information(const JointDistribution& joint);

/// dims * log2(pi e / (dx dk)). Non-positive when dx dk >= pi e, in which case
/// the witness can never fire (see steering_bound_vacuous).
double steering_bound(double dx, double dk, int dims);
bool steering_bound_vacuous(double dx, double dk);

struct SteeringReport {
  double h_x_cond = 0.0;  // H(X1|X2), bits
  double h_k_cond = 0.0;  // H(K1|K2), bits
  double bound = 0.0;
  double violation = 0.0;  // bound - (h_x_cond + h_k_cond)
  bool entangled = false;
  bool vacuous = false;
  int dims = 1;
};

/// Throws ShapeMismatch when the two grids differ.
SteeringReport steering_witness(const JointDistribution& position,
                                const JointDistribution& momentum, int dims);

/// Context written next to a report.
struct ReportProvenance {
  std::string run_id;
  std::size_t measurements = 0;
  double flux = 0.0;
  double threshold = 0.0;
};

void write_report(std::ostream& os, const SteeringReport& report,
                  const ReportProvenance& provenance);

/// Mean squared elementwise difference. Throws ShapeMismatch.
double mse(const RealMatrix& a, const RealMatrix& b);

}  // namespace eprcs
