#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "eprcs/photon_sim.hpp"
#include "eprcs/random_filters.hpp"
#include "eprcs/spdc_model.hpp"

namespace eprcs {

/// Decoupled measurement values of one filter set.
struct Aggregate {
  double y_momentum = 0.0;
  double y_position = 0.0;
  std::uint64_t total = 0;
};

/// Column sums give A^{TT..RR}, row sums B^{TT..RR};
/// y = (S^TT - S^TR - S^RT + S^RR) / (S^TT + S^TR + S^RT + S^RR).
/// Throws EmptyRecord when no coincidences were recorded.
Aggregate aggregate(const CoincidenceRecord& record);

/// Same algebra on exact probabilities (the infinite-flux limit); total = 0.
Aggregate aggregate(const PortProbabilities& p);

/// Mean coincidences per filter set; infinite flux means exact probabilities.
struct Flux {
  double mean = std::numeric_limits<double>::infinity();

  static Flux exact() { return {}; }
  bool is_exact() const { return mean == std::numeric_limits<double>::infinity(); }
};

struct MeasurementVectors {
  std::vector<double> y_momentum;
  std::vector<double> y_position;
  std::vector<std::uint64_t> totals;
  std::vector<std::uint8_t> valid;  // 0 where the record was empty

  std::size_t size() const { return y_momentum.size(); }
  std::size_t missing() const;
  /// Indices of valid rows, in order.
  std::vector<std::size_t> valid_rows() const;
  /// y restricted to valid rows.
  std::vector<double> compact(Domain d) const;
};

struct Acquisition {
  MeasurementVectors vectors;
  std::vector<CoincidenceRecord> records;  // empty for exact acquisitions
};

/// Simulates every filter set of the plan on `state`. Counts for row i come
/// from an RNG stream derived from (seed, i), so rows are independent of
/// evaluation order. Empty records are flagged invalid, not fabricated.
Acquisition run_acquisition(const BiphotonAmplitude& state,
                            const SensingPlan& plan, Flux flux,
                            std::uint64_t seed,
                            const DetectorModel& detector = {});

}  // namespace eprcs
