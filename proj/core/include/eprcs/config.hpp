#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "eprcs/measurement.hpp"
#include "eprcs/photon_sim.hpp"
#include "eprcs/random_filters.hpp"
#include "eprcs/spdc_model.hpp"
#include "eprcs/tv_solver.hpp"

namespace eprcs {

/// strict: choose_grid (may be infeasible); balanced: balanced_grid.
enum class GridPolicy { strict, balanced };

/// Everything needed to reproduce a run. Text form is one `key = value` per
/// line with dotted section names; `#` starts a comment.
struct ExperimentConfig {
  SpdcParams spdc = SpdcParams::supplement();

  std::size_t n = 16;
  double coverage_sigmas = 3.0;
  GridPolicy grid_policy = GridPolicy::balanced;

  std::size_t measurements = 256;
  std::uint64_t seed = 1;
  bool allow_repeats = true;  // RowPolicy::cycle when M > n^2

  Flux flux{4000.0};
  DetectorModel detector;
  SolverConfig solver;

  std::vector<double> thresholds = {0.0, 0.02, 0.04, 0.06, 0.08, 0.10};
  int dims = 1;

  std::vector<std::size_t> sweep_measurements;
  std::vector<double> sweep_flux;
  std::size_t sweep_trials = 1;

  /// Throws ConfigError on any inconsistent value; `sweep` additionally
  /// requires non-empty sweep axes.
  void validate(bool sweep = false) const;

  RowPolicy row_policy() const {
    return allow_repeats ? RowPolicy::cycle : RowPolicy::distinct;
  }
};

/// Assigns one key. Throws ConfigError for unknown keys or bad values.
void set_value(ExperimentConfig& config, std::string_view key,
               std::string_view value);
/// Applies `key=value`.
void apply_override(ExperimentConfig& config, std::string_view assignment);

/// Reads key/value lines on top of `base`. Unknown keys are errors.
ExperimentConfig parse_config(std::istream& is, ExperimentConfig base = {});
/// Throws MissingArtifact when the file does not exist.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Every key with its resolved value, in canonical order. Doubles are written
/// in shortest round-trip form, so parse_config(to_text(c)) == c.
std::string to_text(const ExperimentConfig& config);

std::vector<std::string> config_keys();

/// Shortest round-trip decimal for a double ("inf" for infinity).
std::string format_double(double v);

GridSpec make_grid(const ExperimentConfig& config);

}  // namespace eprcs
