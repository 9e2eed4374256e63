#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "eprcs/config.hpp"
#include "eprcs/entropy.hpp"
#include "eprcs/measurement.hpp"
#include "eprcs/random_filters.hpp"
#include "eprcs/spdc_model.hpp"
#include "eprcs/tv_solver.hpp"

namespace eprcs {

// Process exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitMissingArtifact = 3,
  kExitDiverged = 4,
};

/// Maps a caught exception to an exit code.
int exit_code_for(const std::exception& e);

// File names inside a run directory.
namespace artifact {
inline constexpr const char* kManifest = "manifest.txt";
inline constexpr const char* kConfig = "config.txt";
inline constexpr const char* kPlan = "plan.txt";
inline constexpr const char* kState = "state.epra";
inline constexpr const char* kTruthPosition = "truth_position.epra";
inline constexpr const char* kTruthMomentum = "truth_momentum.epra";
inline constexpr const char* kMeasurements = "measurements.epra";
inline constexpr const char* kRecords = "records.csv";
inline constexpr const char* kReconPosition = "recon_position.epra";
inline constexpr const char* kReconMomentum = "recon_momentum.epra";
inline constexpr const char* kReconstruction = "reconstruction.txt";
inline constexpr const char* kAnalysis = "analysis.csv";
inline constexpr const char* kReports = "steering_reports.txt";
}  // namespace artifact

/// Stage seeds derived from the master seed.
struct StageSeeds {
  std::uint64_t master = 0;
  std::uint64_t plan = 0;
  std::uint64_t acquisition = 0;
};
StageSeeds stage_seeds(std::uint64_t master);

/// Seed of one sweep cell: hash of (master, M, flux bits, trial). Running
/// `simulate` with plan.seed set to this value reproduces the cell.
std::uint64_t cell_seed(std::uint64_t master, std::size_t measurements,
                        double flux, std::size_t trial);

struct Simulation {
  GridSpec grid;
  BiphotonAmplitude state;
  JointDistribution truth_position;
  JointDistribution truth_momentum;
  SensingPlan plan;
  Acquisition acquisition;
};

/// State, ground truth, plan and measurements for one configuration.
Simulation simulate(const ExperimentConfig& config);

struct Reconstruction {
  ReconstructionResult position;
  ReconstructionResult momentum;
  std::size_t rows_used = 0;
};

/// Solves both TV problems on the valid rows. With `concurrent` set the two
/// solvers run on separate threads; results do not depend on it.
Reconstruction reconstruct(const SensingPlan& plan,
                           const MeasurementVectors& vectors,
                           const SolverConfig& solver, bool concurrent = false,
                           std::ostream* log = nullptr);

struct AnalysisRow {
  double threshold = 0.0;
  bool ok = false;
  std::string status;  // "ok" or the reason the row has no values
  SteeringReport report;
  double mi_position = 0.0;
  double mi_momentum = 0.0;
  double mse_position = 0.0;  // thresholded distribution vs truth
  double mse_momentum = 0.0;
};

std::vector<AnalysisRow> analyze(const RealMatrix& recon_position,
                                 const RealMatrix& recon_momentum,
                                 const JointDistribution& truth_position,
                                 const JointDistribution& truth_momentum,
                                 const std::vector<double>& thresholds, int dims);

RealMatrix as_matrix(const ReconstructionResult& result);

// ---------------------------------------------------------------------------
// Run directories

/// simulate: writes state, truth, plan, measurements, records, manifest.
/// Returns the run id.
std::string cmd_simulate(const ExperimentConfig& config,
                         const std::filesystem::path& run_dir,
                         std::ostream* log = nullptr);

/// reconstruct: solver keys in `overrides` replace those in the run's config.
void cmd_reconstruct(const std::filesystem::path& run_dir,
                     const std::vector<std::string>& overrides = {},
                     bool concurrent = true, std::ostream* log = nullptr);

/// analyze: empty `thresholds` means use the run's config.
std::vector<AnalysisRow> cmd_analyze(const std::filesystem::path& run_dir,
                                     const std::vector<double>& thresholds = {});

struct Manifest {
  std::string run_id;
  std::string timestamp;
  StageSeeds seeds;
  std::vector<std::string> stages;
  std::string config_text;
  std::map<std::string, std::string> artifacts;  // file name -> sha256
};

Manifest read_manifest(const std::filesystem::path& run_dir);

struct ReplayResult {
  bool identical = true;
  std::vector<std::string> mismatches;  // artifact names that differ
};

/// Re-executes every recorded stage into `out_dir` and compares checksums.
ReplayResult replay(const std::filesystem::path& run_dir,
                    const std::filesystem::path& out_dir);

// ---------------------------------------------------------------------------
// Sweeps

struct CellResult {
  std::size_t measurements = 0;
  double flux = 0.0;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  std::size_t missing_rows = 0;
  double mse_position = 0.0;  // raw reconstruction vs truth
  double mse_momentum = 0.0;
  std::vector<AnalysisRow> rows;
};

/// One sweep cell run in memory through simulate, reconstruct and analyze.
/// Failures are captured in the result.
CellResult run_cell(const ExperimentConfig& base, std::size_t measurements,
                    double flux, std::size_t trial);

struct SweepResult {
  std::vector<CellResult> cells;  // ordered M-major, then flux, then trial
};

/// Runs every (M, flux, trial) cell on up to `threads` workers.
SweepResult run_sweep(const ExperimentConfig& config, unsigned threads = 1,
                      std::ostream* log = nullptr);

/// Writes sweep_mse_position.csv, sweep_mse_momentum.csv,
/// sweep_violation.csv and sweep_trials.csv.
void write_sweep(const std::filesystem::path& dir, const ExperimentConfig& config,
                 const SweepResult& result);

SweepResult cmd_sweep(const ExperimentConfig& config,
                      const std::filesystem::path& out_dir, unsigned threads = 1,
                      std::ostream* log = nullptr);

}  // namespace eprcs
