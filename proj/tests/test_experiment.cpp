#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "eprcs/array_io.hpp"
#include "eprcs/checksum.hpp"
#include "eprcs/errors.hpp"
#include "eprcs/experiment.hpp"
#include "test_support.hpp"

using namespace eprcs;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("eprcs_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.measurements = 64;
  c.flux = Flux{2000.0};
  c.solver.max_outer_iterations = 60;
  return c;
}

std::vector<double> flat(const RealMatrix& m) { return {m.data(), m.data() + m.size()}; }

}  // namespace

TEST_CASE("config text round trip") {
  ExperimentConfig c;
  c.measurements = 512;
  c.flux = Flux{1234.5};
  c.solver.mu = 0.1 + 0.2;
  c.thresholds = {0.0, 0.03};
  c.sweep_measurements = {64, 128};
  c.sweep_flux = {250, 1e300};
  c.grid_policy = GridPolicy::strict;
  const std::string text = to_text(c);
  std::istringstream is(text);
  const ExperimentConfig back = parse_config(is);
  CHECK(to_text(back) == text);
  CHECK(back.solver.mu == c.solver.mu);
  CHECK(back.sweep_flux[1] == 1e300);
  CHECK(back.grid_policy == GridPolicy::strict);

  ExperimentConfig inf;
  apply_override(inf, "flux.mean=inf");
  CHECK(inf.flux.is_exact());
  std::istringstream again(to_text(inf));
  CHECK(parse_config(again).flux.is_exact());
}

TEST_CASE("config errors") {
  ExperimentConfig c;
  CHECK_THROWS_WITH_AS(set_value(c, "plan.bogus", "1"), "unknown config key 'plan.bogus'", ConfigError);
  CHECK_THROWS_AS(apply_override(c, "plan.M"), ConfigError);
  CHECK_THROWS_AS(set_value(c, "plan.M", "twelve"), ConfigError);
  c.measurements = 0;
  CHECK_THROWS_WITH_AS(c.validate(), "empty plan: plan.M must be at least 1", ConfigError);
  ExperimentConfig s;
  CHECK_THROWS_AS(s.validate(true), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/eprcs.cfg"), MissingArtifact);
  std::istringstream comments("# comment\nplan.M = 32  # trailing\n\n");
  CHECK(parse_config(comments).measurements == 32);
  for (const auto& key : config_keys()) CHECK(to_text(ExperimentConfig{}).find(key) != std::string::npos);
}

TEST_CASE("array files round trip") {
  const fs::path dir = scratch("array");
  RealMatrix m(3, 5);
  std::mt19937_64 rng(1);
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = std::uniform_real_distribution<>(-1, 1)(rng);
  write_matrix(dir / "m.epra", m);
  CHECK(read_matrix(dir / "m.epra") == m);
  CHECK(fs::file_size(dir / "m.epra") == 32 + 8 * 15);
  const std::string bytes = slurp(dir / "m.epra");
  CHECK(bytes.substr(0, 4) == "EPRA");

  const std::vector<std::size_t> dims = {2, 2, 2};
  const std::vector<double> data = {1, 2, 3, 4, 5, 6, 7, 8};
  write_array(dir / "a.epra", dims, data);
  const Array a = read_array(dir / "a.epra");
  CHECK(a.dims == dims);
  CHECK(a.data == data);
  CHECK_THROWS_AS(read_matrix(dir / "a.epra"), ShapeMismatch);
  CHECK_THROWS_AS(read_array(dir / "missing.epra"), MissingArtifact);
  std::istringstream junk("NOPE and more bytes to fill a header.........");
  CHECK_THROWS(read_array(junk));
}

TEST_CASE("sha256 digests") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK_THROWS_AS(sha256_file("/nonexistent/file"), MissingArtifact);
}

TEST_CASE("exit codes") {
  CHECK(exit_code_for(ConfigError("x")) == kExitConfig);
  CHECK(exit_code_for(std::invalid_argument("x")) == kExitConfig);
  CHECK(exit_code_for(MissingArtifact("x")) == kExitMissingArtifact);
  CHECK(exit_code_for(SolverDiverged("x")) == kExitDiverged);
  CHECK(exit_code_for(std::runtime_error("x")) == kExitFailure);
}

TEST_CASE("simulate is deterministic and records every count") {
  ExperimentConfig c;
  c.measurements = 1024;
  c.flux = Flux{4000.0};
  const fs::path a = scratch("sim_a");
  const fs::path b = scratch("sim_b");
  cmd_simulate(c, a);
  cmd_simulate(c, b);
  for (const char* name : {artifact::kMeasurements, artifact::kRecords, artifact::kPlan,
                           artifact::kState, artifact::kTruthPosition, artifact::kConfig})
    CHECK_MESSAGE(slurp(a / name) == slurp(b / name), name);

  std::ifstream records(a / artifact::kRecords);
  std::string line;
  std::getline(records, line);
  CHECK(line[0] == '#');
  std::getline(records, line);
  CHECK(std::count(line.begin(), line.end(), ',') == 18);
  std::size_t rows = 0;
  std::size_t cells = 0;
  while (std::getline(records, line)) {
    ++rows;
    cells += static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) - 2;
  }
  CHECK(rows == 1024);
  CHECK(cells == 16 * 1024);

  const Array meas = read_array(a / artifact::kMeasurements);
  CHECK(meas.dims == std::vector<std::size_t>{1024, 4});

  ExperimentConfig other = c;
  other.seed = 2;
  const fs::path d = scratch("sim_d");
  cmd_simulate(other, d);
  CHECK(slurp(a / artifact::kMeasurements) != slurp(d / artifact::kMeasurements));
}

TEST_CASE("empty plan is rejected before anything is written") {
  ExperimentConfig c;
  c.measurements = 0;
  const fs::path dir = scratch("empty");
  CHECK_THROWS_AS(cmd_simulate(c, dir), ConfigError);
  CHECK_FALSE(fs::exists(dir / artifact::kManifest));
}

TEST_CASE("reconstruct and analyze on a run directory") {
  const fs::path dir = scratch("run");
  cmd_simulate(small_config(), dir);
  cmd_reconstruct(dir);
  const std::string first = slurp(dir / artifact::kReconMomentum);
  const std::string first_x = slurp(dir / artifact::kReconPosition);
  cmd_reconstruct(dir, {}, false);
  CHECK(slurp(dir / artifact::kReconMomentum) == first);
  CHECK(slurp(dir / artifact::kReconPosition) == first_x);

  const auto rows = cmd_analyze(dir);
  CHECK(rows.size() == 6);
  std::ifstream csv(dir / artifact::kAnalysis);
  std::string line;
  std::size_t lines = 0;
  std::getline(csv, line);
  CHECK(line.find("h_x_cond[bits]") != std::string::npos);
  while (std::getline(csv, line)) ++lines;
  CHECK(lines == 6);
  CHECK(fs::exists(dir / artifact::kReports));

  CHECK_THROWS_AS(cmd_reconstruct(dir, {"plan.M=5"}), ConfigError);
  const Manifest m = read_manifest(dir);
  CHECK(m.stages == std::vector<std::string>{"simulate", "reconstruct", "analyze"});
  CHECK(m.artifacts.count(artifact::kAnalysis) == 1);
  CHECK(m.artifacts.at(artifact::kPlan) == sha256_file(dir / artifact::kPlan));
}

TEST_CASE("missing artifacts are named") {
  const fs::path dir = scratch("missing");
  cmd_simulate(small_config(), dir);
  fs::remove(dir / artifact::kPlan);
  try {
    cmd_reconstruct(dir);
    FAIL("expected MissingArtifact");
  } catch (const MissingArtifact& e) {
    CHECK(e.path().find(artifact::kPlan) != std::string::npos);
  }
  CHECK_THROWS_AS(cmd_analyze(scratch("nothing")), MissingArtifact);
}

TEST_CASE("noiseless complete measurement") {
  ExperimentConfig c;
  c.measurements = 256;
  c.flux = Flux::exact();
  c.solver.mu = 16384;
  const Simulation sim = simulate(c);
  const Reconstruction r = reconstruct(sim.plan, sim.acquisition.vectors, c.solver);
  const RealMatrix k = sim.truth_momentum.values;
  CHECK(eprcs::testing::relative_error(r.momentum.signal, flat(k)) < 1e-3);
  // Position data carry the momentum-filter disturbance, so the solver can
  // only be asked to be consistent with them.
  double y_norm = 0.0;
  for (double v : sim.acquisition.vectors.y_position) y_norm += v * v;
  CHECK(r.position.final_residual < 1e-2 * std::sqrt(y_norm));
}

TEST_CASE("analysis of exact distributions matches the entropy functions") {
  ExperimentConfig c;
  const Simulation sim = simulate(c);
  const auto rows = analyze(sim.truth_position.values, sim.truth_momentum.values,
                            sim.truth_position, sim.truth_momentum, {0.0}, 1);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].ok);
  CHECK(rows[0].report.h_x_cond == doctest::Approx(conditional_entropy(sim.truth_position)));
  CHECK(rows[0].report.h_k_cond == doctest::Approx(conditional_entropy(sim.truth_momentum)));
  CHECK(rows[0].mse_position == doctest::Approx(0.0).scale(1.0));

  const RealMatrix negative = RealMatrix::Constant(16, 16, -1.0);
  const auto bad = analyze(negative, sim.truth_momentum.values, sim.truth_position,
                           sim.truth_momentum, {0.0, 0.05}, 1);
  CHECK_FALSE(bad[0].ok);
  CHECK(bad[0].status.rfind("all_zero", 0) == 0);
}

TEST_CASE("an all-zero reconstruction is flagged in the csv") {
  const fs::path dir = scratch("allzero");
  cmd_simulate(small_config(), dir);
  cmd_reconstruct(dir);
  write_matrix(dir / artifact::kReconPosition, RealMatrix::Zero(16, 16));
  cmd_analyze(dir, {0.0});
  const std::string csv = slurp(dir / artifact::kAnalysis);
  CHECK(csv.find("nan") != std::string::npos);
  CHECK(csv.find("all_zero") != std::string::npos);
}

TEST_CASE("sweep cells are reproducible standalone") {
  ExperimentConfig c = small_config();
  c.sweep_measurements = {64};
  c.sweep_flux = {2000.0};
  c.sweep_trials = 1;
  const fs::path dir = scratch("sweep");
  const SweepResult s = cmd_sweep(c, dir, 2);
  REQUIRE(s.cells.size() == 1);
  const CellResult& cell = s.cells[0];
  REQUIRE(cell.ok);
  CHECK(cell.seed == cell_seed(c.seed, 64, 2000.0, 0));
  for (const char* f : {"sweep_mse_position.csv", "sweep_mse_momentum.csv",
                        "sweep_violation.csv", "sweep_trials.csv"})
    CHECK_MESSAGE(fs::exists(dir / f), f);

  // The same cell through the run-directory commands.
  ExperimentConfig standalone = c;
  standalone.seed = cell.seed;
  const fs::path run = scratch("sweep_cell");
  cmd_simulate(standalone, run);
  cmd_reconstruct(run);
  const auto rows = cmd_analyze(run);
  REQUIRE(rows.size() == cell.rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].report.h_x_cond == cell.rows[i].report.h_x_cond);
    CHECK(rows[i].report.h_k_cond == cell.rows[i].report.h_k_cond);
  }
  const RealMatrix rk = read_matrix(run / artifact::kReconMomentum);
  const Simulation sim = simulate(standalone);
  CHECK(mse(rk, sim.truth_momentum.values) == cell.mse_momentum);

  const CellResult again = run_cell(c, 64, 2000.0, 0);
  CHECK(again.mse_position == cell.mse_position);

  const SweepResult threaded = run_sweep(c, 1);
  CHECK(threaded.cells[0].mse_momentum == cell.mse_momentum);
}

TEST_CASE("replay reproduces every artifact") {
  const fs::path dir = scratch("replay_src");
  const fs::path out = scratch("replay_out");
  cmd_simulate(small_config(), dir);
  cmd_reconstruct(dir, {"solver.mu=512"});
  cmd_analyze(dir);
  const ReplayResult r = replay(dir, out);
  for (const auto& name : r.mismatches) MESSAGE("mismatch: " << name);
  CHECK(r.identical);
  CHECK(slurp(dir / artifact::kManifest) == slurp(out / artifact::kManifest));

  // Corrupting an artifact is detected.
  write_matrix(dir / artifact::kReconMomentum, RealMatrix::Zero(16, 16));
  CHECK(sha256_file(dir / artifact::kReconMomentum) != read_manifest(dir).artifacts.at(artifact::kReconMomentum));
}
