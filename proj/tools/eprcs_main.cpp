// eprcs: simulate, reconstruct, analyze, sweep and replay compressive EPR
// characterization runs.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "eprcs/config.hpp"
#include "eprcs/errors.hpp"
#include "eprcs/experiment.hpp"

namespace fs = std::filesystem;
using namespace eprcs;

namespace {

struct GlobalOptions {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  bool verbose = false;
  std::vector<std::string> overrides;
};

ExperimentConfig resolve_config(const GlobalOptions& g) {
  ExperimentConfig config = g.config_path.empty() ? ExperimentConfig{}
                                                  : load_config(g.config_path);
  for (const auto& o : g.overrides) apply_override(config, o);
  if (g.seed) config.seed = *g.seed;
  return config;
}

fs::path require_out(const GlobalOptions& g, const char* command) {
  if (g.out_dir.empty()) {
    throw ConfigError(std::string(command) + " needs --out DIR");
  }
  return g.out_dir;
}

void print_rows(const std::vector<AnalysisRow>& rows) {
  std::cout << "threshold  H(X1|X2)  H(K1|K2)  bound  violation  I_x  I_k  status\n";
  for (const auto& r : rows) {
    std::cout << r.threshold << "  ";
    if (r.ok) {
      std::cout << r.report.h_x_cond << "  " << r.report.h_k_cond << "  "
                << r.report.bound << "  " << r.report.violation << "  "
                << r.mi_position << "  " << r.mi_momentum << "  "
                << (r.report.entangled ? "entangled" : "not-entangled")
                << (r.report.vacuous ? " (vacuous bound)" : "") << "\n";
    } else {
      std::cout << r.status << "\n";
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Compressive characterization of simulated EPR biphoton states"};
  app.require_subcommand(1);

  GlobalOptions g;
  app.add_option("--config", g.config_path, "Config file (key = value lines)");
  app.add_option("--out", g.out_dir, "Output run or sweep directory");
  app.add_option("--seed", g.seed, "Master seed (overrides plan.seed)");
  app.add_option("--threads", g.threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_flag("--verbose", g.verbose, "Stream progress and solver diagnostics to stderr");
  app.add_option("--set", g.overrides, "Override a config key, e.g. --set plan.M=512")
      ->take_all();

  auto* simulate = app.add_subcommand("simulate", "Build state, plan and measurements");

  std::string run_dir;
  auto* reconstruct = app.add_subcommand("reconstruct", "Run both TV reconstructions");
  reconstruct->add_option("run_dir", run_dir, "Run directory")->required();

  std::string analyze_dir;
  std::vector<double> thresholds;
  auto* analyze = app.add_subcommand("analyze", "Steering witness and entropies");
  analyze->add_option("run_dir", analyze_dir, "Run directory")->required();
  analyze->add_option("--thresholds", thresholds, "Threshold fractions")->delimiter(',');

  auto* sweep = app.add_subcommand("sweep", "Grid of (M, flux) cells with trials");

  std::string replay_dir;
  auto* replay_cmd = app.add_subcommand("replay", "Re-execute a run from its manifest");
  replay_cmd->add_option("run_dir", replay_dir, "Run directory to replay")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  std::ostream* log = g.verbose ? &std::cerr : nullptr;
  try {
    if (*simulate) {
      const ExperimentConfig config = resolve_config(g);
      const fs::path out = require_out(g, "simulate");
      const std::string id = cmd_simulate(config, out, log);
      std::cout << "run " << id << " written to " << out.string() << "\n";
    } else if (*reconstruct) {
      if (!g.config_path.empty()) {
        throw ConfigError("reconstruct reads the run's config; use --set solver.KEY=VALUE");
      }
      cmd_reconstruct(run_dir, g.overrides, g.threads > 1, log);
      std::cout << "reconstructions written to " << run_dir << "\n";
    } else if (*analyze) {
      print_rows(cmd_analyze(analyze_dir, thresholds));
    } else if (*sweep) {
      ExperimentConfig config = resolve_config(g);
      const fs::path out = require_out(g, "sweep");
      const SweepResult r = cmd_sweep(config, out, g.threads, log);
      std::size_t failed = 0;
      for (const auto& c : r.cells) failed += c.ok ? 0 : 1;
      std::cout << r.cells.size() << " cells (" << failed << " failed) written to "
                << out.string() << "\n";
    } else if (*replay_cmd) {
      const fs::path out = require_out(g, "replay");
      const ReplayResult r = replay(replay_dir, out);
      if (r.identical) {
        std::cout << "replay identical\n";
        return kExitOk;
      }
      std::cout << "replay differs:";
      for (const auto& m : r.mismatches) std::cout << " " << m;
      std::cout << "\n";
      return kExitFailure;
    }
  } catch (const std::exception& e) {
    std::cerr << "eprcs: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return kExitOk;
}
