#include "eprcs/experiment.hpp"

#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <future>
#include <iomanip>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "eprcs/array_io.hpp"
#include "eprcs/checksum.hpp"
#include "eprcs/errors.hpp"
#include "eprcs/photon_sim.hpp"
#include "eprcs/rng.hpp"

namespace fs = std::filesystem;

namespace eprcs {

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const InfeasibleGrid*>(&e) ||
      dynamic_cast<const BadOrder*>(&e) || dynamic_cast<const TooManyRows*>(&e) ||
      dynamic_cast<const std::invalid_argument*>(&e)) {
    return kExitConfig;
  }
  if (dynamic_cast<const MissingArtifact*>(&e)) return kExitMissingArtifact;
  if (dynamic_cast<const SolverDiverged*>(&e)) return kExitDiverged;
  return kExitFailure;
}

StageSeeds stage_seeds(std::uint64_t master) {
  return {master, derive_seed(master, {tag(Stream::plan)}),
          derive_seed(master, {tag(Stream::acquisition)})};
}

std::uint64_t cell_seed(std::uint64_t master, std::size_t measurements,
                        double flux, std::size_t trial) {
  return derive_seed(master, {tag(Stream::sweep), measurements,
                              std::bit_cast<std::uint64_t>(flux), trial});
}

Simulation simulate(const ExperimentConfig& config) {
  config.validate();
  const GridSpec grid = make_grid(config);
  BiphotonAmplitude state = build_state(config.spdc, grid);
  const StageSeeds seeds = stage_seeds(config.seed);
  SensingPlan plan = plan_sensing(config.n, config.measurements, seeds.plan,
                                  config.row_policy());
  Acquisition acq = run_acquisition(state, plan, config.flux, seeds.acquisition,
                                    config.detector);
  JointDistribution tx = position_joint(state);
  JointDistribution tk = momentum_joint(state);
  return {grid, std::move(state), std::move(tx), std::move(tk), std::move(plan),
          std::move(acq)};
}

namespace {

ReconstructionResult solve_domain(const SensingPlan& plan,
                                  const MeasurementVectors& v,
                                  const std::vector<std::size_t>& keep, Domain d,
                                  const SolverConfig& solver, std::ostream* log) {
  const SensingOperator op(plan, d, keep);
  const std::vector<double> y = v.compact(d);
  return tv_min(y, op, plan.n(), plan.n(), solver, log);
}

}  // namespace

Reconstruction reconstruct(const SensingPlan& plan,
                           const MeasurementVectors& vectors,
                           const SolverConfig& solver, bool concurrent,
                           std::ostream* log) {
  if (vectors.size() != plan.measurements()) {
    throw ShapeMismatch("measurement count does not match the plan");
  }
  const std::vector<std::size_t> keep = vectors.valid_rows();
  if (keep.empty()) throw EmptyRecord("no valid measurements to reconstruct from");

  std::ostringstream log_x;
  std::ostringstream log_k;
  std::ostream* lx = log ? &log_x : nullptr;
  std::ostream* lk = log ? &log_k : nullptr;
  Reconstruction out;
  out.rows_used = keep.size();
  if (concurrent) {
    auto fx = std::async(std::launch::async, [&] {
      return solve_domain(plan, vectors, keep, Domain::position, solver, lx);
    });
    out.momentum = solve_domain(plan, vectors, keep, Domain::momentum, solver, lk);
    out.position = fx.get();
  } else {
    out.position = solve_domain(plan, vectors, keep, Domain::position, solver, lx);
    out.momentum = solve_domain(plan, vectors, keep, Domain::momentum, solver, lk);
  }
  if (log) {
    std::istringstream px(log_x.str());
    std::istringstream pk(log_k.str());
    std::string line;
    while (std::getline(px, line)) *log << "solver position " << line << "\n";
    while (std::getline(pk, line)) *log << "solver momentum " << line << "\n";
  }
  return out;
}

RealMatrix as_matrix(const ReconstructionResult& r) {
  RealMatrix m(static_cast<Eigen::Index>(r.rows), static_cast<Eigen::Index>(r.cols));
  std::copy(r.signal.begin(), r.signal.end(), m.data());
  return m;
}

std::vector<AnalysisRow> analyze(const RealMatrix& recon_position,
                                 const RealMatrix& recon_momentum,
                                 const JointDistribution& truth_position,
                                 const JointDistribution& truth_momentum,
                                 const std::vector<double>& thresholds, int dims) {
  std::vector<AnalysisRow> rows;
  rows.reserve(thresholds.size());
  for (double t : thresholds) {
    AnalysisRow row;
    row.threshold = t;
    try {
      const JointDistribution px = threshold_normalize(
          recon_position, t, truth_position.grid, Domain::position);
      const JointDistribution pk = threshold_normalize(
          recon_momentum, t, truth_momentum.grid, Domain::momentum);
      row.report = steering_witness(px, pk, dims);
      row.mi_position = mutual_information(px);
      row.mi_momentum = mutual_information(pk);
      row.mse_position = mse(px.values, truth_position.values);
      row.mse_momentum = mse(pk.values, truth_momentum.values);
      row.ok = true;
      row.status = "ok";
    } catch (const AllZero& e) {
      row.status = std::string("all_zero: ") + e.what();
    }
    rows.push_back(row);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Run directories

namespace {

// Shortest round-trip text for CSV cells.
std::string num(double v) { return std::isnan(v) ? "nan" : format_double(v); }

std::string timestamp_now() {
  const std::time_t t =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string run_id_for(const std::string& config_text) {
  return sha256_hex(config_text).substr(0, 16);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << text;
}

void require_file(const fs::path& path) {
  if (!fs::is_regular_file(path)) throw MissingArtifact(path.string());
}

void write_manifest(const fs::path& run_dir, const Manifest& m) {
  std::ostringstream os;
  os << "eprcs-manifest 1\n"
     << "run_id = " << m.run_id << "\n"
     << "timestamp = " << m.timestamp << "\n"
     << "seed.master = " << m.seeds.master << "\n"
     << "seed.plan = " << m.seeds.plan << "\n"
     << "seed.acquisition = " << m.seeds.acquisition << "\n"
     << "stages = ";
  for (std::size_t i = 0; i < m.stages.size(); ++i) {
    os << (i ? "," : "") << m.stages[i];
  }
  os << "\n[config]\n" << m.config_text << "[artifacts]\n";
  for (const auto& [name, digest] : m.artifacts) os << digest << "  " << name << "\n";
  write_text(run_dir / artifact::kManifest, os.str());
}

void record(Manifest& m, const fs::path& run_dir, const char* name) {
  m.artifacts[name] = sha256_file(run_dir / name);
}

void add_stage(Manifest& m, const std::string& stage) {
  if (std::find(m.stages.begin(), m.stages.end(), stage) == m.stages.end()) {
    m.stages.push_back(stage);
  }
}

// Rewrites config.txt after a stage changed it and keeps the manifest in step.
void update_config(const fs::path& run_dir, Manifest& m,
                   const ExperimentConfig& config) {
  m.config_text = to_text(config);
  write_text(run_dir / artifact::kConfig, m.config_text);
  record(m, run_dir, artifact::kConfig);
}

void write_records(const fs::path& path, const Acquisition& acq) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << "# coincidence counts per filter set; cell x<P>_k<Q> holds position combo P "
        "and momentum combo Q (signal port first, T=transmit R=reject)\n";
  os << "index,valid,total[counts]";
  for (const char* xp : kComboNames) {
    for (const char* kq : kComboNames) os << ",x" << xp << "_k" << kq << "[counts]";
  }
  os << "\n";
  for (std::size_t i = 0; i < acq.records.size(); ++i) {
    const auto& r = acq.records[i];
    os << i << "," << int(acq.vectors.valid[i]) << "," << r.total();
    for (const auto& row : r.counts) {
      for (auto c : row) os << "," << c;
    }
    os << "\n";
  }
}

void write_measurements(const fs::path& path, const MeasurementVectors& v) {
  const std::size_t m = v.size();
  std::vector<double> data(4 * m);
  for (std::size_t i = 0; i < m; ++i) {
    data[4 * i] = v.y_momentum[i];
    data[4 * i + 1] = v.y_position[i];
    data[4 * i + 2] = static_cast<double>(v.totals[i]);
    data[4 * i + 3] = v.valid[i];
  }
  const std::array<std::size_t, 2> dims = {m, 4};
  write_array(path, dims, data);
}

MeasurementVectors read_measurements(const fs::path& path) {
  const Array a = read_array(path);
  if (a.dims.size() != 2 || a.dims[1] != 4) {
    throw ShapeMismatch(path.string() + " does not hold an M x 4 array");
  }
  MeasurementVectors v;
  const std::size_t m = a.dims[0];
  for (std::size_t i = 0; i < m; ++i) {
    v.y_momentum.push_back(a.data[4 * i]);
    v.y_position.push_back(a.data[4 * i + 1]);
    v.totals.push_back(static_cast<std::uint64_t>(a.data[4 * i + 2]));
    v.valid.push_back(static_cast<std::uint8_t>(a.data[4 * i + 3] != 0.0));
  }
  return v;
}

void write_state(const fs::path& path, const BiphotonAmplitude& state) {
  const std::size_t n = state.grid.n;
  std::vector<double> data(2 * n * n);
  for (std::size_t k = 0; k < n * n; ++k) {
    data[2 * k] = state.values.data()[k].real();
    data[2 * k + 1] = state.values.data()[k].imag();
  }
  const std::array<std::size_t, 3> dims = {n, n, 2};
  write_array(path, dims, data);
}

SensingPlan read_plan_file(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw MissingArtifact(path.string());
  return read_plan(is);
}

std::string simulate_into(const ExperimentConfig& config, const fs::path& run_dir,
                          const std::string& run_id, const std::string& timestamp,
                          std::ostream* log) {
  const Simulation sim = simulate(config);
  fs::create_directories(run_dir);

  Manifest m;
  m.config_text = to_text(config);
  m.run_id = run_id.empty() ? run_id_for(m.config_text) : run_id;
  m.timestamp = timestamp.empty() ? timestamp_now() : timestamp;
  m.seeds = stage_seeds(config.seed);
  m.stages = {"simulate"};

  write_text(run_dir / artifact::kConfig, m.config_text);
  {
    std::ofstream os(run_dir / artifact::kPlan, std::ios::trunc);
    write_plan(os, sim.plan);
  }
  write_state(run_dir / artifact::kState, sim.state);
  write_matrix(run_dir / artifact::kTruthPosition, sim.truth_position.values);
  write_matrix(run_dir / artifact::kTruthMomentum, sim.truth_momentum.values);
  write_measurements(run_dir / artifact::kMeasurements, sim.acquisition.vectors);
  for (const char* name : {artifact::kConfig, artifact::kPlan, artifact::kState,
                           artifact::kTruthPosition, artifact::kTruthMomentum,
                           artifact::kMeasurements}) {
    record(m, run_dir, name);
  }
  if (!config.flux.is_exact()) {
    write_records(run_dir / artifact::kRecords, sim.acquisition);
    record(m, run_dir, artifact::kRecords);
  }
  write_manifest(run_dir, m);
  if (log) {
    *log << "simulate run_id=" << m.run_id << " n=" << config.n
         << " M=" << config.measurements << " flux=" << format_double(config.flux.mean)
         << " dx=" << sim.grid.dx << " dk=" << sim.grid.dk
         << " missing_rows=" << sim.acquisition.vectors.missing() << "\n";
  }
  return m.run_id;
}

Manifest parse_manifest(std::istream& is, const std::string& source) {
  std::string line;
  if (!std::getline(is, line) || line != "eprcs-manifest 1") {
    throw std::runtime_error(source + " is not a manifest");
  }
  Manifest m;
  enum { header, config, artifacts } section = header;
  auto value_of = [](const std::string& l) {
    const auto eq = l.find(" = ");
    return eq == std::string::npos ? std::string() : l.substr(eq + 3);
  };
  while (std::getline(is, line)) {
    if (line == "[config]") {
      section = config;
    } else if (line == "[artifacts]") {
      section = artifacts;
    } else if (section == config) {
      m.config_text += line + "\n";
    } else if (section == artifacts) {
      const auto sep = line.find("  ");
      if (sep != std::string::npos) m.artifacts[line.substr(sep + 2)] = line.substr(0, sep);
    } else if (line.rfind("run_id", 0) == 0) {
      m.run_id = value_of(line);
    } else if (line.rfind("timestamp", 0) == 0) {
      m.timestamp = value_of(line);
    } else if (line.rfind("seed.master", 0) == 0) {
      m.seeds.master = std::stoull(value_of(line));
    } else if (line.rfind("seed.plan", 0) == 0) {
      m.seeds.plan = std::stoull(value_of(line));
    } else if (line.rfind("seed.acquisition", 0) == 0) {
      m.seeds.acquisition = std::stoull(value_of(line));
    } else if (line.rfind("stages", 0) == 0) {
      std::istringstream ss(value_of(line));
      std::string s;
      while (std::getline(ss, s, ',')) {
        if (!s.empty()) m.stages.push_back(s);
      }
    }
  }
  return m;
}

}  // namespace

Manifest read_manifest(const fs::path& run_dir) {
  const fs::path path = run_dir / artifact::kManifest;
  std::ifstream is(path);
  if (!is) throw MissingArtifact(path.string());
  return parse_manifest(is, path.string());
}

std::string cmd_simulate(const ExperimentConfig& config, const fs::path& run_dir,
                         std::ostream* log) {
  return simulate_into(config, run_dir, {}, {}, log);
}

void cmd_reconstruct(const fs::path& run_dir, const std::vector<std::string>& overrides,
                     bool concurrent, std::ostream* log) {
  Manifest m = read_manifest(run_dir);
  ExperimentConfig config = load_config(run_dir / artifact::kConfig);
  for (const auto& o : overrides) {
    if (o.rfind("solver.", 0) != 0) {
      throw ConfigError("reconstruct accepts solver.* overrides only, got '" + o + "'");
    }
    apply_override(config, o);
  }
  config.validate();
  const SensingPlan plan = read_plan_file(run_dir / artifact::kPlan);
  const MeasurementVectors v = read_measurements(run_dir / artifact::kMeasurements);
  const RealMatrix tx = read_matrix(run_dir / artifact::kTruthPosition);
  const RealMatrix tk = read_matrix(run_dir / artifact::kTruthMomentum);

  Reconstruction r;
  try {
    r = reconstruct(plan, v, config.solver, concurrent, log);
  } catch (const SolverDiverged& e) {
    std::string solver_keys;
    std::istringstream ss(to_text(config));
    std::string line;
    while (std::getline(ss, line)) {
      if (line.rfind("solver.", 0) == 0) solver_keys += "  " + line + "\n";
    }
    throw SolverDiverged(std::string(e.what()) + "\nsolver config:\n" + solver_keys);
  }

  const RealMatrix rx = as_matrix(r.position);
  const RealMatrix rk = as_matrix(r.momentum);
  write_matrix(run_dir / artifact::kReconPosition, rx);
  write_matrix(run_dir / artifact::kReconMomentum, rk);
  std::ostringstream os;
  os << std::setprecision(17);
  os << "rows_used = " << r.rows_used << "\n";
  for (const auto& [name, res, truth] :
       {std::tuple{"position", &r.position, &tx}, std::tuple{"momentum", &r.momentum, &tk}}) {
    os << "[" << name << "]\n"
       << "iterations = " << res->iterations << "\n"
       << "converged = " << (res->converged ? "true" : "false") << "\n"
       << "final_residual = " << res->final_residual << "\n"
       << "final_tv = " << res->final_tv << "\n"
       << "mse_vs_truth = " << mse(as_matrix(*res), *truth) << "\n";
  }
  write_text(run_dir / artifact::kReconstruction, os.str());

  update_config(run_dir, m, config);
  for (const char* name : {artifact::kReconPosition, artifact::kReconMomentum,
                           artifact::kReconstruction}) {
    record(m, run_dir, name);
  }
  add_stage(m, "reconstruct");
  write_manifest(run_dir, m);
}

std::vector<AnalysisRow> cmd_analyze(const fs::path& run_dir,
                                     const std::vector<double>& thresholds) {
  Manifest m = read_manifest(run_dir);
  ExperimentConfig config = load_config(run_dir / artifact::kConfig);
  if (!thresholds.empty()) config.thresholds = thresholds;
  config.validate();
  require_file(run_dir / artifact::kReconPosition);
  require_file(run_dir / artifact::kReconMomentum);
  const GridSpec grid = make_grid(config);
  const RealMatrix rx = read_matrix(run_dir / artifact::kReconPosition);
  const RealMatrix rk = read_matrix(run_dir / artifact::kReconMomentum);
  const JointDistribution tx = JointDistribution::from_weights(
      read_matrix(run_dir / artifact::kTruthPosition), grid, Domain::position);
  const JointDistribution tk = JointDistribution::from_weights(
      read_matrix(run_dir / artifact::kTruthMomentum), grid, Domain::momentum);

  const auto rows = analyze(rx, rk, tx, tk, config.thresholds, config.dims);

  std::ofstream csv(run_dir / artifact::kAnalysis, std::ios::trunc);
  csv << "threshold[fraction],h_x_cond[bits],h_k_cond[bits],bound[bits],"
         "violation[bits],I_x[bits],I_k[bits],mse_x[prob^2],mse_k[prob^2],status\n";
  std::ostringstream reports;
  reports << std::setprecision(17);
  for (const auto& row : rows) {
    csv << num(row.threshold) << ",";
    if (row.ok) {
      csv << num(row.report.h_x_cond) << "," << num(row.report.h_k_cond) << ","
          << num(row.report.bound) << "," << num(row.report.violation) << ","
          << num(row.mi_position) << "," << num(row.mi_momentum) << ","
          << num(row.mse_position) << "," << num(row.mse_momentum) << ",ok\n";
      write_report(reports, row.report,
                   {m.run_id, config.measurements, config.flux.mean, row.threshold});
    } else {
      csv << "nan,nan,nan,nan,nan,nan,nan,nan,\"" << row.status << "\"\n";
      reports << "[steering]\nrun_id = " << m.run_id
              << "\nthreshold = " << row.threshold << "\nstatus = " << row.status
              << "\n";
    }
  }
  csv.close();
  write_text(run_dir / artifact::kReports, reports.str());

  update_config(run_dir, m, config);
  record(m, run_dir, artifact::kAnalysis);
  record(m, run_dir, artifact::kReports);
  add_stage(m, "analyze");
  write_manifest(run_dir, m);
  return rows;
}

ReplayResult replay(const fs::path& run_dir, const fs::path& out_dir) {
  const Manifest m = read_manifest(run_dir);
  std::istringstream cs(m.config_text);
  const ExperimentConfig config = parse_config(cs);
  fs::create_directories(out_dir);
  simulate_into(config, out_dir, m.run_id, m.timestamp, nullptr);
  const auto has = [&](const char* stage) {
    return std::find(m.stages.begin(), m.stages.end(), stage) != m.stages.end();
  };
  if (has("reconstruct")) cmd_reconstruct(out_dir, {}, true, nullptr);
  if (has("analyze")) cmd_analyze(out_dir);

  ReplayResult result;
  for (const auto& [name, digest] : m.artifacts) {
    const fs::path p = out_dir / name;
    if (!fs::exists(p) || sha256_file(p) != digest) {
      result.identical = false;
      result.mismatches.push_back(name);
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Sweeps

CellResult run_cell(const ExperimentConfig& base, std::size_t measurements,
                    double flux, std::size_t trial) {
  CellResult cell;
  cell.measurements = measurements;
  cell.flux = flux;
  cell.trial = trial;
  cell.seed = cell_seed(base.seed, measurements, flux, trial);
  ExperimentConfig config = base;
  config.measurements = measurements;
  config.flux = Flux{flux};
  config.seed = cell.seed;
  try {
    const Simulation sim = simulate(config);
    cell.missing_rows = sim.acquisition.vectors.missing();
    const Reconstruction r =
        reconstruct(sim.plan, sim.acquisition.vectors, config.solver, false);
    const RealMatrix rx = as_matrix(r.position);
    const RealMatrix rk = as_matrix(r.momentum);
    cell.mse_position = mse(rx, sim.truth_position.values);
    cell.mse_momentum = mse(rk, sim.truth_momentum.values);
    cell.rows = analyze(rx, rk, sim.truth_position, sim.truth_momentum,
                        config.thresholds, config.dims);
    cell.ok = true;
  } catch (const std::exception& e) {
    cell.error = e.what();
  }
  return cell;
}

SweepResult run_sweep(const ExperimentConfig& config, unsigned threads,
                      std::ostream* log) {
  config.validate(true);
  struct Job {
    std::size_t m;
    double flux;
    std::size_t trial;
  };
  std::vector<Job> jobs;
  for (auto m : config.sweep_measurements) {
    for (double f : config.sweep_flux) {
      for (std::size_t t = 0; t < config.sweep_trials; ++t) jobs.push_back({m, f, t});
    }
  }
  SweepResult result;
  result.cells.resize(jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      result.cells[i] = run_cell(config, jobs[i].m, jobs[i].flux, jobs[i].trial);
      if (log) {
        const std::lock_guard lock(log_mutex);
        const auto& c = result.cells[i];
        *log << "cell M=" << c.measurements << " flux=" << format_double(c.flux)
             << " trial=" << c.trial << " "
             << (c.ok ? "ok mse_x=" + format_double(c.mse_position) +
                            " mse_k=" + format_double(c.mse_momentum)
                      : "failed: " + c.error)
             << "\n";
      }
    }
  };
  const unsigned n_workers = std::max(1u, std::min<unsigned>(
                                              threads, static_cast<unsigned>(jobs.size())));
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < n_workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return result;
}

namespace {

struct Stats {
  std::size_t count = 0;
  double mean = std::numeric_limits<double>::quiet_NaN();
  double stddev = std::numeric_limits<double>::quiet_NaN();
};

Stats stats(const std::vector<double>& v) {
  Stats s;
  s.count = v.size();
  if (v.empty()) return s;
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - s.mean) * (x - s.mean);
  s.stddev = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
  return s;
}

}  // namespace

void write_sweep(const fs::path& dir, const ExperimentConfig& config,
                 const SweepResult& result) {
  fs::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream os(dir / name, std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + (dir / name).string());
    return os;
  };
  auto cells_at = [&](std::size_t m, double f) {
    std::vector<const CellResult*> out;
    for (const auto& c : result.cells) {
      if (c.measurements == m && c.flux == f) out.push_back(&c);
    }
    return out;
  };

  for (const auto& [name, domain] : {std::pair{"sweep_mse_position.csv", Domain::position},
                                     std::pair{"sweep_mse_momentum.csv", Domain::momentum}}) {
    auto os = open(name);
    os << "M[rows],flux[counts/set],trials_ok,mean_mse[prob^2],std_mse[prob^2]\n";
    for (auto m : config.sweep_measurements) {
      for (double f : config.sweep_flux) {
        std::vector<double> v;
        for (const auto* c : cells_at(m, f)) {
          if (c->ok) v.push_back(domain == Domain::position ? c->mse_position : c->mse_momentum);
        }
        const Stats s = stats(v);
        os << m << "," << num(f) << "," << s.count << "," << num(s.mean) << ","
           << num(s.stddev) << "\n";
      }
    }
  }

  {
    auto os = open("sweep_violation.csv");
    os << "M[rows],flux[counts/set],threshold[fraction],trials_ok,"
          "mean_violation[bits],std_violation[bits],mean_entropy_sum[bits],bound[bits]\n";
    for (auto m : config.sweep_measurements) {
      for (double f : config.sweep_flux) {
        for (std::size_t ti = 0; ti < config.thresholds.size(); ++ti) {
          std::vector<double> viol;
          std::vector<double> hsum;
          double bound = std::numeric_limits<double>::quiet_NaN();
          for (const auto* c : cells_at(m, f)) {
            if (!c->ok || !c->rows[ti].ok) continue;
            const auto& r = c->rows[ti].report;
            viol.push_back(r.violation);
            hsum.push_back(r.h_x_cond + r.h_k_cond);
            bound = r.bound;
          }
          const Stats sv = stats(viol);
          const Stats sh = stats(hsum);
          os << m << "," << num(f) << "," << num(config.thresholds[ti]) << ","
             << sv.count << "," << num(sv.mean) << "," << num(sv.stddev) << ","
             << num(sh.mean) << "," << num(bound) << "\n";
        }
      }
    }
  }

  {
    auto os = open("sweep_trials.csv");
    os << "M[rows],flux[counts/set],trial,seed,missing_rows,raw_mse_x[prob^2],"
          "raw_mse_k[prob^2],threshold[fraction],h_x_cond[bits],h_k_cond[bits],"
          "violation[bits],I_x[bits],I_k[bits],mse_x[prob^2],mse_k[prob^2],status\n";
    for (const auto& c : result.cells) {
      const std::string head = std::to_string(c.measurements) + "," +
                               num(c.flux) + "," + std::to_string(c.trial) +
                               "," + std::to_string(c.seed);
      if (!c.ok) {
        os << head << ",,nan,nan,nan,nan,nan,nan,nan,nan,nan,nan,\"failed: " << c.error
           << "\"\n";
        continue;
      }
      for (const auto& r : c.rows) {
        os << head << "," << c.missing_rows << "," << num(c.mse_position) << ","
           << num(c.mse_momentum) << "," << num(r.threshold) << ",";
        if (r.ok) {
          os << num(r.report.h_x_cond) << "," << num(r.report.h_k_cond) << ","
             << num(r.report.violation) << "," << num(r.mi_position) << ","
             << num(r.mi_momentum) << "," << num(r.mse_position) << ","
             << num(r.mse_momentum) << ",ok\n";
        } else {
          os << "nan,nan,nan,nan,nan,nan,nan,\"" << r.status << "\"\n";
        }
      }
    }
  }
}

SweepResult cmd_sweep(const ExperimentConfig& config, const fs::path& out_dir,
                      unsigned threads, std::ostream* log) {
  SweepResult result = run_sweep(config, threads, log);
  write_sweep(out_dir, config, result);
  write_text(out_dir / artifact::kConfig, to_text(config));
  return result;
}

}  // namespace eprcs
