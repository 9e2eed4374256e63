#include "eprcs/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include "eprcs/errors.hpp"

namespace eprcs {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value,
                            std::string_view expected) {
  throw ConfigError("config key '" + std::string(key) + "': cannot parse '" +
                    std::string(value) + "' as " + std::string(expected));
}

double parse_double(std::string_view key, std::string_view v) {
  v = trim(v);
  if (v == "inf" || v == "infinity") return std::numeric_limits<double>::infinity();
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad_value(key, v, "a number");
  return out;
}

std::uint64_t parse_u64(std::string_view key, std::string_view v) {
  v = trim(v);
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    bad_value(key, v, "a nonnegative integer");
  }
  return out;
}

int parse_int(std::string_view key, std::string_view v) {
  v = trim(v);
  int out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad_value(key, v, "an integer");
  return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
  v = trim(v);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad_value(key, v, "a boolean");
}

template <typename T, typename F>
std::vector<T> parse_list(std::string_view key, std::string_view v, F parse_one) {
  std::vector<T> out;
  v = trim(v);
  if (v.empty()) return out;
  std::size_t start = 0;
  while (start <= v.size()) {
    const auto comma = v.find(',', start);
    const auto item = trim(v.substr(start, comma == std::string_view::npos
                                               ? std::string_view::npos
                                               : comma - start));
    if (item.empty()) bad_value(key, v, "a comma-separated list");
    out.push_back(static_cast<T>(parse_one(key, item)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename T, typename F>
std::string join(const std::vector<T>& items, F format) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ",";
    out += format(items[i]);
  }
  return out;
}

std::string fmt_bool(bool b) { return b ? "true" : "false"; }

struct Field {
  const char* key;
  std::function<void(ExperimentConfig&, std::string_view)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

#define EPRCS_DOUBLE(name, member)                                             \
  Field {                                                                      \
    name, [](ExperimentConfig& c, std::string_view v) {                        \
      c.member = parse_double(name, v);                                        \
    },                                                                         \
        [](const ExperimentConfig& c) { return format_double(c.member); }      \
  }
#define EPRCS_UINT(name, member, type)                                         \
  Field {                                                                      \
    name, [](ExperimentConfig& c, std::string_view v) {                        \
      c.member = static_cast<type>(parse_u64(name, v));                        \
    },                                                                         \
        [](const ExperimentConfig& c) { return std::to_string(c.member); }     \
  }
#define EPRCS_INT(name, member)                                                \
  Field {                                                                      \
    name, [](ExperimentConfig& c, std::string_view v) {                        \
      c.member = parse_int(name, v);                                           \
    },                                                                         \
        [](const ExperimentConfig& c) { return std::to_string(c.member); }     \
  }
#define EPRCS_BOOL(name, member)                                               \
  Field {                                                                      \
    name, [](ExperimentConfig& c, std::string_view v) {                        \
      c.member = parse_bool(name, v);                                          \
    },                                                                         \
        [](const ExperimentConfig& c) { return fmt_bool(c.member); }           \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      EPRCS_DOUBLE("spdc.crystal_length", spdc.crystal_length),
      EPRCS_DOUBLE("spdc.pump_wavelength", spdc.pump_wavelength),
      EPRCS_DOUBLE("spdc.pump_sigma", spdc.pump_sigma),
      EPRCS_UINT("grid.n", n, std::size_t),
      EPRCS_DOUBLE("grid.coverage_sigmas", coverage_sigmas),
      Field{"grid.policy",
            [](ExperimentConfig& c, std::string_view v) {
              v = trim(v);
              if (v == "strict") {
                c.grid_policy = GridPolicy::strict;
              } else if (v == "balanced") {
                c.grid_policy = GridPolicy::balanced;
              } else {
                bad_value("grid.policy", v, "strict|balanced");
              }
            },
            [](const ExperimentConfig& c) {
              return std::string(c.grid_policy == GridPolicy::strict ? "strict"
                                                                     : "balanced");
            }},
      EPRCS_UINT("plan.M", measurements, std::size_t),
      EPRCS_UINT("plan.seed", seed, std::uint64_t),
      EPRCS_BOOL("plan.allow_repeats", allow_repeats),
      EPRCS_DOUBLE("flux.mean", flux.mean),
      EPRCS_DOUBLE("detector.pair_efficiency", detector.pair_efficiency),
      EPRCS_DOUBLE("detector.dark_coincidences", detector.dark_coincidences),
      EPRCS_DOUBLE("solver.mu", solver.mu),
      EPRCS_DOUBLE("solver.beta", solver.beta),
      EPRCS_INT("solver.max_outer_iterations", solver.max_outer_iterations),
      EPRCS_INT("solver.inner_iterations", solver.inner_iterations),
      EPRCS_INT("solver.cg_iterations", solver.cg_iterations),
      EPRCS_DOUBLE("solver.tolerance", solver.relative_change_tolerance),
      EPRCS_BOOL("solver.nonnegativity", solver.nonnegativity),
      EPRCS_BOOL("solver.normalize", solver.normalize),
      Field{"analysis.thresholds",
            [](ExperimentConfig& c, std::string_view v) {
              c.thresholds = parse_list<double>("analysis.thresholds", v, parse_double);
            },
            [](const ExperimentConfig& c) { return join(c.thresholds, format_double); }},
      EPRCS_INT("analysis.dims", dims),
      Field{"sweep.M",
            [](ExperimentConfig& c, std::string_view v) {
              c.sweep_measurements = parse_list<std::size_t>("sweep.M", v, parse_u64);
            },
            [](const ExperimentConfig& c) {
              return join(c.sweep_measurements,
                          [](std::size_t m) { return std::to_string(m); });
            }},
      Field{"sweep.flux",
            [](ExperimentConfig& c, std::string_view v) {
              c.sweep_flux = parse_list<double>("sweep.flux", v, parse_double);
            },
            [](const ExperimentConfig& c) { return join(c.sweep_flux, format_double); }},
      EPRCS_UINT("sweep.trials", sweep_trials, std::size_t),
  };
  return table;
}

#undef EPRCS_DOUBLE
#undef EPRCS_UINT
#undef EPRCS_INT
#undef EPRCS_BOOL

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

}  // namespace

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw std::runtime_error("double formatting failed");
  return std::string(buf, ptr);
}

void ExperimentConfig::validate(bool sweep) const {
  try {
    spdc.validate();
    solver.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  require(is_power_of_two(n), "grid.n must be a power of two");
  require(coverage_sigmas > 0.0, "grid.coverage_sigmas must be positive");
  require(measurements >= 1, "empty plan: plan.M must be at least 1");
  require(allow_repeats || measurements <= n * n,
          "plan.M exceeds n^2 and plan.allow_repeats is false");
  require(flux.is_exact() || (flux.mean >= 0.0 && std::isfinite(flux.mean)),
          "flux.mean must be nonnegative or inf");
  require(detector.pair_efficiency > 0.0 && detector.pair_efficiency <= 1.0,
          "detector.pair_efficiency must lie in (0, 1]");
  require(detector.dark_coincidences >= 0.0,
          "detector.dark_coincidences must be nonnegative");
  require(!thresholds.empty(), "analysis.thresholds must not be empty");
  for (double t : thresholds) {
    require(t >= 0.0 && t < 1.0, "analysis.thresholds entries must lie in [0, 1)");
  }
  require(dims >= 1, "analysis.dims must be positive");
  if (sweep) {
    require(!sweep_measurements.empty(), "sweep.M must not be empty");
    require(!sweep_flux.empty(), "sweep.flux must not be empty");
    require(sweep_trials >= 1, "sweep.trials must be at least 1");
    for (auto m : sweep_measurements) {
      require(m >= 1, "empty plan: sweep.M entries must be at least 1");
      require(allow_repeats || m <= n * n,
              "sweep.M exceeds n^2 and plan.allow_repeats is false");
    }
    for (double f : sweep_flux) {
      require(f == std::numeric_limits<double>::infinity() ||
                  (f >= 0.0 && std::isfinite(f)),
              "sweep.flux entries must be nonnegative or inf");
    }
  }
}

void set_value(ExperimentConfig& config, std::string_view key,
               std::string_view value) {
  key = trim(key);
  for (const auto& f : fields()) {
    if (key == f.key) {
      f.set(config, value);
      return;
    }
  }
  throw ConfigError("unknown config key '" + std::string(key) + "'");
}

void apply_override(ExperimentConfig& config, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) {
    throw ConfigError("override '" + std::string(assignment) +
                      "' is not of the form key=value");
  }
  set_value(config, assignment.substr(0, eq), assignment.substr(eq + 1));
}

ExperimentConfig parse_config(std::istream& is, ExperimentConfig base) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::string_view v = line;
    if (const auto hash = v.find('#'); hash != std::string_view::npos) {
      v = v.substr(0, hash);
    }
    v = trim(v);
    if (v.empty()) continue;
    if (v.find('=') == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": expected key = value");
    }
    apply_override(base, v);
  }
  return base;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw MissingArtifact(path.string());
  return parse_config(is);
}

std::string to_text(const ExperimentConfig& config) {
  std::ostringstream os;
  for (const auto& f : fields()) os << f.key << " = " << f.get(config) << "\n";
  return os.str();
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& f : fields()) keys.emplace_back(f.key);
  return keys;
}

GridSpec make_grid(const ExperimentConfig& config) {
  return config.grid_policy == GridPolicy::strict
             ? choose_grid(config.spdc, config.n, config.coverage_sigmas)
             : balanced_grid(config.spdc, config.n);
}

}  // namespace eprcs
