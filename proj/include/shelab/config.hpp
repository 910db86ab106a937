#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "shelab/domain_grid.hpp"
#include "shelab/drift.hpp"
#include "shelab/solver.hpp"

namespace shelab {

inline constexpr const char* kArtifactVersion = "1.0.0";

/// Malformed or invalid configuration; `line` is 1-based, 0 when unknown.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// One experiment. Keys are dotted (grid.n_space, drift.form, ...); see
/// config_keys() for the full list with defaults.
struct ExperimentConfig {
  std::string experiment = "simulate";

  DomainSetup setup;
  int n_space = 64;
  int n_time = 256;
  double horizon = 1.0;
  int resolutions = 3;  // joint (dt, dx) halvings, coarsest first

  SchemeKind scheme = SchemeKind::SplittingExact;
  SchemeKind compare_scheme = SchemeKind::SemiImplicit;
  std::string uniqueness_mode = "schemes";  // or "ladder"

  DriftSpec drift;
  double drift_p = std::numeric_limits<double>::infinity();  // integrability used for κ theory
  double drift_level = 0.0;                                  // 0: tied to the grid
  std::vector<double> mollification_levels{8, 16, 32, 64};

  double u0 = 0.0;
  int realizations = 16;
  std::uint64_t seed = 1;

  double probe_s_min = 1.0 / 16.0;
  int probe_x_stride = 4;
  int probe_t_stride = 4;

  double kappa_moment = 2.0;
  std::vector<int> kappa_lags{3, 4, 5, 6, 7, 8};

  double sewing_gamma = -1.0;
  double sewing_s = 0.5;
  double sewing_T = 1.0;
  std::vector<int> sewing_lags{2, 3, 4, 5, 6, 7};

  double besov_beta = -1.0;
  double besov_radius = 8.0;

  int weak_tests = 16;

  std::string out_dir = ".";
  std::string format = "csv";
  bool dump_fields = false;

  SchemeSpec scheme_spec() const;
  /// Drift used to advance paths: the drift mollified at the configured
  /// level, or at the grid level when drift.level is 0.
  DriftFn path_drift(const Grid1D& grid, const TimeGrid& tgrid) const;
  double path_level(const Grid1D& grid, const TimeGrid& tgrid) const;
};

struct ConfigKey {
  std::string key;
  std::string help;
};
const std::vector<ConfigKey>& config_keys();

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
/// Canonical text: every key in config_keys() order, doubles with 17 digits.
std::string serialize_config(const ExperimentConfig& cfg);
/// SHA-256 of the canonical text, hex.
std::string config_hash(const ExperimentConfig& cfg);

/// Violations of every module's slice of the config; empty when valid.
std::vector<std::string> config_violations(const ExperimentConfig& cfg);

/// Derived quantities listed by `validate`.
struct DerivedQuantity {
  std::string name;
  std::string value;
};
std::vector<DerivedQuantity> derived_quantities(const ExperimentConfig& cfg);

}  // namespace shelab
