// analysis.hpp: configuration, single runs, trade-off sweeps, report export and
// the invariant suite behind the command-line tool.
#pragma once

#include "pdcf/basis_opt.hpp"
#include "pdcf/covariance.hpp"
#include "pdcf/filtering.hpp"
#include "pdcf/global_opt.hpp"
#include "pdcf/metrics.hpp"
#include "pdcf/spectral.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace pdcf {

inline constexpr const char* kVersion = "0.1.0";

enum class BasisMethod { schmidt, svd, ga };

std::string to_string(BasisMethod method);
BasisMethod basis_method_from_string(const std::string& name);

struct RunConfig {
  GaussianJsaParams jsa;
  int n_points = kDefaultGridPoints;
  double omega_min = kDefaultOmegaMin;
  double omega_max = kDefaultOmegaMax;
  int n_retained = kDefaultRetainedModes;
  int n_modes = 5;

  FilterKind filter_kind = FilterKind::rectangular;
  double filter_center = 0.0;
  double filter_width = 4.0;      // rectangular full width or Gaussian FWHM
  double filter_amplitude = 1.0;  // flat filters only
  std::vector<double> sweep_widths{1, 2, 3, 4, 6, 8, 12, 20, 40};
  std::vector<double> sweep_target_db{2, 4, 6};

  std::optional<double> gain_B;  // overrides target_first_mode_db when set
  double target_first_mode_db = 6.0;

  BasisMethod basis = BasisMethod::svd;
  GaParams ga;
  int threads = 1;
  std::filesystem::path out = "out";

  void validate() const;  // throws ConfigError
};

// key = value lines, '#' comments, lists comma-separated. Unknown keys and
// malformed values are configuration errors.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);
std::string config_to_text(const RunConfig& config);

FrequencyGrid config_grid(const RunConfig& config);
Filter config_filter(const RunConfig& config, const FrequencyGrid& grid, double width);

struct RunReport {
  RunConfig config;
  double gain_B = 0.0;
  SchmidtData schmidt;
  std::optional<EffectiveSchmidt> effective;
  std::optional<OptimizedBasis> optimized;
  MeasurementBasis basis;
  CovarianceMatrix covariance;
  std::vector<ModeSqueezing> squeezing;
  PurityResult purity;
  double single_mode_character = 0.0;
  double min_symplectic_eigenvalue = 0.0;
};

RunReport run_single(const RunConfig& config);

struct TradeoffRecord {
  double filter_width = 0.0;
  double target_db = 0.0;
  double gain_B = 0.0;
  double first_mode_squeezing_db = 0.0;
  double single_mode_character = 0.0;
  double purity = 0.0;
  double tail_weight = 0.0;
  double min_symplectic_eigenvalue = 0.0;
  std::string basis_method;
  std::string error;  // empty on success
};

// One record per (target, width), sorted by (target, width). Failed points carry
// an error message and NaN metrics.
std::vector<TradeoffRecord> sweep_tradeoff(const RunConfig& config);

std::string tradeoff_csv(const std::vector<TradeoffRecord>& records);

// Writes modes.csv, squeezing.csv, covariance.csv, schmidt.csv, ga_log.csv (GA
// only) and manifest.json into `dir`.
void export_report(const RunReport& report, const std::filesystem::path& dir);
void export_tradeoff(const RunConfig& config, const std::vector<TradeoffRecord>& records,
                     const std::filesystem::path& dir);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

std::vector<CheckResult> validate_invariants(const RunConfig& config);

}  // namespace pdcf
