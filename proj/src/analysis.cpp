#include "pdcf/analysis.hpp"

#include "pdcf/csv.hpp"
#include "pdcf/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

namespace pdcf {

namespace {

constexpr const char* kModule = "analysis_cli";
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double parse_number(const std::string& key, const std::string& value) {
  try {
    return csv::parse_double(value);
  } catch (const IoError&) {
    throw ConfigError(kModule, "key '" + key + "': cannot parse '" + value + "' as a number");
  }
}

int parse_int(const std::string& key, const std::string& value) {
  const double x = parse_number(key, value);
  if (x != std::floor(x) || std::abs(x) > 1e9) throw ConfigError(kModule, "key '" + key + "' must be an integer");
  return static_cast<int>(x);
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  std::istringstream in(value);
  if (value.empty() || value[0] == '-' || !(in >> out) || !in.eof()) {
    throw ConfigError(kModule, "key '" + key + "' must be an unsigned 64-bit integer");
  }
  return out;
}

std::vector<double> parse_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  for (const auto& cell : csv::split(value, ',')) {
    const std::string trimmed(csv::trim(cell));
    if (trimmed.empty()) continue;
    out.push_back(parse_number(key, trimmed));
  }
  return out;
}

std::string join(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ',';
    out += csv::format_double(xs[i]);
  }
  return out;
}

void require_increasing(const std::vector<double>& xs, const char* name) {
  if (xs.empty()) throw ConfigError(kModule, std::string(name) + " must not be empty");
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (!(xs[i] > xs[i - 1])) throw ConfigError(kModule, std::string(name) + " must be strictly increasing");
  }
}

struct StateMetrics {
  CovarianceMatrix covariance;
  std::vector<ModeSqueezing> squeezing;
  PurityResult purity;
  double single_mode_character = 0.0;
  double min_nu = 0.0;
};

StateMetrics measure(const UvKernels& kernels, const Filter& fa, const Filter& fb, const MeasurementBasis& basis,
                     int n_modes) {
  StateMetrics m;
  const ProjectionSet proj = filtered_projections(kernels, fa, fb, basis);
  m.covariance = assemble_covariance(proj, n_modes);
  m.squeezing = squeezing_report(m.covariance.sigma);
  m.purity = purity(m.covariance.sigma);
  m.single_mode_character = single_mode_character(m.squeezing);
  m.min_nu = symplectic_eigenvalues(m.covariance.sigma).minCoeff();
  return m;
}

template <class F>
void parallel_for(std::size_t n, int threads, F&& body) {
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, threads)), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

nlohmann::json config_json(const RunConfig& c) {
  nlohmann::json j;
  j["sigma_a"] = c.jsa.sigma_a;
  j["sigma_b"] = c.jsa.sigma_b;
  j["theta"] = c.jsa.theta;
  j["n_points"] = c.n_points;
  j["omega_min"] = c.omega_min;
  j["omega_max"] = c.omega_max;
  j["n_retained"] = c.n_retained;
  j["n_modes"] = c.n_modes;
  j["filter_kind"] = to_string(c.filter_kind);
  j["filter_center"] = c.filter_center;
  j["filter_width"] = c.filter_width;
  j["filter_amplitude"] = c.filter_amplitude;
  j["sweep_widths"] = c.sweep_widths;
  j["sweep_target_db"] = c.sweep_target_db;
  if (c.gain_B) j["gain_B"] = *c.gain_B;
  j["target_first_mode_db"] = c.target_first_mode_db;
  j["basis"] = to_string(c.basis);
  j["threads"] = c.threads;
  j["out"] = c.out.generic_string();
  j["ga"] = {{"population", c.ga.population},
             {"mutation_prob", c.ga.mutation_prob},
             {"mutation_sigma", c.ga.mutation_sigma},
             {"convergence_tol", c.ga.convergence_tol},
             {"convergence_window", c.ga.convergence_window},
             {"max_generations", c.ga.max_generations},
             {"rng_seed", c.ga.rng_seed}};
  return j;
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw IoError(kModule, "cannot create output directory '" + dir.string() + "'" + (ec ? ": " + ec.message() : ""));
  }
}

std::string modes_csv(const MeasurementBasis& basis) {
  std::string out = "omega";
  for (int k = 1; k <= basis.n_modes(); ++k) {
    const std::string s = std::to_string(k);
    out += ",signal_" + s + "_re,signal_" + s + "_im,idler_" + s + "_re,idler_" + s + "_im";
  }
  out += '\n';
  for (Eigen::Index i = 0; i < basis.grid.n_points; ++i) {
    out += csv::format_double(basis.grid.omega(i));
    for (int k = 0; k < basis.n_modes(); ++k) {
      const auto s = basis.signal_fns(i, k);
      const auto d = basis.idler_fns(i, k);
      out += ',' + csv::format_double(s.real()) + ',' + csv::format_double(s.imag()) + ',' +
             csv::format_double(d.real()) + ',' + csv::format_double(d.imag());
    }
    out += '\n';
  }
  return out;
}

}  // namespace

std::string to_string(BasisMethod method) {
  switch (method) {
    case BasisMethod::schmidt: return "schmidt";
    case BasisMethod::svd: return "svd";
    case BasisMethod::ga: return "ga";
  }
  return "unknown";
}

BasisMethod basis_method_from_string(const std::string& name) {
  if (name == "schmidt") return BasisMethod::schmidt;
  if (name == "svd" || name == "svd_effective") return BasisMethod::svd;
  if (name == "ga") return BasisMethod::ga;
  throw ConfigError(kModule, "unknown basis method '" + name + "' (expected schmidt, svd or ga)");
}

void RunConfig::validate() const {
  if (!(jsa.sigma_a > 0.0) || !(jsa.sigma_b > 0.0)) throw ConfigError(kModule, "sigma_a and sigma_b must be positive");
  if (!std::isfinite(jsa.theta)) throw ConfigError(kModule, "theta must be finite");
  if (n_points < 2) throw ConfigError(kModule, "n_points must be at least 2");
  if (!(omega_max > omega_min)) throw ConfigError(kModule, "omega_max must exceed omega_min");
  if (n_retained < 1 || n_retained > n_points) throw ConfigError(kModule, "n_retained must lie in [1, n_points]");
  if (n_modes < 1 || n_modes > n_retained) throw ConfigError(kModule, "n_modes must lie in [1, n_retained]");
  if (!(filter_width >= 0.0)) throw ConfigError(kModule, "filter_width must be non-negative");
  if (filter_kind == FilterKind::gaussian && !(filter_width > 0.0)) {
    throw ConfigError(kModule, "Gaussian filter_width must be positive");
  }
  if (!(filter_amplitude >= 0.0 && filter_amplitude <= 1.0)) {
    throw ConfigError(kModule, "filter_amplitude must lie in [0, 1]");
  }
  require_increasing(sweep_widths, "sweep_widths");
  require_increasing(sweep_target_db, "sweep_target_db");
  if (sweep_widths.front() < 0.0) throw ConfigError(kModule, "sweep_widths must be non-negative");
  if (sweep_target_db.front() < 0.0) throw ConfigError(kModule, "sweep_target_db must be non-negative");
  if (gain_B && !(*gain_B >= 0.0 && std::isfinite(*gain_B))) throw ConfigError(kModule, "gain_B must be >= 0");
  if (!(target_first_mode_db >= 0.0)) throw ConfigError(kModule, "target_first_mode_db must be >= 0");
  if (threads < 1) throw ConfigError(kModule, "threads must be at least 1");
  ga.validate();
}

RunConfig parse_config(const std::string& text) {
  RunConfig c;
  std::map<std::string, std::function<void(const std::string&, const std::string&)>> setters{
      {"sigma_a", [&](auto& k, auto& v) { c.jsa.sigma_a = parse_number(k, v); }},
      {"sigma_b", [&](auto& k, auto& v) { c.jsa.sigma_b = parse_number(k, v); }},
      {"theta", [&](auto& k, auto& v) { c.jsa.theta = parse_number(k, v); }},
      {"n_points", [&](auto& k, auto& v) { c.n_points = parse_int(k, v); }},
      {"omega_min", [&](auto& k, auto& v) { c.omega_min = parse_number(k, v); }},
      {"omega_max", [&](auto& k, auto& v) { c.omega_max = parse_number(k, v); }},
      {"n_retained", [&](auto& k, auto& v) { c.n_retained = parse_int(k, v); }},
      {"n_modes", [&](auto& k, auto& v) { c.n_modes = parse_int(k, v); }},
      {"filter_kind", [&](auto&, auto& v) {
         try {
           c.filter_kind = filter_kind_from_string(v);
         } catch (const ConfigError& e) {
           throw ConfigError(kModule, e.what());
         }
       }},
      {"filter_center", [&](auto& k, auto& v) { c.filter_center = parse_number(k, v); }},
      {"filter_width", [&](auto& k, auto& v) { c.filter_width = parse_number(k, v); }},
      {"filter_amplitude", [&](auto& k, auto& v) { c.filter_amplitude = parse_number(k, v); }},
      {"sweep_widths", [&](auto& k, auto& v) { c.sweep_widths = parse_list(k, v); }},
      {"sweep_target_db", [&](auto& k, auto& v) { c.sweep_target_db = parse_list(k, v); }},
      {"gain_B", [&](auto& k, auto& v) { c.gain_B = parse_number(k, v); }},
      {"target_first_mode_db", [&](auto& k, auto& v) { c.target_first_mode_db = parse_number(k, v); }},
      {"basis", [&](auto&, auto& v) { c.basis = basis_method_from_string(v); }},
      {"ga_population", [&](auto& k, auto& v) { c.ga.population = parse_int(k, v); }},
      {"ga_mutation_prob", [&](auto& k, auto& v) { c.ga.mutation_prob = parse_number(k, v); }},
      {"ga_mutation_sigma", [&](auto& k, auto& v) { c.ga.mutation_sigma = parse_number(k, v); }},
      {"ga_convergence_tol", [&](auto& k, auto& v) { c.ga.convergence_tol = parse_number(k, v); }},
      {"ga_convergence_window", [&](auto& k, auto& v) { c.ga.convergence_window = parse_int(k, v); }},
      {"ga_max_generations", [&](auto& k, auto& v) { c.ga.max_generations = parse_int(k, v); }},
      {"seed", [&](auto& k, auto& v) { c.ga.rng_seed = parse_u64(k, v); }},
      {"threads", [&](auto& k, auto& v) { c.threads = parse_int(k, v); }},
      {"out", [&](auto&, auto& v) { c.out = v; }},
  };

  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string_view body = csv::trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(kModule, "line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key(csv::trim(body.substr(0, eq)));
    const std::string value(csv::trim(body.substr(eq + 1)));
    const auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError(kModule, "line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    it->second(key, value);
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) { return parse_config(csv::read_text(path)); }

std::string config_to_text(const RunConfig& c) {
  std::ostringstream out;
  const auto num = [](double x) { return csv::format_double(x); };
  out << "sigma_a = " << num(c.jsa.sigma_a) << '\n'
      << "sigma_b = " << num(c.jsa.sigma_b) << '\n'
      << "theta = " << num(c.jsa.theta) << '\n'
      << "n_points = " << c.n_points << '\n'
      << "omega_min = " << num(c.omega_min) << '\n'
      << "omega_max = " << num(c.omega_max) << '\n'
      << "n_retained = " << c.n_retained << '\n'
      << "n_modes = " << c.n_modes << '\n'
      << "filter_kind = " << to_string(c.filter_kind) << '\n'
      << "filter_center = " << num(c.filter_center) << '\n'
      << "filter_width = " << num(c.filter_width) << '\n'
      << "filter_amplitude = " << num(c.filter_amplitude) << '\n'
      << "sweep_widths = " << join(c.sweep_widths) << '\n'
      << "sweep_target_db = " << join(c.sweep_target_db) << '\n';
  if (c.gain_B) out << "gain_B = " << num(*c.gain_B) << '\n';
  out << "target_first_mode_db = " << num(c.target_first_mode_db) << '\n'
      << "basis = " << to_string(c.basis) << '\n'
      << "ga_population = " << c.ga.population << '\n'
      << "ga_mutation_prob = " << num(c.ga.mutation_prob) << '\n'
      << "ga_mutation_sigma = " << num(c.ga.mutation_sigma) << '\n'
      << "ga_convergence_tol = " << num(c.ga.convergence_tol) << '\n'
      << "ga_convergence_window = " << c.ga.convergence_window << '\n'
      << "ga_max_generations = " << c.ga.max_generations << '\n'
      << "seed = " << c.ga.rng_seed << '\n'
      << "threads = " << c.threads << '\n'
      << "out = " << c.out.generic_string() << '\n';
  return out.str();
}

FrequencyGrid config_grid(const RunConfig& config) {
  return build_frequency_grid(config.n_points, config.omega_min, config.omega_max);
}

Filter config_filter(const RunConfig& config, const FrequencyGrid& grid, double width) {
  switch (config.filter_kind) {
    case FilterKind::rectangular: return make_rect_filter(config.filter_center, width, grid);
    case FilterKind::gaussian: return make_gauss_filter(config.filter_center, width, grid);
    case FilterKind::identity: return make_identity_filter(grid);
    case FilterKind::blocking: return make_blocking_filter(grid);
    case FilterKind::flat: return make_flat_filter(config.filter_amplitude, grid);
  }
  throw ConfigError(kModule, "unhandled filter kind");
}

RunReport run_single(const RunConfig& config) {
  config.validate();
  const FrequencyGrid grid = config_grid(config);
  GaussianJsaParams params = config.jsa;
  const JsaMatrix jsa = build_gaussian_jsa(params, grid);
  SchmidtData raw = schmidt_decompose(jsa, config.n_retained);

  RunReport report;
  report.config = config;
  report.gain_B = config.gain_B ? *config.gain_B : gain_for_first_mode_db(raw, config.target_first_mode_db);
  report.schmidt = apply_gain(std::move(raw), report.gain_B);

  const Filter fa = config_filter(config, grid, config.filter_width);
  const Filter fb = fa;
  const UvKernels kernels = build_uv_kernels(report.schmidt);

  switch (config.basis) {
    case BasisMethod::schmidt:
      report.basis = schmidt_basis(report.schmidt, config.n_modes);
      break;
    case BasisMethod::svd:
      report.effective = svd_effective_basis(jsa, report.gain_B, fa, fb, config.n_retained);
      report.basis = report.effective->basis(config.n_modes);
      break;
    case BasisMethod::ga: {
      const StateContext ctx(report.schmidt, fa, fb);
      report.optimized = ga_optimize_basis(ctx, config.n_modes, config.ga, config.threads);
      report.basis = report.optimized->basis();
      break;
    }
  }

  StateMetrics m = measure(kernels, fa, fb, report.basis, config.n_modes);
  report.covariance = std::move(m.covariance);
  report.squeezing = std::move(m.squeezing);
  report.purity = m.purity;
  report.single_mode_character = m.single_mode_character;
  report.min_symplectic_eigenvalue = m.min_nu;
  return report;
}

std::vector<TradeoffRecord> sweep_tradeoff(const RunConfig& config) {
  config.validate();
  const FrequencyGrid grid = config_grid(config);
  const JsaMatrix jsa = build_gaussian_jsa(config.jsa, grid);
  const SchmidtData raw = schmidt_decompose(jsa, config.n_retained);

  struct GainState {
    double target_db;
    double gain_B;
    SchmidtData schmidt;
    UvKernels kernels;
  };
  std::vector<GainState> gains;
  for (double target : config.sweep_target_db) {
    const double b = gain_for_first_mode_db(raw, target);
    SchmidtData s = apply_gain(raw, b);
    UvKernels k = build_uv_kernels(s);
    gains.push_back({target, b, std::move(s), std::move(k)});
  }

  const std::size_t n_widths = config.sweep_widths.size();
  std::vector<TradeoffRecord> records(gains.size() * n_widths);
  parallel_for(records.size(), config.threads, [&](std::size_t idx) {
    const GainState& g = gains[idx / n_widths];
    const double width = config.sweep_widths[idx % n_widths];
    TradeoffRecord& rec = records[idx];
    rec.filter_width = width;
    rec.target_db = g.target_db;
    rec.gain_B = g.gain_B;
    rec.tail_weight = g.schmidt.tail_weight;
    rec.basis_method = to_string(config.basis);
    try {
      const Filter fa = config_filter(config, grid, width);
      MeasurementBasis basis;
      switch (config.basis) {
        case BasisMethod::schmidt: basis = schmidt_basis(g.schmidt, config.n_modes); break;
        case BasisMethod::svd:
          basis = svd_effective_basis(jsa, g.gain_B, fa, fa, config.n_retained).basis(config.n_modes);
          break;
        case BasisMethod::ga: {
          const StateContext ctx(g.schmidt, fa, fa);
          GaParams ga = config.ga;
          ga.rng_seed += idx;
          basis = ga_optimize_basis(ctx, config.n_modes, ga, 1).basis();
          break;
        }
      }
      const StateMetrics m = measure(g.kernels, fa, fa, basis, config.n_modes);
      rec.first_mode_squeezing_db = m.squeezing.front().squeezing_db;
      rec.single_mode_character = m.single_mode_character;
      rec.purity = m.purity.value;
      rec.min_symplectic_eigenvalue = m.min_nu;
    } catch (const std::exception& e) {
      rec.first_mode_squeezing_db = rec.single_mode_character = rec.purity = rec.min_symplectic_eigenvalue = kNaN;
      rec.error = e.what();
    }
  });

  std::stable_sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
    return a.target_db != b.target_db ? a.target_db < b.target_db : a.filter_width < b.filter_width;
  });
  return records;
}

std::string tradeoff_csv(const std::vector<TradeoffRecord>& records) {
  std::string out =
      "target_db,filter_width,gain_B,first_mode_squeezing_db,single_mode_character,purity,tail_weight,"
      "min_symplectic_eigenvalue,basis_method,error\n";
  for (const auto& r : records) {
    std::string err = r.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    out += csv::format_double(r.target_db) + ',' + csv::format_double(r.filter_width) + ',' +
           csv::format_double(r.gain_B) + ',' + csv::format_double(r.first_mode_squeezing_db) + ',' +
           csv::format_double(r.single_mode_character) + ',' + csv::format_double(r.purity) + ',' +
           csv::format_double(r.tail_weight) + ',' + csv::format_double(r.min_symplectic_eigenvalue) + ',' +
           r.basis_method + ',' + err + '\n';
  }
  return out;
}

void export_report(const RunReport& report, const std::filesystem::path& dir) {
  ensure_dir(dir);
  csv::write_text_atomic(dir / "modes.csv", modes_csv(report.basis));
  csv::write_text_atomic(dir / "squeezing.csv", squeezing_report_csv(report.squeezing));
  write_covariance_csv(report.covariance.sigma, dir / "covariance.csv");

  std::string schmidt = "k,lambda,r\n";
  for (int k = 0; k < report.schmidt.n_retained; ++k) {
    schmidt += std::to_string(k + 1) + ',' + csv::format_double(report.schmidt.lambdas[k]) + ',' +
               csv::format_double(report.schmidt.r()[k]) + '\n';
  }
  csv::write_text_atomic(dir / "schmidt.csv", schmidt);

  if (report.effective) {
    std::string eff = "k,singular_value,r_prime\n";
    for (Eigen::Index k = 0; k < report.effective->r_primes.size(); ++k) {
      eff += std::to_string(k + 1) + ',' + csv::format_double(report.effective->singular_values[k]) + ',' +
             csv::format_double(report.effective->r_primes[k]) + '\n';
    }
    csv::write_text_atomic(dir / "effective.csv", eff);
  }
  if (report.optimized) csv::write_text_atomic(dir / "ga_log.csv", report.optimized->log_csv());

  nlohmann::json manifest;
  manifest["version"] = kVersion;
  manifest["verb"] = "run";
  manifest["config"] = config_json(report.config);
  manifest["rng_seed"] = report.config.ga.rng_seed;
  manifest["gain_B"] = report.gain_B;
  manifest["tail_weight"] = report.schmidt.tail_weight;
  manifest["purity"] = report.purity.value;
  manifest["single_mode_character"] = std::isfinite(report.single_mode_character)
                                          ? nlohmann::json(report.single_mode_character)
                                          : nlohmann::json("inf");
  manifest["min_symplectic_eigenvalue"] = report.min_symplectic_eigenvalue;
  manifest["covariance_asymmetry"] = report.covariance.asymmetry;
  if (report.optimized) {
    manifest["ga_generations"] = report.optimized->generations_used;
    manifest["ga_converged"] = report.optimized->converged;
  }
  csv::write_text_atomic(dir / "manifest.json", manifest.dump(2) + '\n');
}

void export_tradeoff(const RunConfig& config, const std::vector<TradeoffRecord>& records,
                     const std::filesystem::path& dir) {
  ensure_dir(dir);
  csv::write_text_atomic(dir / "tradeoff.csv", tradeoff_csv(records));
  nlohmann::json manifest;
  manifest["version"] = kVersion;
  manifest["verb"] = "sweep";
  manifest["config"] = config_json(config);
  manifest["rng_seed"] = config.ga.rng_seed;
  std::size_t failed = 0;
  for (const auto& r : records) failed += r.error.empty() ? 0 : 1;
  manifest["points"] = records.size();
  manifest["failed_points"] = failed;
  csv::write_text_atomic(dir / "manifest.json", manifest.dump(2) + '\n');
}

std::vector<CheckResult> validate_invariants(const RunConfig& config) {
  config.validate();
  std::vector<CheckResult> out;
  const auto add = [&](std::string name, bool ok, const std::string& detail) {
    out.push_back({std::move(name), ok, detail});
  };
  const auto fmt = [](double x) { return csv::format_double(x); };

  const FrequencyGrid grid = config_grid(config);
  const double off_grid = gaussian_off_grid_mass(config.jsa, grid);
  add("grid_truncation", off_grid <= kMaxOffGridMass, "off-grid mass " + fmt(off_grid));
  if (off_grid > kMaxOffGridMass) return out;

  const JsaMatrix jsa = build_gaussian_jsa(config.jsa, grid);
  SchmidtData raw = schmidt_decompose(jsa, config.n_retained);
  const double norm_err = std::abs(raw.lambdas.squaredNorm() - 1.0);
  add("schmidt_normalization", norm_err < 1e-10, "|sum lambda^2 - 1| = " + fmt(norm_err));
  const double ortho = std::max(orthonormality_error(raw.signal_modes, grid), orthonormality_error(raw.idler_modes, grid));
  add("schmidt_orthonormality", ortho < 1e-10, "max error " + fmt(ortho));
  add("schmidt_tail_weight", raw.tail_weight < 1e-6, "tail weight " + fmt(raw.tail_weight));

  const double gain = config.gain_B ? *config.gain_B : gain_for_first_mode_db(raw, config.target_first_mode_db);
  const SchmidtData schmidt = apply_gain(std::move(raw), gain);
  const UvKernels kernels = build_uv_kernels(schmidt);
  const int n = config.n_modes;

  {
    const Filter id = make_identity_filter(grid);
    const StateMetrics m = measure(kernels, id, id, schmidt_basis(schmidt, n), n);
    double err = 0.0;
    for (int k = 0; k < n; ++k) {
      for (int l = 0; l < n; ++l) {
        const Eigen::Matrix4d expect = k == l ? analytic_epr_block(schmidt.r()[k]) : Eigen::Matrix4d::Zero();
        err = std::max(err, (m.covariance.sigma.block<4, 4>(4 * k, 4 * l) - expect).cwiseAbs().maxCoeff());
      }
    }
    add("unfiltered_limit", err < 1e-9, "max deviation from the two-mode squeezed blocks " + fmt(err));
  }
  {
    const Filter block = make_blocking_filter(grid);
    const StateMetrics m = measure(kernels, block, block, schmidt_basis(schmidt, n), n);
    const double err = (m.covariance.sigma - 0.5 * Eigen::MatrixXd::Identity(4 * n, 4 * n)).cwiseAbs().maxCoeff();
    add("vacuum_limit", err < 1e-12 && std::abs(m.purity.value - 1.0) < 1e-12,
        "max deviation " + fmt(err) + ", purity " + fmt(m.purity.value));
  }

  const Filter fa = config_filter(config, grid, config.filter_width);
  const EffectiveSchmidt eff = svd_effective_basis(jsa, gain, fa, fa, config.n_retained);
  double excess = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < config.n_retained; ++k) excess = std::max(excess, eff.r_primes[k] - schmidt.r()[k]);
  add("contraction", excess <= 1e-12, "max r'_k - r_k = " + fmt(excess));
  const double eff_ortho =
      std::max(orthonormality_error(eff.signal_modes, grid), orthonormality_error(eff.idler_modes, grid));
  add("effective_orthonormality", eff_ortho < 1e-10, "max error " + fmt(eff_ortho));

  for (BasisMethod method : {BasisMethod::schmidt, BasisMethod::svd}) {
    const MeasurementBasis basis = method == BasisMethod::schmidt ? schmidt_basis(schmidt, n) : eff.basis(n);
    const std::string tag = "filtered_" + to_string(method);
    try {
      const StateMetrics m = measure(kernels, fa, fa, basis, n);
      add(tag + "_physicality", m.min_nu >= 0.5 - 1e-9, "min symplectic eigenvalue " + fmt(m.min_nu));
      add(tag + "_symmetry", m.covariance.asymmetry < kAsymmetryWarning, "asymmetry " + fmt(m.covariance.asymmetry));
      add(tag + "_purity_routes",
          std::abs(m.purity.via_determinant - m.purity.via_symplectic) <= kPurityCrossCheckTolerance,
          "determinant " + fmt(m.purity.via_determinant) + ", symplectic " + fmt(m.purity.via_symplectic));
    } catch (const Error& e) {
      add(tag + "_physicality", false, e.what());
    }
  }
  return out;
}

}  // namespace pdcf
