#include "pdcf/analysis.hpp"
#include "pdcf/errors.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

namespace {

enum ExitCode { kOk = 0, kConfig = 1, kNumerical = 2, kIo = 3 };

int exit_code_for(pdcf::ErrorKind kind) {
  switch (kind) {
    case pdcf::ErrorKind::configuration: return kConfig;
    case pdcf::ErrorKind::io: return kIo;
    default: return kNumerical;
  }
}

struct Options {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> basis;
  std::optional<int> threads;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config, "key = value configuration file (defaults apply when omitted)");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--seed", o.seed, "GA random seed");
  cmd->add_option("--basis", o.basis, "schmidt | svd | ga");
  cmd->add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
}

pdcf::RunConfig resolve(const Options& o) {
  pdcf::RunConfig c = o.config.empty() ? pdcf::RunConfig{} : pdcf::load_config(o.config);
  if (o.out) c.out = *o.out;
  if (o.seed) c.ga.rng_seed = *o.seed;
  if (o.basis) c.basis = pdcf::basis_method_from_string(*o.basis);
  if (o.threads) c.threads = *o.threads;
  c.validate();
  return c;
}

void print_run(const pdcf::RunReport& r) {
  std::cout << "basis " << pdcf::to_string(r.config.basis) << ", gain B = " << r.gain_B << '\n';
  for (const auto& m : r.squeezing) {
    std::cout << "  mode " << m.mode_index + 1 << ": " << m.squeezing_db << " dB (" << pdcf::to_string(m.combination)
              << ")\n";
  }
  std::cout << "purity " << r.purity.value << ", single-mode character " << r.single_mode_character
            << ", min symplectic eigenvalue " << r.min_symplectic_eigenvalue << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectrally filtered multimode squeezing analysis"};
  app.require_subcommand(1);
  Options run_opts, sweep_opts, validate_opts;
  auto* run = app.add_subcommand("run", "single configuration");
  auto* sweep = app.add_subcommand("sweep", "filter-width x gain trade-off table");
  auto* validate = app.add_subcommand("validate", "invariant suite on a configuration");
  add_common(run, run_opts);
  add_common(sweep, sweep_opts);
  add_common(validate, validate_opts);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (run->parsed()) {
      const pdcf::RunConfig config = resolve(run_opts);
      const pdcf::RunReport report = pdcf::run_single(config);
      pdcf::export_report(report, config.out);
      print_run(report);
      std::cout << "wrote " << config.out.string() << '\n';
    } else if (sweep->parsed()) {
      const pdcf::RunConfig config = resolve(sweep_opts);
      const auto records = pdcf::sweep_tradeoff(config);
      pdcf::export_tradeoff(config, records, config.out);
      std::size_t failed = 0;
      for (const auto& r : records) {
        if (!r.error.empty()) {
          ++failed;
          std::cerr << "point target=" << r.target_db << " dB width=" << r.filter_width << " failed: " << r.error
                    << '\n';
        }
      }
      std::cout << records.size() << " points (" << failed << " failed), wrote " << config.out.string() << '\n';
    } else {
      const pdcf::RunConfig config = resolve(validate_opts);
      bool ok = true;
      for (const auto& c : pdcf::validate_invariants(config)) {
        std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
        ok = ok && c.passed;
      }
      return ok ? kOk : kNumerical;
    }
  } catch (const pdcf::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumerical;
  }
  return kOk;
}
