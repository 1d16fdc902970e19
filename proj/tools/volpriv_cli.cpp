// volpriv command-line driver.
//
// Subcommands:
//   simulate   per-step time series of the inference attack under one release
//              mechanism -> <output_dir>/timeseries.csv
//   tradeoff   privacy/utility sweep over all mechanisms and budgets
//              -> <output_dir>/tradeoff.csv
//   audit      per-step bound-check residuals plus a violation summary
//              -> <output_dir>/audit.csv
//   lp-dump    print one release-optimization LP instance as text
//
// Every subcommand accepts --config <file.json> and inline overrides; inline
// flags win. Identical config + seed reproduces byte-identical CSV output.
//
// Example:
//   volpriv tradeoff --eps 0.01 --eps 0.1 --eps 0.5 --runs 20 --output-dir out

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>

#include "volpriv/experiments.hpp"

namespace {

struct CliOptions {
  std::string config_path;
  std::string system;
  int horizon = -1;
  int runs = -1;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string mechanism;
  std::vector<double> eps;
  std::string backend;
  int ccg_cap = -1;
  std::string output_dir;
  int lp_step = 1;
};

void add_common_flags(CLI::App* cmd, CliOptions& opt) {
  cmd->add_option("--config", opt.config_path, "JSON experiment config file");
  cmd->add_option("--system", opt.system, "'preset' or a system-definition JSON file");
  cmd->add_option("--horizon", opt.horizon, "steps per run (K)");
  cmd->add_option("--runs", opt.runs, "Monte Carlo runs (N)");
  cmd->add_option("--seed", opt.seed, "base seed")->each([&](const std::string&) {
    opt.seed_set = true;
  });
  cmd->add_option("--mechanism", opt.mechanism, "optimal | quantizer | gaussian");
  cmd->add_option("--eps", opt.eps, "utility budget(s); repeatable");
  cmd->add_option("--backend", opt.backend, "interval | ccg (tradeoff only)");
  cmd->add_option("--ccg-cap", opt.ccg_cap, "exact-backend horizon cap");
  cmd->add_option("--output-dir", opt.output_dir, "directory for CSV output");
}

volpriv::ExperimentConfig resolve(const CliOptions& opt) {
  volpriv::ExperimentConfig cfg;
  if (!opt.config_path.empty()) cfg = volpriv::load_config(opt.config_path);
  if (!opt.system.empty()) cfg.system = opt.system;
  if (opt.horizon >= 0) cfg.horizon = opt.horizon;
  if (opt.runs >= 0) cfg.runs = opt.runs;
  if (opt.seed_set) cfg.seed = opt.seed;
  if (!opt.mechanism.empty()) {
    if (opt.mechanism == "optimal") cfg.mechanism = volpriv::Mechanism::OptimalFilter;
    else if (opt.mechanism == "quantizer") cfg.mechanism = volpriv::Mechanism::Quantizer;
    else if (opt.mechanism == "gaussian") cfg.mechanism = volpriv::Mechanism::TruncatedGaussian;
    else throw CLI::ValidationError("--mechanism", "unknown mechanism: " + opt.mechanism);
  }
  if (!opt.eps.empty()) cfg.eps_x = opt.eps;
  if (!opt.backend.empty()) {
    if (opt.backend == "interval") cfg.backend = volpriv::Backend::Interval;
    else if (opt.backend == "ccg") cfg.backend = volpriv::Backend::Ccg;
    else throw CLI::ValidationError("--backend", "unknown backend: " + opt.backend);
  }
  if (opt.ccg_cap >= 0) cfg.ccg_horizon_cap = opt.ccg_cap;
  if (!opt.output_dir.empty()) cfg.output_dir = opt.output_dir;

  const auto errors = volpriv::validate(cfg);
  if (!errors.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& e : errors) msg += "\n  " + e;
    throw CLI::ValidationError("config", msg);
  }
  return cfg;
}

std::string out_path(const volpriv::ExperimentConfig& cfg, const char* file) {
  return (std::filesystem::path(cfg.output_dir) / file).string();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Volumetric privacy toolkit for bounded-disturbance linear systems"};
  app.require_subcommand(1);

  CliOptions opt;
  CLI::App* simulate = app.add_subcommand("simulate", "per-step inference time series");
  add_common_flags(simulate, opt);
  CLI::App* tradeoff = app.add_subcommand("tradeoff", "privacy/utility sweep");
  add_common_flags(tradeoff, opt);
  CLI::App* audit = app.add_subcommand("audit", "bound-check audit");
  add_common_flags(audit, opt);
  CLI::App* lp_dump = app.add_subcommand("lp-dump", "print one release-optimization LP");
  add_common_flags(lp_dump, opt);
  lp_dump->add_option("--step", opt.lp_step, "time step of the dumped instance (k >= 1)");

  CLI11_PARSE(app, argc, argv);

  try {
    const volpriv::ExperimentConfig cfg = resolve(opt);
    const volpriv::LinearSystem sys = volpriv::load_system(cfg);

    if (simulate->parsed()) {
      const std::string path = out_path(cfg, "timeseries.csv");
      volpriv::write_timeseries_csv(cfg, sys, path);
      std::cout << "wrote " << path << "\n";
    } else if (tradeoff->parsed()) {
      const volpriv::TradeoffTable table = volpriv::run_tradeoff(cfg, sys);
      const std::string path = out_path(cfg, "tradeoff.csv");
      volpriv::write_tradeoff_csv(cfg, table, path);
      std::cout << "wrote " << path << "\n";
    } else if (audit->parsed()) {
      const std::string path = out_path(cfg, "audit.csv");
      const volpriv::AuditSummary summary = volpriv::write_audit_csv(cfg, sys, path);
      std::cout << "wrote " << path << "\n";
      std::cout << "steps audited:        " << summary.steps << "\n"
                << "route violations:     " << summary.route_violations
                << " (max residual " << volpriv::format_g9(summary.max_route_residual) << ")\n"
                << "radius violations:    " << summary.radius_violations
                << " (max residual " << volpriv::format_g9(summary.max_radius_residual) << ")\n"
                << "reduction violations: " << summary.reduction_violations
                << " (max residual " << volpriv::format_g9(summary.max_reduction_residual) << ")\n"
                << "sandwich violations:  " << summary.sandwich_violations
                << " (max residual " << volpriv::format_g9(summary.max_sandwich_residual) << ")\n"
                << "soundness violations: " << summary.soundness_violations << "\n"
                << "truncated runs:       " << summary.truncated_runs << "\n"
                << (summary.clean() ? "PASS" : "FAIL") << "\n";
      return summary.clean() ? 0 : 1;
    } else if (lp_dump->parsed()) {
      std::cout << volpriv::dump_release_lp(cfg, sys, opt.lp_step);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
