#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "volpriv/experiments.hpp"

using volpriv::Backend;
using volpriv::ExperimentConfig;
using volpriv::LinearSystem;
using volpriv::Mechanism;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.horizon = 8;
  cfg.runs = 3;
  cfg.seed = 5;
  cfg.eps_x = {0.1, 0.5};
  return cfg;
}

}  // namespace

TEST_CASE("config validation lists violations") {
  ExperimentConfig cfg;
  cfg.horizon = 0;
  cfg.runs = 0;
  cfg.eps_x = {0.5, -1.0};
  const auto errors = validate(cfg);
  CHECK(errors.size() == 3);
}

TEST_CASE("config file round trip and key checking") {
  const std::string path = temp_path("volpriv_cfg.json");
  {
    std::ofstream out(path);
    out << R"({"horizon": 12, "runs": 4, "seed": 9, "mechanism": "quantizer",
               "eps_x": [0.1, 0.2], "backend": "ccg", "ccg_horizon_cap": 3,
               "output_dir": "out"})";
  }
  const ExperimentConfig cfg = volpriv::load_config(path);
  CHECK(cfg.horizon == 12);
  CHECK(cfg.runs == 4);
  CHECK(cfg.seed == 9);
  CHECK(cfg.mechanism == Mechanism::Quantizer);
  CHECK(cfg.eps_x == std::vector<double>{0.1, 0.2});
  CHECK(cfg.backend == Backend::Ccg);
  CHECK(cfg.ccg_horizon_cap == 3);

  {
    std::ofstream out(path);
    out << R"({"horizon": 12, "mystery": 1})";
  }
  CHECK_THROWS_WITH_AS(volpriv::load_config(path), doctest::Contains("mystery"),
                       std::runtime_error);

  {
    std::ofstream out(path);
    out << R"({"horizon": 0})";
  }
  CHECK_THROWS_AS(volpriv::load_config(path), std::runtime_error);
  std::filesystem::remove(path);
}

TEST_CASE("mechanism runs share ground truth across mechanisms and budgets") {
  const LinearSystem sys = volpriv::case_study_preset();
  const auto a = run_mechanism(sys, Mechanism::OptimalFilter, 0.5, 5, 1, 0);
  const auto b = run_mechanism(sys, Mechanism::Quantizer, 0.1, 5, 1, 0);
  REQUIRE(a.steps.size() == 6);
  REQUIRE(b.steps.size() == 6);
  for (size_t k = 0; k < a.steps.size(); ++k) {
    CHECK(a.steps[k].x_true == b.steps[k].x_true);
    CHECK(a.steps[k].y_true == b.steps[k].y_true);
  }
  const auto c = run_mechanism(sys, Mechanism::OptimalFilter, 0.5, 5, 1, 1);
  CHECK(a.steps[0].x_true != c.steps[0].x_true);  // distinct run indices diverge
}

TEST_CASE("timeseries CSV is deterministic and carries the schema header") {
  ExperimentConfig cfg = small_config();
  const LinearSystem sys = volpriv::load_system(cfg);
  const std::string p1 = temp_path("volpriv_ts1.csv");
  const std::string p2 = temp_path("volpriv_ts2.csv");
  write_timeseries_csv(cfg, sys, p1);
  write_timeseries_csv(cfg, sys, p2);
  const std::string text = slurp(p1);
  CHECK(text == slurp(p2));
  CHECK(text.rfind("# volpriv timeseries schema=1", 0) == 0);
  CHECK(text.find("run,k,mechanism,eps_x") != std::string::npos);
  CHECK(text.find("sound_x") != std::string::npos);
  std::filesystem::remove(p1);
  std::filesystem::remove(p2);
}

TEST_CASE("audit runs clean for the optimal filter and the quantizer") {
  ExperimentConfig cfg = small_config();
  const LinearSystem sys = volpriv::load_system(cfg);
  for (Mechanism m : {Mechanism::OptimalFilter, Mechanism::Quantizer}) {
    cfg.mechanism = m;
    const std::string path = temp_path("volpriv_audit.csv");
    const volpriv::AuditSummary summary = write_audit_csv(cfg, sys, path);
    CHECK(summary.clean());
    CHECK(summary.steps == 2 * 3 * 9);  // budgets x runs x (horizon + 1)
    CHECK(summary.truncated_runs == 0);
    std::filesystem::remove(path);
  }
}

TEST_CASE("audit accumulation catches doctored reports") {
  volpriv::AuditSummary summary;
  volpriv::MechanismStep step;
  step.report.checks.route_residual = 1e-3;
  step.report.checks.radius_residual = 2e-3;
  step.report.checks.reduction_upper_residual = 3e-3;
  step.report.checks.sandwich_lower_residual = 4e-3;
  accumulate_audit(summary, step, true, false);
  CHECK(summary.route_violations == 1);
  CHECK(summary.radius_violations == 1);
  CHECK(summary.reduction_violations == 1);
  CHECK(summary.sandwich_violations == 1);
  CHECK(summary.soundness_violations == 1);
  CHECK(!summary.clean());
  CHECK(summary.max_sandwich_residual == 4e-3);
}

TEST_CASE("tradeoff table: gaussian anchor spans the unit normalization") {
  ExperimentConfig cfg;
  cfg.horizon = 10;
  cfg.runs = 4;
  cfg.eps_x = {0.05, 0.2, 0.5};
  const LinearSystem sys = volpriv::load_system(cfg);
  const volpriv::TradeoffTable table = run_tradeoff(cfg, sys);
  REQUIRE(table.points.size() == 9);

  double gmin = 1e300, gmax = -1e300;
  for (const auto& pt : table.points) {
    if (pt.mechanism != Mechanism::TruncatedGaussian) continue;
    gmin = std::min(gmin, pt.norm_privacy);
    gmax = std::max(gmax, pt.norm_privacy);
    CHECK(pt.norm_privacy >= -1e-12);
    CHECK(pt.norm_privacy <= 1.0 + 1e-12);
  }
  CHECK(gmin == doctest::Approx(0.0));
  CHECK(gmax == doctest::Approx(1.0));

  const std::string path = temp_path("volpriv_tradeoff.csv");
  write_tradeoff_csv(cfg, table, path);
  const std::string text = slurp(path);
  CHECK(text.rfind("# volpriv tradeoff schema=1", 0) == 0);
  CHECK(text.find("normalization=minmax_over_gaussian_sweep") != std::string::npos);
  std::filesystem::remove(path);
}

TEST_CASE("tradeoff supports the exact backend at a small cap") {
  ExperimentConfig cfg;
  cfg.horizon = 10;
  cfg.runs = 2;
  cfg.eps_x = {0.1, 0.5};
  cfg.backend = Backend::Ccg;
  cfg.ccg_horizon_cap = 2;
  const LinearSystem sys = volpriv::load_system(cfg);
  const volpriv::TradeoffTable table = run_tradeoff(cfg, sys);
  REQUIRE(table.points.size() == 6);
  for (const auto& pt : table.points) {
    if (pt.runs == 0) continue;
    CHECK(pt.mean_privacy_surrogate > 0.0);
    CHECK(pt.steps <= pt.runs * 3);
  }
}

TEST_CASE("exact-backend evaluation of a released stream") {
  const LinearSystem sys = volpriv::case_study_preset();
  const auto run = run_mechanism(sys, Mechanism::OptimalFilter, 0.5, 4, 3, 0);
  std::vector<volpriv::Intervald> released;
  for (const auto& s : run.steps) released.push_back(s.released);
  const auto evals = evaluate_ccg(sys, released, 3);
  REQUIRE(evals.size() == 4);  // k = 0..3
  for (const auto& e : evals) {
    const auto& ib = run.steps[static_cast<size_t>(e.k)].belief;
    CHECK(e.y_hull.subset_of(ib.y_post, 1e-9));
    CHECK(e.x_hull.subset_of(ib.x_post, 1e-9));
  }
}

TEST_CASE("gaussian truncation is recorded, not fatal") {
  const LinearSystem sys = volpriv::case_study_preset();
  int truncated = 0;
  for (int run = 0; run < 30; ++run) {
    const auto r = run_mechanism(sys, Mechanism::TruncatedGaussian, 0.5, 20, 11, run);
    if (r.truncated_at >= 0) {
      ++truncated;
      CHECK(r.steps.size() == static_cast<size_t>(r.truncated_at));
    }
  }
  MESSAGE("truncated gaussian runs: ", truncated, "/30");
}

TEST_CASE("lp dump instance is deterministic") {
  ExperimentConfig cfg;
  const LinearSystem sys = volpriv::load_system(cfg);
  const std::string a = dump_release_lp(cfg, sys, 3);
  const std::string b = dump_release_lp(cfg, sys, 3);
  CHECK(a == b);
  CHECK(a.find("minimize leak_bound") != std::string::npos);
  CHECK_THROWS_AS(dump_release_lp(cfg, sys, 0), std::invalid_argument);
}
