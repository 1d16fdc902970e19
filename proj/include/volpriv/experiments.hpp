#ifndef VOLPRIV_EXPERIMENTS_HPP_
#define VOLPRIV_EXPERIMENTS_HPP_

#include <optional>
#include <string>
#include <vector>

#include "volpriv/filter.hpp"
#include "volpriv/inference.hpp"
#include "volpriv/linear_system.hpp"

namespace volpriv {

enum class Mechanism { OptimalFilter, Quantizer, TruncatedGaussian };
enum class Backend { Interval, Ccg };

const char* to_string(Mechanism mechanism);
const char* to_string(Backend backend);

struct ExperimentConfig {
  std::string system = "preset";  // "preset" or a system-definition file path
  int horizon = 60;
  int runs = 20;
  std::uint64_t seed = 1;
  Mechanism mechanism = Mechanism::OptimalFilter;
  std::vector<double> eps_x = {0.5};
  Backend backend = Backend::Interval;
  int ccg_horizon_cap = 8;
  std::string output_dir = ".";
};

/// One message per violated config invariant; empty means ok.
std::vector<std::string> validate(const ExperimentConfig& cfg);

/// Parses a JSON config file. Unknown keys are rejected; missing keys keep
/// their defaults. Throws std::runtime_error with the offending key.
ExperimentConfig load_config(const std::string& path);

/// Resolves the configured system ("preset" or a JSON file with row-major
/// matrices and lower/upper interval lists). Validates before returning.
LinearSystem load_system(const ExperimentConfig& cfg);
LinearSystem load_system_file(const std::string& path);
void save_system_file(const LinearSystem& sys, const std::string& path);

/// Everything recorded about one executed step of a release mechanism.
struct MechanismStep {
  int k = 0;
  Eigen::VectorXd x_true, y_true;
  Intervald released;
  std::optional<Intervald> seed;  // optimal filter only
  double eps_y_star = std::numeric_limits<double>::quiet_NaN();
  AdversaryBelief belief;  // state after consuming the release
  StepReport report;       // k = 0 carries measures only
};

struct MechanismRun {
  std::vector<MechanismStep> steps;
  int truncated_at = -1;  // step at which the adversary recursion aborted (-1: none)
};

/// Runs one seeded trajectory through a release mechanism and the interval
/// inference recursion. Deterministic in (cfg seed, run index); the trajectory
/// stream does not depend on mechanism or budget, so matched run indices share
/// the same ground truth. An inconsistent observation (possible only for the
/// additive-noise baseline) truncates the run at that step.
MechanismRun run_mechanism(const LinearSystem& sys, Mechanism mechanism, double eps_x, int horizon,
                           std::uint64_t seed, int run_index,
                           const QuantizerGrid* grid = nullptr);

/// Exact-backend evaluation of a released stream: interval hulls of the
/// public/private posterior sets and the recorded composition counts, one
/// entry per step k = 0..cap.
struct CcgStepEval {
  int k = 0;
  Intervald x_hull, y_hull;
  CcgCounts counts;
};
std::vector<CcgStepEval> evaluate_ccg(const LinearSystem& sys,
                                      const std::vector<Intervald>& released, int cap);

struct TradeoffPoint {
  Mechanism mechanism = Mechanism::OptimalFilter;
  double eps_x = 0.0;
  double mean_privacy_vol = 0.0;
  double mean_privacy_surrogate = 0.0;
  double se_privacy_surrogate = 0.0;
  double mean_utility = 0.0;
  double se_utility = 0.0;
  double norm_privacy = 0.0;
  double norm_utility = 0.0;
  int runs = 0;
  int truncated_runs = 0;
  long steps = 0;
};

struct TradeoffTable {
  std::vector<TradeoffPoint> points;  // ordered by (mechanism, eps index)
  double privacy_scale_min = 0.0, privacy_scale_max = 0.0;
  double utility_scale_min = 0.0, utility_scale_max = 0.0;
};

/// Sweeps all three mechanisms over the configured budgets. Normalization is
/// min-max anchored to the additive-noise baseline's sweep and applied to all
/// mechanisms (other mechanisms may land outside [0,1]).
TradeoffTable run_tradeoff(const ExperimentConfig& cfg, const LinearSystem& sys);

struct AuditSummary {
  long steps = 0;
  long route_violations = 0;      // leak route disagreement beyond tolerance
  long radius_violations = 0;
  long reduction_violations = 0;
  long sandwich_violations = 0;
  long soundness_violations = 0;  // true state escaping a posterior box
  double max_route_residual = 0.0;
  double max_radius_residual = 0.0;
  double max_reduction_residual = 0.0;
  double max_sandwich_residual = 0.0;
  int truncated_runs = 0;

  bool clean() const {
    return route_violations + radius_violations + reduction_violations + sandwich_violations +
               soundness_violations ==
           0;
  }
};

/// Aggregates per-step checker outcomes; exposed separately so doctored
/// reports can be fed through it in tests.
void accumulate_audit(AuditSummary& summary, const MechanismStep& step, bool sound_x, bool sound_y,
                      double tol = 1e-9);

// CSV emitters. Every file starts with a one-line schema comment and a header
// row; floats are printed at nine significant digits.
void write_timeseries_csv(const ExperimentConfig& cfg, const LinearSystem& sys,
                          const std::string& path);
void write_tradeoff_csv(const ExperimentConfig& cfg, const TradeoffTable& table,
                        const std::string& path);
AuditSummary write_audit_csv(const ExperimentConfig& cfg, const LinearSystem& sys,
                             const std::string& path);

/// Renders the release-optimization LP the optimal filter would solve at the
/// given step of run 0 (first configured budget).
std::string dump_release_lp(const ExperimentConfig& cfg, const LinearSystem& sys, int step);

std::string format_g9(double v);

}  // namespace volpriv

#endif  // VOLPRIV_EXPERIMENTS_HPP_
