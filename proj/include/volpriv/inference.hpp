#ifndef VOLPRIV_INFERENCE_HPP_
#define VOLPRIV_INFERENCE_HPP_

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "volpriv/ccg.hpp"
#include "volpriv/interval.hpp"
#include "volpriv/linear_system.hpp"

namespace volpriv {

/// Pipeline stage at which an observation turned out to be inconsistent with
/// the belief recursion. An honest release mechanism can never trigger this.
enum class ObservationStage { Initial, PublicBackward, PrivateBackward, PublicPosterior };

const char* to_string(ObservationStage stage);

class InconsistentObservation : public std::runtime_error {
 public:
  InconsistentObservation(ObservationStage stage, int step)
      : std::runtime_error("inconsistent observation at step " + std::to_string(step) +
                           " (stage: " + to_string(stage) + ")"),
        stage(stage),
        step(step) {}

  ObservationStage stage;
  int step;
};

class HorizonCapExceeded : public std::runtime_error {
 public:
  explicit HorizonCapExceeded(int step)
      : std::runtime_error("exact set recursion capped before step " + std::to_string(step)),
        step(step) {}
  int step;
};

/// Recursion state of the set-membership inference attack: posterior and
/// predicted boxes for both state blocks, the private-state center of the
/// latest prediction, and the running maximum of observation radii (feeds the
/// posterior-radius bound).
struct AdversaryBelief {
  Intervald x_post, y_post;
  Intervald x_pred, y_pred;
  Eigen::VectorXd y_center_prev;
  Eigen::VectorXd obs_radius_max;
  int k = 0;
  bool init_clamped = false;
};

struct Measures {
  double privacy_vol = 0.0;
  double privacy_surrogate = 0.0;
  double utility = 0.0;
  bool utility_degenerate = false;
};

/// Named bound-check outcomes with residuals (positive residual = violation).
struct BoundChecks {
  bool radius_ok = true;
  double radius_residual = 0.0;
  bool reduction_lower_ok = true, reduction_upper_ok = true;
  double reduction_lower_residual = 0.0, reduction_upper_residual = 0.0;
  bool sandwich_lower_ok = true, sandwich_upper_ok = true;
  double sandwich_lower_residual = 0.0, sandwich_upper_residual = 0.0;
  double route_residual = 0.0;  // disagreement between the two leak evaluations
};

struct StepReport {
  Measures measures;
  double leak_surrogate = 0.0;    // clamped difference-set route (>= 0)
  double leak_subtraction = 0.0;  // prediction-minus-posterior surrogate volumes
  double center_shift = 0.0;      // l1 movement of the private central estimate
  Eigen::VectorXd delta_x_width, delta_y_width;  // clamped difference-set widths
  BoundChecks checks;
};

/// Sum of absolute entries (the matrix norm used by the reduction bounds).
double matrix_l1(const Eigen::Ref<const Eigen::MatrixXd>& m);

/// Full width of the clamped difference set between a prior box and its
/// backward-calibrated counterpart, per dimension:
///   max{upper(prior) - upper(backward), 0} - min{lower(prior) - lower(backward), 0}.
/// Single source of truth shared by the step reports, the bound checkers and
/// the release-optimization constraint rows.
Eigen::VectorXd clamped_difference_width(const Intervald& prior, const Intervald& backward);

struct LeakRoutes {
  double subtraction = 0.0;  // surrogate(prediction) - surrogate(posterior)
  double composed = 0.0;     // |a3| dx + |a4| dy route over clamped widths
};

/// Both evaluation routes of the one-step uncertainty reduction. They agree up
/// to rounding; callers assert the tolerance. Throws std::logic_error if the
/// posterior is not contained in the prediction (belief invariant broken).
LeakRoutes uncertainty_reduction(const Intervald& y_pred, const Intervald& y_post,
                                 const Eigen::Ref<const Eigen::VectorXd>& delta_x_width,
                                 const Eigen::Ref<const Eigen::VectorXd>& delta_y_width,
                                 const LinearSystem& sys);

/// Belief from the initial observation set: the private posterior equals the
/// private prior regardless of the observation; the public posterior is the
/// observation clamped to the public prior (clamping flagged). Throws
/// InconsistentObservation if they are disjoint.
AdversaryBelief init_belief(const LinearSystem& sys, const Intervald& m0);

/// One-step-ahead tightest interval predictions (public, private) from the
/// current posteriors.
std::pair<Intervald, Intervald> predict(const AdversaryBelief& belief, const LinearSystem& sys);

/// One attack step: backward calibration of both priors against the released
/// set, re-prediction, and forward inference, yielding the posterior boxes and
/// a report with measures, leak, and bound-check results. Throws
/// InconsistentObservation naming the stage whose intersection came up empty.
std::pair<AdversaryBelief, StepReport> attack_step(const AdversaryBelief& belief,
                                                   const LinearSystem& sys, const Intervald& m);

Measures measures(const AdversaryBelief& belief);

struct RadiusBoundCheck {
  bool ok = true;
  double residual = 0.0;  // max elementwise excess over the bound
};

/// Posterior-radius bound: radius(y_post) elementwise against the closed form
/// driven by the running max observation radius and the disturbance radii.
RadiusBoundCheck check_radius_bound(const AdversaryBelief& belief, const LinearSystem& sys,
                                    const Eigen::Ref<const Eigen::VectorXd>& obs_radius_max,
                                    double tol = 1e-9);

struct ReductionBoundsCheck {
  bool lower_ok = true, upper_ok = true;
  double lower_residual = 0.0, upper_residual = 0.0;
};

/// Leak bounds: twice the center shift from below, the weighted clamped
/// difference-set volumes from above.
ReductionBoundsCheck check_reduction_bounds(const StepReport& step, const LinearSystem& sys,
                                            double tol = 1e-9);

struct SandwichCheck {
  bool lower_ok = true, upper_ok = true;
  double lower_residual = 0.0, upper_residual = 0.0;
};

/// Posterior privacy sandwich between the prediction volume minus the leak
/// upper bound and the prediction volume minus twice the center shift.
SandwichCheck check_privacy_sandwich(const StepReport& step, const Intervald& y_pred,
                                     const LinearSystem& sys, double tol = 1e-9);

// ---------------------------------------------------------------------------
// Exact backend over constrained convex generators. Each recursion step is
// exact set algebra; interval hulls (LP-backed) are extracted on demand by the
// caller. Generator/constraint counts grow geometrically, so the recursion is
// horizon-capped.
// ---------------------------------------------------------------------------

struct CcgCounts {
  Eigen::Index x_generators = 0, x_constraints = 0;
  Eigen::Index y_generators = 0, y_constraints = 0;
};

struct CcgBelief {
  Ccg x_post, y_post;
  int k = 0;
  int horizon_cap = 8;
  std::vector<CcgCounts> counts;  // one entry per completed step, index = k
};

CcgBelief init_ccg_belief(const LinearSystem& sys, const Ccg& m0, int horizon_cap = 8);

/// Exact (public, private) prediction sets from the current posteriors.
std::pair<Ccg, Ccg> predict_ccg(const CcgBelief& belief, const LinearSystem& sys);

/// One exact attack step. Emptiness is not tested eagerly (it cannot occur for
/// honest releases); it surfaces through hull extraction. Throws
/// HorizonCapExceeded beyond the cap.
CcgBelief attack_step_ccg(const CcgBelief& belief, const LinearSystem& sys, const Ccg& m);

}  // namespace volpriv

#endif  // VOLPRIV_INFERENCE_HPP_
