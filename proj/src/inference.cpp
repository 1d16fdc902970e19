#include "volpriv/inference.hpp"

#include <cmath>
#include <limits>

namespace volpriv {

const char* to_string(ObservationStage stage) {
  switch (stage) {
    case ObservationStage::Initial: return "initial observation";
    case ObservationStage::PublicBackward: return "public backward calibration";
    case ObservationStage::PrivateBackward: return "private backward calibration";
    case ObservationStage::PublicPosterior: return "public posterior";
  }
  return "?";
}

double matrix_l1(const Eigen::Ref<const Eigen::MatrixXd>& m) { return m.cwiseAbs().sum(); }

Eigen::VectorXd clamped_difference_width(const Intervald& prior, const Intervald& backward) {
  const Eigen::VectorXd up = (prior.upper() - backward.upper()).cwiseMax(0.0);
  const Eigen::VectorXd down = (prior.lower() - backward.lower()).cwiseMin(0.0);
  return up - down;
}

LeakRoutes uncertainty_reduction(const Intervald& y_pred, const Intervald& y_post,
                                 const Eigen::Ref<const Eigen::VectorXd>& delta_x_width,
                                 const Eigen::Ref<const Eigen::VectorXd>& delta_y_width,
                                 const LinearSystem& sys) {
  if (!y_post.subset_of(y_pred, 1e-9))
    throw std::logic_error("uncertainty_reduction: posterior exceeds the prediction");
  LeakRoutes routes;
  routes.subtraction = y_pred.surrogate_volume() - y_post.surrogate_volume();
  routes.composed =
      (sys.a3.cwiseAbs() * delta_x_width + sys.a4.cwiseAbs() * delta_y_width).sum();
  return routes;
}

AdversaryBelief init_belief(const LinearSystem& sys, const Intervald& m0) {
  AdversaryBelief belief;
  auto x0 = intersect(m0, sys.x0_bounds);
  if (!x0) throw InconsistentObservation(ObservationStage::Initial, 0);
  belief.x_post = *x0;
  belief.y_post = sys.y0_bounds;
  belief.x_pred = sys.x0_bounds;
  belief.y_pred = sys.y0_bounds;
  belief.y_center_prev = sys.y0_bounds.center();
  belief.obs_radius_max = m0.radius();
  belief.k = 0;
  belief.init_clamped = !m0.subset_of(sys.x0_bounds);
  return belief;
}

std::pair<Intervald, Intervald> predict(const AdversaryBelief& belief, const LinearSystem& sys) {
  Intervald x_pred = minkowski_sum(
      minkowski_sum(psi_apply(sys.a1, belief.x_post), psi_apply(sys.a2, belief.y_post)),
      psi_apply(sys.b1, sys.wx_bounds));
  Intervald y_pred = minkowski_sum(
      minkowski_sum(psi_apply(sys.a3, belief.x_post), psi_apply(sys.a4, belief.y_post)),
      psi_apply(sys.b2, sys.wy_bounds));
  return {std::move(x_pred), std::move(y_pred)};
}

Measures measures(const AdversaryBelief& belief) {
  Measures m;
  m.privacy_vol = belief.y_post.volume();
  m.privacy_surrogate = belief.y_post.surrogate_volume();
  const double x_vol = belief.x_post.volume();
  m.utility_degenerate = x_vol == 0.0;
  m.utility = m.utility_degenerate ? std::numeric_limits<double>::infinity() : 1.0 / x_vol;
  return m;
}

RadiusBoundCheck check_radius_bound(const AdversaryBelief& belief, const LinearSystem& sys,
                                    const Eigen::Ref<const Eigen::VectorXd>& obs_radius_max,
                                    double tol) {
  const Eigen::MatrixXd a2_inv = sys.a2.inverse();
  const Eigen::MatrixXd a4_abs = sys.a4.cwiseAbs();
  const Eigen::MatrixXd gain = sys.a3.cwiseAbs() + a4_abs * a2_inv.cwiseAbs() +
                               a4_abs * (a2_inv * sys.a1).cwiseAbs();
  const Eigen::VectorXd rhs = gain * obs_radius_max +
                              a4_abs * (a2_inv * sys.b1).cwiseAbs() * sys.wx_bounds.radius() +
                              sys.b2.cwiseAbs() * sys.wy_bounds.radius();
  const Eigen::VectorXd excess = belief.y_post.radius() - rhs;
  RadiusBoundCheck check;
  check.residual = excess.maxCoeff();
  check.ok = check.residual <= tol;
  return check;
}

ReductionBoundsCheck check_reduction_bounds(const StepReport& step, const LinearSystem& sys,
                                            double tol) {
  ReductionBoundsCheck check;
  const double lower = 2.0 * step.center_shift;
  const double upper = matrix_l1(sys.a3) * step.delta_x_width.sum() +
                       matrix_l1(sys.a4) * step.delta_y_width.sum();
  check.lower_residual = lower - step.leak_surrogate;
  check.upper_residual = step.leak_surrogate - upper;
  check.lower_ok = check.lower_residual <= tol;
  check.upper_ok = check.upper_residual <= tol;
  return check;
}

SandwichCheck check_privacy_sandwich(const StepReport& step, const Intervald& y_pred,
                                     const LinearSystem& sys, double tol) {
  SandwichCheck check;
  const double pred = y_pred.surrogate_volume();
  const double post = step.measures.privacy_surrogate;
  const double lower = pred - matrix_l1(sys.a3) * step.delta_x_width.sum() -
                       matrix_l1(sys.a4) * step.delta_y_width.sum();
  const double upper = pred - 2.0 * step.center_shift;
  check.lower_residual = lower - post;
  check.upper_residual = post - upper;
  check.lower_ok = check.lower_residual <= tol;
  check.upper_ok = check.upper_residual <= tol;
  return check;
}

std::pair<AdversaryBelief, StepReport> attack_step(const AdversaryBelief& belief,
                                                   const LinearSystem& sys, const Intervald& m) {
  const int k = belief.k + 1;
  const Eigen::MatrixXd a1_inv = sys.a1.inverse();
  const Eigen::MatrixXd a2_inv = sys.a2.inverse();

  auto [x_pred, y_pred] = predict(belief, sys);

  // backward calibration of both state blocks against the released set
  const Intervald back_x = minkowski_sum(
      minkowski_sum(psi_apply(a1_inv, m), psi_apply((-(a1_inv * sys.a2)).eval(), belief.y_post)),
      psi_apply((-(a1_inv * sys.b1)).eval(), sys.wx_bounds));
  const Intervald back_y = minkowski_sum(
      minkowski_sum(psi_apply(a2_inv, m), psi_apply((-(a2_inv * sys.a1)).eval(), belief.x_post)),
      psi_apply((-(a2_inv * sys.b1)).eval(), sys.wx_bounds));

  auto x_cal = intersect(back_x, belief.x_post);
  if (!x_cal) throw InconsistentObservation(ObservationStage::PublicBackward, k);
  auto y_cal = intersect(back_y, belief.y_post);
  if (!y_cal) throw InconsistentObservation(ObservationStage::PrivateBackward, k);

  // re-prediction from the calibrated sets, then the posterior boxes
  const Intervald repred = minkowski_sum(
      minkowski_sum(psi_apply(sys.a1, *x_cal), psi_apply(sys.a2, *y_cal)),
      psi_apply(sys.b1, sys.wx_bounds));
  auto x_post = intersect(m, repred);
  if (!x_post) throw InconsistentObservation(ObservationStage::PublicPosterior, k);
  Intervald y_post = minkowski_sum(
      minkowski_sum(psi_apply(sys.a3, *x_cal), psi_apply(sys.a4, *y_cal)),
      psi_apply(sys.b2, sys.wy_bounds));

  AdversaryBelief next;
  next.x_post = *x_post;
  next.y_post = y_post;
  next.x_pred = x_pred;
  next.y_pred = y_pred;
  next.y_center_prev = y_pred.center();
  next.obs_radius_max = belief.obs_radius_max.cwiseMax(m.radius());
  next.k = k;
  next.init_clamped = belief.init_clamped;

  StepReport report;
  report.measures = measures(next);
  report.delta_x_width = clamped_difference_width(belief.x_post, back_x);
  report.delta_y_width = clamped_difference_width(belief.y_post, back_y);
  const LeakRoutes routes =
      uncertainty_reduction(y_pred, y_post, report.delta_x_width, report.delta_y_width, sys);
  report.leak_surrogate = routes.composed;
  report.leak_subtraction = routes.subtraction;
  report.center_shift = (y_post.center() - y_pred.center()).lpNorm<1>();

  report.checks.route_residual = std::abs(routes.composed - routes.subtraction);
  const RadiusBoundCheck radius = check_radius_bound(next, sys, next.obs_radius_max);
  report.checks.radius_ok = radius.ok;
  report.checks.radius_residual = radius.residual;
  const ReductionBoundsCheck reduction = check_reduction_bounds(report, sys);
  report.checks.reduction_lower_ok = reduction.lower_ok;
  report.checks.reduction_upper_ok = reduction.upper_ok;
  report.checks.reduction_lower_residual = reduction.lower_residual;
  report.checks.reduction_upper_residual = reduction.upper_residual;
  const SandwichCheck sandwich = check_privacy_sandwich(report, y_pred, sys);
  report.checks.sandwich_lower_ok = sandwich.lower_ok;
  report.checks.sandwich_upper_ok = sandwich.upper_ok;
  report.checks.sandwich_lower_residual = sandwich.lower_residual;
  report.checks.sandwich_upper_residual = sandwich.upper_residual;

  return {std::move(next), std::move(report)};
}

// ---------------------------------------------------------------------------
// Exact backend
// ---------------------------------------------------------------------------

namespace {

CcgCounts counts_of(const Ccg& x_post, const Ccg& y_post) {
  return CcgCounts{x_post.num_generators(), x_post.num_constraints(), y_post.num_generators(),
                   y_post.num_constraints()};
}

}  // namespace

CcgBelief init_ccg_belief(const LinearSystem& sys, const Ccg& m0, int horizon_cap) {
  CcgBelief belief;
  belief.x_post = intersect(m0, from_interval(sys.x0_bounds));
  belief.y_post = from_interval(sys.y0_bounds);
  belief.k = 0;
  belief.horizon_cap = horizon_cap;
  belief.counts.push_back(counts_of(belief.x_post, belief.y_post));
  return belief;
}

std::pair<Ccg, Ccg> predict_ccg(const CcgBelief& belief, const LinearSystem& sys) {
  Ccg x_pred = minkowski_sum(
      minkowski_sum(linear_map(sys.a1, belief.x_post), linear_map(sys.a2, belief.y_post)),
      linear_map(sys.b1, from_interval(sys.wx_bounds)));
  Ccg y_pred = minkowski_sum(
      minkowski_sum(linear_map(sys.a3, belief.x_post), linear_map(sys.a4, belief.y_post)),
      linear_map(sys.b2, from_interval(sys.wy_bounds)));
  return {std::move(x_pred), std::move(y_pred)};
}

CcgBelief attack_step_ccg(const CcgBelief& belief, const LinearSystem& sys, const Ccg& m) {
  const int k = belief.k + 1;
  if (k > belief.horizon_cap) throw HorizonCapExceeded(k);

  const Eigen::MatrixXd a1_inv = sys.a1.inverse();
  const Eigen::MatrixXd a2_inv = sys.a2.inverse();
  const Ccg wx = from_interval(sys.wx_bounds);

  const Ccg back_x =
      minkowski_sum(minkowski_sum(linear_map(a1_inv, m),
                                  linear_map((-(a1_inv * sys.a2)).eval(), belief.y_post)),
                    linear_map((-(a1_inv * sys.b1)).eval(), wx));
  const Ccg back_y =
      minkowski_sum(minkowski_sum(linear_map(a2_inv, m),
                                  linear_map((-(a2_inv * sys.a1)).eval(), belief.x_post)),
                    linear_map((-(a2_inv * sys.b1)).eval(), wx));

  const Ccg x_cal = intersect(back_x, belief.x_post);
  const Ccg y_cal = intersect(back_y, belief.y_post);

  const Ccg repred = minkowski_sum(
      minkowski_sum(linear_map(sys.a1, x_cal), linear_map(sys.a2, y_cal)), linear_map(sys.b1, wx));

  CcgBelief next;
  next.x_post = intersect(m, repred);
  next.y_post = minkowski_sum(minkowski_sum(linear_map(sys.a3, x_cal), linear_map(sys.a4, y_cal)),
                              linear_map(sys.b2, from_interval(sys.wy_bounds)));
  next.k = k;
  next.horizon_cap = belief.horizon_cap;
  next.counts = belief.counts;
  next.counts.push_back(counts_of(next.x_post, next.y_post));
  return next;
}

}  // namespace volpriv
