#ifndef VOLPRIV_FILTER_HPP_
#define VOLPRIV_FILTER_HPP_

#include <Eigen/Dense>

#include <optional>
#include <utility>

#include "volpriv/inference.hpp"
#include "volpriv/interval.hpp"
#include "volpriv/linear_system.hpp"
#include "volpriv/lp.hpp"
#include "volpriv/rng.hpp"

namespace volpriv {

/// Randomized seed box around the true public state inside the public
/// prediction box. The stretch draws are scaled so the seed respects both the
/// prediction bounds and the surrogate-volume budget; a degenerate distance to
/// one face forces that stretch to zero.
Intervald make_seed_set(const Eigen::Ref<const Eigen::VectorXd>& x_true, const Intervald& x_pred,
                        double eps_x, RngStream& rng);

/// Deterministic core of make_seed_set: u_alpha/u_beta in [0, 1] select the
/// downward/upward stretches inside their admissible ranges.
Intervald make_seed_set_from_draws(const Eigen::Ref<const Eigen::VectorXd>& x_true,
                                   const Intervald& x_pred, double eps_x, double u_alpha,
                                   double u_beta);

/// Release-optimization LP over decision vector
///   (leak bound, release lower, release upper, public delta width, private delta width):
/// minimize the leak bound subject to the surrogate budget, the
/// seed-inside-prediction ordering block, and the epigraph rows of the clamped
/// difference-set widths expressed through the backward-calibration images of
/// the release bounds.
LpProblem build_release_lp(const LinearSystem& sys, const Intervald& x_prior,
                           const Intervald& y_prior, const Intervald& x_pred,
                           const Intervald& s_seed, double eps_x);

/// Defender state: a mirror of the adversary recursion (both sides see the
/// same released sets, so the mirror stays bit-equal), the utility budget, and
/// the randomization stream. The mirror is absent until the first release
/// initializes it.
struct FilterState {
  std::optional<AdversaryBelief> belief;
  double eps_x = 0.0;
  RngStream rng;

  FilterState(double eps_x_budget, RngStream stream) : eps_x(eps_x_budget), rng(stream) {}
};

struct ReleaseRecord {
  Intervald m_star;          // released observation set
  Intervald s_seed;          // randomized seed it must contain
  double eps_y_star = 0.0;   // optimized leak bound (NaN when no LP ran)
  LpStatus lp_status = LpStatus::Optimal;
  bool lp_used = false;
};

struct FilterStepResult {
  ReleaseRecord release;
  StepReport report;
};

/// First release: the seed is expanded symmetrically per dimension until the
/// surrogate budget is exhausted, then clipped to the public prior; there is
/// no backward calibration to optimize against yet. Initializes the mirror
/// belief.
FilterStepResult filter_step_k0(FilterState& fs, const LinearSystem& sys,
                                const Eigen::Ref<const Eigen::VectorXd>& x0);

/// One filter step for k >= 1: draw the seed, optimize the release set, and
/// advance the mirror belief with the released set.
FilterStepResult filter_step(FilterState& fs, const LinearSystem& sys,
                             const Eigen::Ref<const Eigen::VectorXd>& x_true);

/// Static quantizer over per-dimension-equal bins. Bins are anchored at the
/// initial public prior's center so edges near the operating range stay exact;
/// `cover` bounds the domain over which releases are defined.
struct QuantizerGrid {
  Eigen::VectorXd anchor;
  double bin_width = 0.0;
  Intervald cover;
};

class CoverMissError : public std::runtime_error {
 public:
  explicit CoverMissError(const std::string& what) : std::runtime_error(what) {}
};

/// Grid whose cover is the outer reachable box of the public state over the
/// horizon (open-loop prediction hull from the initial priors).
QuantizerGrid make_quantizer_grid(const LinearSystem& sys, double eps_x, int horizon);

/// The closed bin containing x (half-open assignment: a boundary point belongs
/// to the bin whose lower edge it is). Throws CoverMissError outside the cover.
Intervald quantizer_release(const Eigen::Ref<const Eigen::VectorXd>& x,
                            const QuantizerGrid& grid);

/// Additive bounded-noise baseline: per-coordinate noise drawn by rejection
/// from a zero-mean normal with standard deviation eps_x truncated to
/// [-eps_x/2, eps_x/2]; the release is a fixed-width box around the noised
/// state. The true state is not guaranteed to lie in the release.
Intervald truncated_gaussian_release(const Eigen::Ref<const Eigen::VectorXd>& x, double eps_x,
                                     RngStream& rng);

/// Scalar truncated-normal draw used by the baseline (exposed for tests).
double truncated_gaussian_noise(double eps_x, RngStream& rng);

}  // namespace volpriv

#endif  // VOLPRIV_FILTER_HPP_
