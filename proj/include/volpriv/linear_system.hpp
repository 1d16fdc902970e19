#ifndef VOLPRIV_LINEAR_SYSTEM_HPP_
#define VOLPRIV_LINEAR_SYSTEM_HPP_

#include <Eigen/Dense>

#include <string>
#include <utility>
#include <vector>

#include "volpriv/interval.hpp"
#include "volpriv/rng.hpp"

namespace volpriv {

/// How per-step disturbances are realized inside simulate().
enum class DisturbanceModel {
  PeriodicDemand,   // the production-inventory demand/productivity signals (2-D)
  UniformInBounds,  // independent uniform draws inside the disturbance boxes
};

/// Two-block linear system with invertible public-state couplings:
///   x_k = a1 x_{k-1} + a2 y_{k-1} + b1 w^x_k
///   y_k = a3 x_{k-1} + a4 y_{k-1} + b2 w^y_k
/// with per-step disturbance boxes and initial-state boxes. x is the public
/// block, y the private block.
struct LinearSystem {
  Eigen::MatrixXd a1, a2, a3, a4;
  Eigen::MatrixXd b1, b2;
  Intervald wx_bounds, wy_bounds;
  Intervald x0_bounds, y0_bounds;
  DisturbanceModel disturbance = DisturbanceModel::UniformInBounds;

  Eigen::Index state_dim() const { return a1.rows(); }
};

/// Checks every structural invariant (square invertible a1/a2, mutually
/// consistent dimensions). Returns one message per violation; empty means ok.
std::vector<std::string> validate(const LinearSystem& sys);

/// The production-inventory benchmark system.
LinearSystem case_study_preset();

/// Realized disturbance pair (w^x_k, w^y_k) for step k >= 1.
std::pair<Eigen::VectorXd, Eigen::VectorXd> sample_disturbance(const LinearSystem& sys, int k,
                                                               RngStream& rng);

/// States over k = 0..K together with the realized disturbances that generated
/// them. wxs[k-1]/wys[k-1] drive the transition into step k.
struct Trajectory {
  std::vector<Eigen::VectorXd> xs, ys;
  std::vector<Eigen::VectorXd> wxs, wys;
};

/// Samples x_0, y_0 uniformly from the initial boxes and rolls the recursion
/// forward. Pure in (sys, horizon, rng state): identical streams give
/// identical trajectories.
Trajectory simulate(const LinearSystem& sys, int horizon, RngStream& rng);

/// Uniform sample inside a box, one independent draw per coordinate.
Eigen::VectorXd uniform_in(const Intervald& box, RngStream& rng);

}  // namespace volpriv

#endif  // VOLPRIV_LINEAR_SYSTEM_HPP_
