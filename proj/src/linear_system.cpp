#include "volpriv/linear_system.hpp"

#include <cmath>

namespace volpriv {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

std::vector<std::string> validate(const LinearSystem& sys) {
  std::vector<std::string> errors;
  const Eigen::Index n = sys.a1.rows();

  auto square = [&](const Eigen::MatrixXd& m, const char* name) {
    if (m.rows() != n || m.cols() != n)
      errors.push_back(std::string(name) + ": expected " + std::to_string(n) + "x" +
                       std::to_string(n));
  };
  square(sys.a1, "a1");
  square(sys.a2, "a2");
  square(sys.a3, "a3");
  square(sys.a4, "a4");

  auto invertible = [&](const Eigen::MatrixXd& m, const char* name) {
    if (m.rows() == m.cols() && m.rows() == n && std::abs(m.determinant()) <= 1e-12)
      errors.push_back(std::string(name) + ": singular (|det| <= 1e-12)");
  };
  invertible(sys.a1, "a1");
  invertible(sys.a2, "a2");

  if (sys.b1.rows() != n) errors.push_back("b1: row count differs from the state dimension");
  if (sys.b2.rows() != n) errors.push_back("b2: row count differs from the state dimension");
  if (sys.b1.cols() != sys.wx_bounds.dim())
    errors.push_back("wx_bounds: dimension differs from b1 columns");
  if (sys.b2.cols() != sys.wy_bounds.dim())
    errors.push_back("wy_bounds: dimension differs from b2 columns");
  if (sys.x0_bounds.dim() != n) errors.push_back("x0_bounds: dimension differs from the state");
  if (sys.y0_bounds.dim() != n) errors.push_back("y0_bounds: dimension differs from the state");
  if (sys.disturbance == DisturbanceModel::PeriodicDemand &&
      (sys.wx_bounds.dim() != 2 || sys.wy_bounds.dim() != 2))
    errors.push_back("disturbance: the periodic demand signals are two-dimensional");
  return errors;
}

LinearSystem case_study_preset() {
  LinearSystem sys;
  sys.a1 = Eigen::Matrix2d::Identity();
  sys.a2 = (Eigen::Matrix2d() << 0.40, 0.80, 0.60, 0.20).finished();
  sys.a3 = (Eigen::Matrix2d() << 0.50, -0.90, -0.10, -0.10).finished();
  sys.a4 = (Eigen::Matrix2d() << -0.10, -0.90, 0.10, 0.00).finished();
  sys.b1 = -Eigen::Matrix2d::Identity();
  sys.b2 = Eigen::Vector2d(4.20, 2.40).asDiagonal();
  sys.wx_bounds = Intervald(Eigen::Vector2d(1.74, 1.91), Eigen::Vector2d(1.94, 2.01));
  sys.wy_bounds = Intervald(Eigen::Vector2d(0.91, 0.23), Eigen::Vector2d(0.95, 0.43));
  sys.x0_bounds = Intervald(Eigen::Vector2d(1.00, 0.24), Eigen::Vector2d(1.20, 0.40));
  sys.y0_bounds = Intervald(Eigen::Vector2d(2.40, 0.60), Eigen::Vector2d(3.70, 1.30));
  sys.disturbance = DisturbanceModel::PeriodicDemand;
  return sys;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> sample_disturbance(const LinearSystem& sys, int k,
                                                               RngStream& rng) {
  if (k < 0) throw std::invalid_argument("sample_disturbance: negative time index");
  if (sys.disturbance == DisturbanceModel::PeriodicDemand) {
    // Noisy-period demand and productivity fluctuations around their nominal
    // levels; periods are re-drawn every step.
    const double rho = rng.uniform01();
    const double gamma = rng.uniform01();
    const double tau = rng.uniform01();
    Eigen::VectorXd wx(2), wy(2);
    wx << 1.88 + 0.03 * std::cos(kTwoPi * k / (30.0 + 7.0 * rho)), 1.94;
    wy << 0.944 + 0.006 * std::cos(kTwoPi * k / (7.0 + 2.0 * gamma)),
        0.33 + 0.094 * std::sin(kTwoPi * k / (7.0 + 4.0 * tau));
    return {wx, wy};
  }
  return {uniform_in(sys.wx_bounds, rng), uniform_in(sys.wy_bounds, rng)};
}

Eigen::VectorXd uniform_in(const Intervald& box, RngStream& rng) {
  Eigen::VectorXd v(box.dim());
  for (Eigen::Index i = 0; i < box.dim(); ++i) v[i] = rng.uniform(box.lower()[i], box.upper()[i]);
  return v;
}

Trajectory simulate(const LinearSystem& sys, int horizon, RngStream& rng) {
  if (horizon < 1) throw std::invalid_argument("simulate: horizon must be >= 1");
  Trajectory traj;
  traj.xs.reserve(static_cast<size_t>(horizon) + 1);
  traj.ys.reserve(static_cast<size_t>(horizon) + 1);
  traj.wxs.reserve(static_cast<size_t>(horizon));
  traj.wys.reserve(static_cast<size_t>(horizon));

  traj.xs.push_back(uniform_in(sys.x0_bounds, rng));
  traj.ys.push_back(uniform_in(sys.y0_bounds, rng));
  for (int k = 1; k <= horizon; ++k) {
    auto [wx, wy] = sample_disturbance(sys, k, rng);
    Eigen::VectorXd x_next = sys.a1 * traj.xs.back() + sys.a2 * traj.ys.back() + sys.b1 * wx;
    Eigen::VectorXd y_next = sys.a3 * traj.xs.back() + sys.a4 * traj.ys.back() + sys.b2 * wy;
    traj.xs.push_back(std::move(x_next));
    traj.ys.push_back(std::move(y_next));
    traj.wxs.push_back(std::move(wx));
    traj.wys.push_back(std::move(wy));
  }
  return traj;
}

}  // namespace volpriv
