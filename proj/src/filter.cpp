#include "volpriv/filter.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace volpriv {

Intervald make_seed_set_from_draws(const Eigen::Ref<const Eigen::VectorXd>& x_true,
                                   const Intervald& x_pred, double eps_x, double u_alpha,
                                   double u_beta) {
  if (!x_pred.contains(x_true))
    throw std::invalid_argument("make_seed_set: true state outside the prediction box");
  const Eigen::VectorXd down = x_true - x_pred.lower();
  const Eigen::VectorXd up = x_pred.upper() - x_true;
  const double down_l1 = down.lpNorm<1>();
  const double up_l1 = up.lpNorm<1>();

  // stretch caps: budget-derived, additionally capped at 1 so the seed cannot
  // leave the prediction box; a zero face distance forces a zero stretch
  const double alpha_cap = down_l1 > 0.0 ? std::min(1.0, eps_x / (2.0 * down_l1)) : 0.0;
  const double beta_cap = up_l1 > 0.0 ? std::min(1.0, eps_x / (2.0 * up_l1)) : 0.0;
  const double alpha = u_alpha * alpha_cap;
  const double beta = u_beta * beta_cap;
  return Intervald(x_true - alpha * down, x_true + beta * up);
}

Intervald make_seed_set(const Eigen::Ref<const Eigen::VectorXd>& x_true, const Intervald& x_pred,
                        double eps_x, RngStream& rng) {
  const double u_alpha = rng.uniform01();
  const double u_beta = rng.uniform01();
  return make_seed_set_from_draws(x_true, x_pred, eps_x, u_alpha, u_beta);
}

LpProblem build_release_lp(const LinearSystem& sys, const Intervald& x_prior, const Intervald& y_prior,
                   const Intervald& x_pred, const Intervald& s_seed, double eps_x) {
  const Eigen::Index n = sys.state_dim();
  if (x_pred.dim() != n || s_seed.dim() != n)
    throw std::invalid_argument("build_release_lp: dimension mismatch");
  const Eigen::Index nv = 1 + 4 * n;  // leak bound, m_lo, m_up, dwx, dwy
  const auto mlo = [&](Eigen::Index i) { return 1 + i; };
  const auto mup = [&](Eigen::Index i) { return 1 + n + i; };
  const auto dwx = [&](Eigen::Index i) { return 1 + 2 * n + i; };
  const auto dwy = [&](Eigen::Index i) { return 1 + 3 * n + i; };

  LpProblem p;
  p.objective = Eigen::VectorXd::Zero(nv);
  p.objective[0] = 1.0;

  p.lower.resize(nv);
  p.upper.resize(nv);
  p.lower[0] = 0.0;
  p.upper[0] = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) {
    p.lower[mlo(i)] = x_pred.lower()[i];
    p.upper[mlo(i)] = s_seed.lower()[i];
    p.lower[mup(i)] = s_seed.upper()[i];
    p.upper[mup(i)] = x_pred.upper()[i];
    p.lower[dwx(i)] = 0.0;
    p.upper[dwx(i)] = std::numeric_limits<double>::infinity();
    p.lower[dwy(i)] = 0.0;
    p.upper[dwy(i)] = std::numeric_limits<double>::infinity();
  }

  std::vector<Eigen::Triplet<double>> rows;
  std::vector<double> rhs;
  Eigen::Index r = 0;
  auto coeff = [&](Eigen::Index col, double v) {
    if (v != 0.0) rows.emplace_back(static_cast<int>(r), static_cast<int>(col), v);
  };

  // leak-bound epigraph: sum_i (|a3| dwx + |a4| dwy)_i <= leak bound
  {
    const Eigen::VectorXd ca3 = sys.a3.cwiseAbs().colwise().sum().transpose();
    const Eigen::VectorXd ca4 = sys.a4.cwiseAbs().colwise().sum().transpose();
    coeff(0, -1.0);
    for (Eigen::Index j = 0; j < n; ++j) coeff(dwx(j), ca3[j]);
    for (Eigen::Index j = 0; j < n; ++j) coeff(dwy(j), ca4[j]);
    rhs.push_back(0.0);
    ++r;
  }
  // surrogate budget on the release
  for (Eigen::Index i = 0; i < n; ++i) {
    coeff(mlo(i), -1.0);
    coeff(mup(i), 1.0);
  }
  rhs.push_back(eps_x);
  ++r;

  // Backward-calibration images of the release are affine in (m_lo, m_up):
  //   lower = pos(H) m_lo + neg(H) m_up + const, upper = neg(H) m_lo + pos(H) m_up + const,
  // where the constant box collects the prior and disturbance terms. The three
  // rows per dimension are the epigraph of clamped_difference_width.
  const Eigen::MatrixXd a1_inv = sys.a1.inverse();
  const Eigen::MatrixXd a2_inv = sys.a2.inverse();
  const Intervald const_x = minkowski_sum(psi_apply((-(a1_inv * sys.a2)).eval(), y_prior),
                                          psi_apply((-(a1_inv * sys.b1)).eval(), sys.wx_bounds));
  const Intervald const_y = minkowski_sum(psi_apply((-(a2_inv * sys.a1)).eval(), x_prior),
                                          psi_apply((-(a2_inv * sys.b1)).eval(), sys.wx_bounds));

  for (int z = 0; z < 2; ++z) {
    const Eigen::MatrixXd& H = z == 0 ? a1_inv : a2_inv;
    const Intervald& constant = z == 0 ? const_x : const_y;
    const Intervald& prior = z == 0 ? x_prior : y_prior;
    const auto dw = [&](Eigen::Index i) { return z == 0 ? dwx(i) : dwy(i); };
    const Eigen::MatrixXd pos = (H + H.cwiseAbs()) / 2.0;
    const Eigen::MatrixXd neg = (H - H.cwiseAbs()) / 2.0;
    const Eigen::MatrixXd habs = H.cwiseAbs();
    for (Eigen::Index i = 0; i < n; ++i) {
      // dw_i >= width(prior)_i - width(backward)_i
      coeff(dw(i), -1.0);
      for (Eigen::Index j = 0; j < n; ++j) {
        coeff(mlo(j), habs(i, j));
        coeff(mup(j), -habs(i, j));
      }
      rhs.push_back(constant.width()[i] - prior.width()[i]);
      ++r;
      // dw_i >= upper(prior)_i - upper(backward)_i
      coeff(dw(i), -1.0);
      for (Eigen::Index j = 0; j < n; ++j) {
        coeff(mlo(j), -neg(i, j));
        coeff(mup(j), -pos(i, j));
      }
      rhs.push_back(constant.upper()[i] - prior.upper()[i]);
      ++r;
      // dw_i >= lower(backward)_i - lower(prior)_i
      coeff(dw(i), -1.0);
      for (Eigen::Index j = 0; j < n; ++j) {
        coeff(mlo(j), pos(i, j));
        coeff(mup(j), neg(i, j));
      }
      rhs.push_back(prior.lower()[i] - constant.lower()[i]);
      ++r;
    }
  }

  p.ineq_A.resize(r, nv);
  p.ineq_A.setFromTriplets(rows.begin(), rows.end());
  p.ineq_b = Eigen::Map<const Eigen::VectorXd>(rhs.data(), static_cast<Eigen::Index>(rhs.size()));
  p.eq_A.resize(0, nv);
  p.eq_b.resize(0);

  p.names.resize(static_cast<size_t>(nv));
  p.names[0] = "leak_bound";
  for (Eigen::Index i = 0; i < n; ++i) {
    p.names[static_cast<size_t>(mlo(i))] = "release_lo[" + std::to_string(i) + "]";
    p.names[static_cast<size_t>(mup(i))] = "release_up[" + std::to_string(i) + "]";
    p.names[static_cast<size_t>(dwx(i))] = "delta_pub[" + std::to_string(i) + "]";
    p.names[static_cast<size_t>(dwy(i))] = "delta_priv[" + std::to_string(i) + "]";
  }
  return p;
}

FilterStepResult filter_step_k0(FilterState& fs, const LinearSystem& sys,
                                const Eigen::Ref<const Eigen::VectorXd>& x0) {
  const Intervald& prior = sys.x0_bounds;
  const Intervald seed = make_seed_set(x0, prior, fs.eps_x, fs.rng);

  // spread the remaining budget evenly and clip to the prior
  const double slack = fs.eps_x - seed.surrogate_volume();
  const double pad = std::max(0.0, slack) / (2.0 * static_cast<double>(prior.dim()));
  Eigen::VectorXd lo = (seed.lower().array() - pad).max(prior.lower().array());
  Eigen::VectorXd hi = (seed.upper().array() + pad).min(prior.upper().array());
  Intervald m_star(std::move(lo), std::move(hi));

  ReleaseRecord release{m_star, seed, std::numeric_limits<double>::quiet_NaN(), LpStatus::Optimal,
                        false};
  fs.belief = init_belief(sys, m_star);

  StepReport report;
  report.measures = measures(*fs.belief);
  report.delta_x_width = Eigen::VectorXd::Zero(prior.dim());
  report.delta_y_width = Eigen::VectorXd::Zero(prior.dim());
  return {std::move(release), std::move(report)};
}

FilterStepResult filter_step(FilterState& fs, const LinearSystem& sys,
                             const Eigen::Ref<const Eigen::VectorXd>& x_true) {
  if (!fs.belief) throw std::logic_error("filter_step: no mirror belief; release step 0 first");
  auto [x_pred, y_pred] = predict(*fs.belief, sys);
  (void)y_pred;
  if (!x_pred.contains(x_true, 1e-9))
    throw std::logic_error("filter_step: true public state escaped the mirror prediction");
  // guard against boundary rounding so the seed constructor sees a clean point
  const Eigen::VectorXd x_in = x_true.cwiseMax(x_pred.lower()).cwiseMin(x_pred.upper());

  const Intervald seed = make_seed_set(x_in, x_pred, fs.eps_x, fs.rng);
  const LpProblem release_lp =
      build_release_lp(sys, fs.belief->x_post, fs.belief->y_post, x_pred, seed, fs.eps_x);
  const LpSolution sol = volpriv::solve(release_lp);
  if (sol.status != LpStatus::Optimal)
    throw std::runtime_error("filter_step: release optimization came back " +
                             std::string(to_string(sol.status)) + "\n" + dump_to_string(release_lp));

  const Eigen::Index n = sys.state_dim();
  // The leak optimum is rarely unique. Among the optimal releases take a
  // widest one: enlarging the release never increases the leak, and the wider
  // public posterior leaves the adversary less to extract at later steps.
  LpProblem widest = release_lp;
  widest.upper[0] = sol.objective_value + 1e-9;
  widest.objective.setZero();
  widest.objective.segment(1, n).setConstant(1.0);
  widest.objective.segment(1 + n, n).setConstant(-1.0);
  const LpSolution wide_sol = volpriv::solve(widest);
  const Eigen::VectorXd& v = wide_sol.status == LpStatus::Optimal ? wide_sol.values : sol.values;

  // clamp solver noise back into the ordering block
  Eigen::VectorXd m_lo = v.segment(1, n).cwiseMin(seed.lower()).cwiseMax(x_pred.lower());
  Eigen::VectorXd m_up = v.segment(1 + n, n).cwiseMax(seed.upper()).cwiseMin(x_pred.upper());
  Intervald m_star(std::move(m_lo), std::move(m_up));

  auto [next_belief, report] = attack_step(*fs.belief, sys, m_star);
  fs.belief = std::move(next_belief);

  ReleaseRecord release{std::move(m_star), seed, sol.objective_value, sol.status, true};
  return {std::move(release), std::move(report)};
}

QuantizerGrid make_quantizer_grid(const LinearSystem& sys, double eps_x, int horizon) {
  if (eps_x <= 0.0) throw std::invalid_argument("make_quantizer_grid: budget must be positive");
  // open-loop prediction hull of the public state over the horizon
  AdversaryBelief open;
  open.x_post = sys.x0_bounds;
  open.y_post = sys.y0_bounds;
  Eigen::VectorXd lo = sys.x0_bounds.lower();
  Eigen::VectorXd hi = sys.x0_bounds.upper();
  for (int k = 1; k <= horizon; ++k) {
    auto [x_pred, y_pred] = predict(open, sys);
    lo = lo.cwiseMin(x_pred.lower());
    hi = hi.cwiseMax(x_pred.upper());
    open.x_post = x_pred;
    open.y_post = y_pred;
  }
  QuantizerGrid grid;
  grid.anchor = sys.x0_bounds.center();
  grid.bin_width = eps_x / static_cast<double>(sys.state_dim());
  grid.cover = Intervald(std::move(lo), std::move(hi));
  return grid;
}

Intervald quantizer_release(const Eigen::Ref<const Eigen::VectorXd>& x, const QuantizerGrid& grid) {
  if (!grid.cover.contains(x))
    throw CoverMissError("quantizer_release: state outside the grid cover");
  const double h = grid.bin_width;
  Eigen::VectorXd lo(x.size()), hi(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    double j = std::floor((x[i] - grid.anchor[i]) / h);
    // half-open bins: nudge the index until anchor + j h <= x < anchor + (j+1) h
    while (x[i] < grid.anchor[i] + j * h) j -= 1.0;
    while (x[i] >= grid.anchor[i] + (j + 1.0) * h) j += 1.0;
    lo[i] = grid.anchor[i] + j * h;
    hi[i] = grid.anchor[i] + (j + 1.0) * h;
  }
  return Intervald(std::move(lo), std::move(hi));
}

double truncated_gaussian_noise(double eps_x, RngStream& rng) {
  if (eps_x <= 0.0) throw std::invalid_argument("truncated_gaussian_noise: budget must be positive");
  for (;;) {
    const double v = rng.normal(eps_x);
    if (std::abs(v) <= eps_x / 2.0) return v;
  }
}

Intervald truncated_gaussian_release(const Eigen::Ref<const Eigen::VectorXd>& x, double eps_x,
                                     RngStream& rng) {
  const double half_width = eps_x / (2.0 * static_cast<double>(x.size()));
  Eigen::VectorXd z(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) z[i] = x[i] + truncated_gaussian_noise(eps_x, rng);
  return Intervald(z.array() - half_width, z.array() + half_width);
}

}  // namespace volpriv
