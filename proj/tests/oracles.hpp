// Test-only oracles, written against raw Eigen so they stay independent of
// the library code paths they check.
#ifndef VOLPRIV_TESTS_ORACLES_HPP_
#define VOLPRIV_TESTS_ORACLES_HPP_

#include <Eigen/Dense>

#include <optional>
#include <utility>
#include <vector>

#include "volpriv/interval.hpp"
#include "volpriv/linear_system.hpp"

namespace oracles {

struct Box {
  Eigen::VectorXd lo, hi;
};

inline Box to_box(const volpriv::Intervald& iv) { return {iv.lower(), iv.upper()}; }

// Hull of {A v : v a vertex of the box}; exact for linear maps.
inline Box vertex_image_hull(const Eigen::MatrixXd& A, const Box& box) {
  const Eigen::Index n = box.lo.size();
  const Eigen::Index m = A.rows();
  Box out{Eigen::VectorXd::Constant(m, std::numeric_limits<double>::infinity()),
          Eigen::VectorXd::Constant(m, -std::numeric_limits<double>::infinity())};
  Eigen::VectorXd v(n);
  for (long mask = 0; mask < (1L << n); ++mask) {
    for (Eigen::Index i = 0; i < n; ++i) v[i] = (mask >> i) & 1 ? box.hi[i] : box.lo[i];
    const Eigen::VectorXd image = A * v;
    out.lo = out.lo.cwiseMin(image);
    out.hi = out.hi.cwiseMax(image);
  }
  return out;
}

// Hull of A * (grid over the box); grid endpoints include the vertices, so the
// result is exact for linear maps up to rounding.
inline Box grid_image_hull(const Eigen::MatrixXd& A, const Box& box, int steps) {
  const Eigen::Index m = A.rows();
  Box out{Eigen::VectorXd::Constant(m, std::numeric_limits<double>::infinity()),
          Eigen::VectorXd::Constant(m, -std::numeric_limits<double>::infinity())};
  Eigen::VectorXd v(2);
  for (int i = 0; i < steps; ++i) {
    v[0] = box.lo[0] + (box.hi[0] - box.lo[0]) * i / (steps - 1);
    for (int j = 0; j < steps; ++j) {
      v[1] = box.lo[1] + (box.hi[1] - box.lo[1]) * j / (steps - 1);
      const Eigen::VectorXd image = A * v;
      out.lo = out.lo.cwiseMin(image);
      out.hi = out.hi.cwiseMax(image);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Straight-line re-implementation of the interval attack step over stacked
// [lower; upper] vectors and explicit 2n x 2n split matrices.
// ---------------------------------------------------------------------------

inline Eigen::MatrixXd psi2n(const Eigen::MatrixXd& A) {
  const Eigen::Index n = A.rows();
  const Eigen::MatrixXd pos = (A + A.cwiseAbs()) / 2.0;
  const Eigen::MatrixXd neg = (A - A.cwiseAbs()) / 2.0;
  Eigen::MatrixXd out(2 * n, 2 * A.cols());
  out << pos, neg, neg, pos;
  return out;
}

inline Eigen::VectorXd stack(const Box& b) {
  Eigen::VectorXd s(2 * b.lo.size());
  s << b.lo, b.hi;
  return s;
}

inline Box unstack(const Eigen::VectorXd& s) {
  const Eigen::Index n = s.size() / 2;
  return {s.head(n), s.tail(n)};
}

inline std::optional<Box> clip(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const Eigen::Index n = a.size() / 2;
  Box out{a.head(n).cwiseMax(b.head(n)), a.tail(n).cwiseMin(b.tail(n))};
  if ((out.lo.array() > out.hi.array()).any()) return std::nullopt;
  return out;
}

struct AttackStepOracle {
  Box back_x, back_y, x_cal, y_cal, repred, x_post, y_post, y_pred, x_pred;
  double leak = 0.0;
};

// Full attack step from priors (x_prior, y_prior) and released box m.
// Returns nothing if any intersection comes up empty.
inline std::optional<AttackStepOracle> attack_step_oracle(const volpriv::LinearSystem& sys,
                                                          const Box& x_prior, const Box& y_prior,
                                                          const Box& m) {
  const Eigen::MatrixXd a1i = sys.a1.inverse();
  const Eigen::MatrixXd a2i = sys.a2.inverse();
  const Box wx = to_box(sys.wx_bounds);
  const Box wy = to_box(sys.wy_bounds);

  AttackStepOracle o;
  o.x_pred = unstack(psi2n(sys.a1) * stack(x_prior) + psi2n(sys.a2) * stack(y_prior) +
                     psi2n(sys.b1) * stack(wx));
  o.y_pred = unstack(psi2n(sys.a3) * stack(x_prior) + psi2n(sys.a4) * stack(y_prior) +
                     psi2n(sys.b2) * stack(wy));

  o.back_x = unstack(psi2n(a1i) * stack(m) + psi2n(-(a1i * sys.a2)) * stack(y_prior) +
                     psi2n(-(a1i * sys.b1)) * stack(wx));
  o.back_y = unstack(psi2n(a2i) * stack(m) + psi2n(-(a2i * sys.a1)) * stack(x_prior) +
                     psi2n(-(a2i * sys.b1)) * stack(wx));

  auto x_cal = clip(stack(o.back_x), stack(x_prior));
  if (!x_cal) return std::nullopt;
  auto y_cal = clip(stack(o.back_y), stack(y_prior));
  if (!y_cal) return std::nullopt;
  o.x_cal = *x_cal;
  o.y_cal = *y_cal;

  o.repred = unstack(psi2n(sys.a1) * stack(o.x_cal) + psi2n(sys.a2) * stack(o.y_cal) +
                     psi2n(sys.b1) * stack(wx));
  auto x_post = clip(stack(m), stack(o.repred));
  if (!x_post) return std::nullopt;
  o.x_post = *x_post;
  o.y_post = unstack(psi2n(sys.a3) * stack(o.x_cal) + psi2n(sys.a4) * stack(o.y_cal) +
                     psi2n(sys.b2) * stack(wy));
  o.leak = (o.y_pred.hi - o.y_pred.lo).sum() - (o.y_post.hi - o.y_post.lo).sum();
  return o;
}

// Brute-force optimum of a small LP: enumerate all choices of active
// constraints (rows taken as equalities plus variable bounds), solve each
// square system, and keep feasible vertices.
struct VertexLpResult {
  bool found = false;
  double objective = std::numeric_limits<double>::infinity();
};

inline VertexLpResult vertex_enumerate_min(const Eigen::MatrixXd& ineq_A,
                                           const Eigen::VectorXd& ineq_b,
                                           const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                                           const Eigen::VectorXd& c) {
  const Eigen::Index n = c.size();
  // candidate active rows: each inequality, each bound
  std::vector<std::pair<Eigen::VectorXd, double>> rows;
  for (Eigen::Index i = 0; i < ineq_A.rows(); ++i)
    rows.push_back({ineq_A.row(i).transpose(), ineq_b[i]});
  for (Eigen::Index j = 0; j < n; ++j) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    e[j] = 1.0;
    if (std::isfinite(lo[j])) rows.push_back({e, lo[j]});
    if (std::isfinite(hi[j])) rows.push_back({e, hi[j]});
  }
  const auto feasible = [&](const Eigen::VectorXd& x) {
    if (((ineq_A * x - ineq_b).array() > 1e-7).any()) return false;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (std::isfinite(lo[j]) && x[j] < lo[j] - 1e-7) return false;
      if (std::isfinite(hi[j]) && x[j] > hi[j] + 1e-7) return false;
    }
    return true;
  };

  VertexLpResult result;
  const Eigen::Index r = static_cast<Eigen::Index>(rows.size());
  std::vector<Eigen::Index> idx(static_cast<size_t>(n));
  // iterate over all n-subsets of rows
  std::vector<Eigen::Index> comb(static_cast<size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) comb[static_cast<size_t>(i)] = i;
  if (r < n) return result;
  for (;;) {
    Eigen::MatrixXd A(n, n);
    Eigen::VectorXd b(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      A.row(i) = rows[static_cast<size_t>(comb[static_cast<size_t>(i)])].first.transpose();
      b[i] = rows[static_cast<size_t>(comb[static_cast<size_t>(i)])].second;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    if (lu.isInvertible()) {
      const Eigen::VectorXd x = lu.solve(b);
      if (feasible(x)) {
        result.found = true;
        result.objective = std::min(result.objective, c.dot(x));
      }
    }
    // next combination
    Eigen::Index i = n - 1;
    while (i >= 0 && comb[static_cast<size_t>(i)] == r - n + i) --i;
    if (i < 0) break;
    ++comb[static_cast<size_t>(i)];
    for (Eigen::Index j = i + 1; j < n; ++j)
      comb[static_cast<size_t>(j)] = comb[static_cast<size_t>(j - 1)] + 1;
  }
  return result;
}

}  // namespace oracles

#endif  // VOLPRIV_TESTS_ORACLES_HPP_
