#include "volpriv/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

namespace volpriv {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kOptTol = 1e-9;    // reduced-cost optimality
constexpr double kZeroW = 1e-11;    // tableau entry treated as zero in the ratio test
constexpr double kPivotTol = 1e-10; // smallest acceptable pivot magnitude

bool finite(double x) { return std::isfinite(x); }

}  // namespace

const char* to_string(LpStatus status) {
  switch (status) {
    case LpStatus::Optimal: return "Optimal";
    case LpStatus::Infeasible: return "Infeasible";
    case LpStatus::Unbounded: return "Unbounded";
    case LpStatus::NumericalFailure: return "NumericalFailure";
  }
  return "?";
}

void LpProblem::validate() const {
  const Eigen::Index n = num_vars();
  if (n == 0) throw std::invalid_argument("LpProblem: no variables");
  if (!objective.allFinite()) throw std::invalid_argument("LpProblem: objective has NaN/inf");
  if (ineq_A.rows() != ineq_b.size()) throw std::invalid_argument("LpProblem: ineq row mismatch");
  if (eq_A.rows() != eq_b.size()) throw std::invalid_argument("LpProblem: eq row mismatch");
  if ((ineq_A.rows() > 0 && ineq_A.cols() != n) || (eq_A.rows() > 0 && eq_A.cols() != n))
    throw std::invalid_argument("LpProblem: constraint width differs from variable count");
  if (lower.size() != n || upper.size() != n)
    throw std::invalid_argument("LpProblem: bound vectors must match variable count");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::isnan(lower[i]) || std::isnan(upper[i]))
      throw std::invalid_argument("LpProblem: NaN bound");
    if (lower[i] > upper[i]) throw std::invalid_argument("LpProblem: inverted bound");
  }
  auto check_mat = [](const Eigen::SparseMatrix<double>& m, const char* what) {
    for (int k = 0; k < m.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator it(m, k); it; ++it)
        if (std::isnan(it.value())) throw std::invalid_argument(std::string("LpProblem: NaN in ") + what);
  };
  check_mat(ineq_A, "inequality rows");
  check_mat(eq_A, "equality rows");
  if (std::isnan(ineq_b.sum()) || std::isnan(eq_b.sum()))
    throw std::invalid_argument("LpProblem: NaN right-hand side");
}

LpFeasibility check_feasible(const LpProblem& p, const Eigen::Ref<const Eigen::VectorXd>& v,
                             double tol) {
  double worst = 0.0;
  if (v.size() != p.num_vars()) return {false, kInf};
  if (p.ineq_A.rows() > 0) {
    Eigen::VectorXd r = p.ineq_A * v - p.ineq_b;
    worst = std::max(worst, r.maxCoeff());
  }
  if (p.eq_A.rows() > 0) {
    Eigen::VectorXd r = p.eq_A * v - p.eq_b;
    worst = std::max(worst, r.cwiseAbs().maxCoeff());
  }
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (finite(p.lower[i])) worst = std::max(worst, p.lower[i] - v[i]);
    if (finite(p.upper[i])) worst = std::max(worst, v[i] - p.upper[i]);
  }
  return {worst <= tol, worst};
}

// ---------------------------------------------------------------------------
// Bounded-variable two-phase simplex with a dense basis inverse and sparse
// column storage. Pivot rules are fixed (Dantzig with largest-pivot tie
// breaking; Bland once degeneracy stalls), so identical problems produce
// identical solutions.
// ---------------------------------------------------------------------------

struct SimplexSolver::Impl {
  enum class VState : unsigned char { AtLower, AtUpper, FreeZero, Basic };

  Eigen::Index n_struct = 0;  // structural variables
  Eigen::Index n_cols = 0;    // structural + slack
  Eigen::Index m = 0;         // rows (ineq then eq)

  Eigen::SparseMatrix<double> W;  // m x n_cols
  Eigen::VectorXd b;
  Eigen::VectorXd lo, hi;         // per column
  Eigen::VectorXd cost;           // phase-2 cost per column
  Eigen::VectorXd obj_struct;     // current structural objective

  std::vector<VState> state;      // per column
  std::vector<Eigen::Index> basic;  // per row; artificial encoded as n_cols + row
  std::vector<double> art_sigma;    // artificial column sign per row
  std::vector<bool> art_fixed;      // artificial pinned to zero
  Eigen::MatrixXd Binv;
  Eigen::VectorXd xB;

  bool phase1_done = false;
  LpStatus phase1_status = LpStatus::NumericalFailure;
  bool bland = false;
  long iterations = 0;
  double feas_tol = 1e-8;

  explicit Impl(const LpProblem& p) {
    p.validate();
    n_struct = p.num_vars();
    const Eigen::Index n_slack = p.ineq_A.rows();
    n_cols = n_struct + n_slack;
    m = p.ineq_A.rows() + p.eq_A.rows();

    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<size_t>(p.ineq_A.nonZeros() + p.eq_A.nonZeros()) + n_slack);
    for (int k = 0; k < p.ineq_A.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator it(p.ineq_A, k); it; ++it)
        trips.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    for (Eigen::Index i = 0; i < n_slack; ++i)
      trips.emplace_back(static_cast<int>(i), static_cast<int>(n_struct + i), 1.0);
    for (int k = 0; k < p.eq_A.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator it(p.eq_A, k); it; ++it)
        trips.emplace_back(static_cast<int>(n_slack + it.row()), static_cast<int>(it.col()),
                           it.value());
    W.resize(m, n_cols);
    W.setFromTriplets(trips.begin(), trips.end());
    W.makeCompressed();

    b.resize(m);
    b.head(n_slack) = p.ineq_b;
    b.tail(p.eq_A.rows()) = p.eq_b;

    lo.resize(n_cols);
    hi.resize(n_cols);
    lo.head(n_struct) = p.lower;
    hi.head(n_struct) = p.upper;
    lo.tail(n_slack).setZero();
    hi.tail(n_slack).setConstant(kInf);

    cost = Eigen::VectorXd::Zero(n_cols);
    obj_struct = p.objective;

    state.resize(static_cast<size_t>(n_cols));
    for (Eigen::Index j = 0; j < n_cols; ++j) {
      if (finite(lo[j]))
        state[static_cast<size_t>(j)] = VState::AtLower;
      else if (finite(hi[j]))
        state[static_cast<size_t>(j)] = VState::AtUpper;
      else
        state[static_cast<size_t>(j)] = VState::FreeZero;
    }

    feas_tol = 1e-8 * std::max(1.0, b.size() ? b.cwiseAbs().maxCoeff() : 0.0);

    basic.assign(static_cast<size_t>(m), -1);
    art_sigma.assign(static_cast<size_t>(m), 1.0);
    art_fixed.assign(static_cast<size_t>(m), false);
    Eigen::VectorXd r = residual_from_nonbasic();
    Binv = Eigen::MatrixXd::Zero(m, m);
    xB.resize(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      art_sigma[static_cast<size_t>(i)] = (r[i] >= 0.0) ? 1.0 : -1.0;
      basic[static_cast<size_t>(i)] = n_cols + i;
      Binv(i, i) = art_sigma[static_cast<size_t>(i)];
      xB[i] = std::abs(r[i]);
    }
  }

  double nonbasic_value(Eigen::Index j) const {
    switch (state[static_cast<size_t>(j)]) {
      case VState::AtLower: return lo[j];
      case VState::AtUpper: return hi[j];
      default: return 0.0;
    }
  }

  bool is_artificial(Eigen::Index col) const { return col >= n_cols; }

  Eigen::VectorXd residual_from_nonbasic() const {
    Eigen::VectorXd r = b;
    for (Eigen::Index j = 0; j < n_cols; ++j) {
      if (state[static_cast<size_t>(j)] == VState::Basic) continue;
      const double v = nonbasic_value(j);
      if (v == 0.0) continue;
      for (Eigen::SparseMatrix<double>::InnerIterator it(W, j); it; ++it)
        r[it.row()] -= it.value() * v;
    }
    return r;
  }

  double column_cost(Eigen::Index col, int phase) const {
    if (phase == 1) return is_artificial(col) ? 1.0 : 0.0;
    return is_artificial(col) ? 0.0 : cost[col];
  }

  // Binv * (sparse column `col`); artificials are +-e_row.
  Eigen::VectorXd ftran(Eigen::Index col) const {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(m);
    if (is_artificial(col)) {
      const Eigen::Index row = col - n_cols;
      w = Binv.col(row) * art_sigma[static_cast<size_t>(row)];
      return w;
    }
    for (Eigen::SparseMatrix<double>::InnerIterator it(W, col); it; ++it)
      w.noalias() += it.value() * Binv.col(it.row());
    return w;
  }

  void refactorize() {
    if (m == 0) return;
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const Eigen::Index col = basic[static_cast<size_t>(i)];
      if (is_artificial(col)) {
        B(col - n_cols, i) = art_sigma[static_cast<size_t>(col - n_cols)];
      } else {
        for (Eigen::SparseMatrix<double>::InnerIterator it(W, col); it; ++it) B(it.row(), i) = it.value();
      }
    }
    Binv = B.partialPivLu().inverse();
    xB = Binv * residual_from_nonbasic();
  }

  // One simplex phase. Returns Optimal / Unbounded / NumericalFailure.
  LpStatus iterate(int phase) {
    const long max_iters = 20000 + 60 * static_cast<long>(m + n_cols);
    long stall = 0;
    Eigen::VectorXd y(m), w(m);
    Eigen::VectorXd cB(m);

    for (long it_count = 0;; ++it_count, ++iterations) {
      if (it_count > max_iters) return LpStatus::NumericalFailure;

      for (Eigen::Index i = 0; i < m; ++i) cB[i] = column_cost(basic[static_cast<size_t>(i)], phase);
      y.noalias() = Binv.transpose() * cB;

      // pricing
      Eigen::Index enter = -1;
      int enter_dir = 0;
      double best = 0.0;
      for (Eigen::Index j = 0; j < n_cols; ++j) {
        const VState st = state[static_cast<size_t>(j)];
        if (st == VState::Basic) continue;
        if (hi[j] - lo[j] <= 0.0) continue;  // fixed
        double d = column_cost(j, phase);
        for (Eigen::SparseMatrix<double>::InnerIterator wit(W, j); wit; ++wit)
          d -= y[wit.row()] * wit.value();
        int dir = 0;
        if (st == VState::AtLower && d < -kOptTol) dir = +1;
        else if (st == VState::AtUpper && d > kOptTol) dir = -1;
        else if (st == VState::FreeZero && std::abs(d) > kOptTol) dir = d < 0 ? +1 : -1;
        if (dir == 0) continue;
        if (bland) { enter = j; enter_dir = dir; break; }
        const double score = std::abs(d);
        if (score > best + 1e-15) { best = score; enter = j; enter_dir = dir; }
      }
      if (enter < 0) return LpStatus::Optimal;

      w = ftran(enter);

      // ratio test: entering moves by t >= 0 in direction enter_dir,
      // basic i moves at rate -enter_dir * w[i].
      double t_limit = kInf;
      Eigen::Index leave_row = -1;  // -1 means the entering variable's own bound binds
      bool leave_to_upper = false;
      const double own_range = hi[enter] - lo[enter];
      if (finite(own_range)) t_limit = own_range;

      for (Eigen::Index i = 0; i < m; ++i) {
        const double rate = -enter_dir * w[i];
        if (std::abs(rate) <= kZeroW) continue;
        const Eigen::Index bc = basic[static_cast<size_t>(i)];
        double blo, bhi;
        if (is_artificial(bc)) {
          blo = 0.0;
          bhi = (phase == 2 || art_fixed[static_cast<size_t>(bc - n_cols)]) ? 0.0 : kInf;
        } else {
          blo = lo[bc];
          bhi = hi[bc];
        }
        double t;
        bool to_upper;
        if (rate > 0) {
          if (!finite(bhi)) continue;
          t = (bhi - xB[i]) / rate;
          to_upper = true;
        } else {
          if (!finite(blo)) continue;
          t = (blo - xB[i]) / rate;
          to_upper = false;
        }
        if (t < 0) t = 0;  // bound already grazed within tolerance
        bool take = false;
        if (t < t_limit - 1e-12) {
          take = true;
        } else if (t <= t_limit + 1e-12 && leave_row >= 0) {
          // tie between basic rows
          take = bland ? bc < basic[static_cast<size_t>(leave_row)]
                       : std::abs(w[i]) > std::abs(w[leave_row]);
        }
        if (take) {
          t_limit = std::min(t_limit, t);
          leave_row = i;
          leave_to_upper = to_upper;
        }
      }

      if (!finite(t_limit)) {
        return phase == 1 ? LpStatus::NumericalFailure : LpStatus::Unbounded;
      }

      if (t_limit <= 1e-12) {
        if (++stall > 200 && !bland) { bland = true; stall = 0; }
      } else {
        stall = 0;
      }

      if (leave_row < 0) {
        // entering variable flips to its opposite bound; basis unchanged
        xB.noalias() -= (enter_dir * t_limit) * w;
        state[static_cast<size_t>(enter)] =
            (state[static_cast<size_t>(enter)] == VState::AtLower) ? VState::AtUpper : VState::AtLower;
        continue;
      }

      if (std::abs(w[leave_row]) < kPivotTol) {
        // Pivot too small to trust; rebuild the inverse and retry the pass.
        refactorize();
        if (++stall > 400) return LpStatus::NumericalFailure;
        continue;
      }

      const double enter_start = nonbasic_value(enter);
      xB.noalias() -= (enter_dir * t_limit) * w;
      const Eigen::Index leaving = basic[static_cast<size_t>(leave_row)];
      if (!is_artificial(leaving))
        state[static_cast<size_t>(leaving)] = leave_to_upper ? VState::AtUpper : VState::AtLower;
      else
        art_fixed[static_cast<size_t>(leaving - n_cols)] = true;

      basic[static_cast<size_t>(leave_row)] = enter;
      state[static_cast<size_t>(enter)] = VState::Basic;
      xB[leave_row] = enter_start + enter_dir * t_limit;

      Eigen::VectorXd factor = w;
      factor[leave_row] -= 1.0;
      factor /= w[leave_row];
      const Eigen::RowVectorXd pivot_row = Binv.row(leave_row);
      Binv.noalias() -= factor * pivot_row;

      if ((iterations & 1023) == 1023) xB = Binv * residual_from_nonbasic();
    }
  }

  LpStatus run_phase1() {
    if (phase1_done) return phase1_status;
    phase1_done = true;
    if (m == 0) {
      phase1_status = LpStatus::Optimal;
      return phase1_status;
    }
    LpStatus st = iterate(1);
    if (st != LpStatus::Optimal) {
      phase1_status = LpStatus::NumericalFailure;
      return phase1_status;
    }
    double infeas = 0.0;
    for (Eigen::Index i = 0; i < m; ++i)
      if (is_artificial(basic[static_cast<size_t>(i)])) infeas += std::max(0.0, xB[i]);
    if (infeas > std::max(feas_tol, 1e-7)) {
      phase1_status = LpStatus::Infeasible;
      return phase1_status;
    }
    drive_out_artificials();
    for (Eigen::Index i = 0; i < m; ++i) art_fixed[static_cast<size_t>(i)] = true;
    phase1_status = LpStatus::Optimal;
    return phase1_status;
  }

  void drive_out_artificials() {
    for (Eigen::Index r = 0; r < m; ++r) {
      if (!is_artificial(basic[static_cast<size_t>(r)])) continue;
      const Eigen::RowVectorXd br = Binv.row(r);
      Eigen::Index pivot_col = -1;
      double pivot_val = 0.0;
      for (Eigen::Index j = 0; j < n_cols; ++j) {
        if (state[static_cast<size_t>(j)] == VState::Basic) continue;
        double tau = 0.0;
        for (Eigen::SparseMatrix<double>::InnerIterator it(W, j); it; ++it)
          tau += br[it.row()] * it.value();
        if (std::abs(tau) > std::max(1e-9, std::abs(pivot_val))) {
          pivot_col = j;
          pivot_val = tau;
        }
      }
      if (pivot_col < 0) continue;  // redundant row; artificial stays basic at zero

      Eigen::VectorXd w = ftran(pivot_col);
      const double enter_start = nonbasic_value(pivot_col);
      basic[static_cast<size_t>(r)] = pivot_col;
      state[static_cast<size_t>(pivot_col)] = VState::Basic;
      xB[r] = enter_start;  // degenerate pivot: artificial was at zero
      Eigen::VectorXd factor = w;
      factor[r] -= 1.0;
      factor /= w[r];
      const Eigen::RowVectorXd pivot_row = Binv.row(r);
      Binv.noalias() -= factor * pivot_row;
      xB = Binv * residual_from_nonbasic();
    }
  }

  Eigen::VectorXd full_point() const {
    Eigen::VectorXd x(n_cols);
    for (Eigen::Index j = 0; j < n_cols; ++j)
      x[j] = state[static_cast<size_t>(j)] == VState::Basic ? 0.0 : nonbasic_value(j);
    for (Eigen::Index i = 0; i < m; ++i) {
      const Eigen::Index col = basic[static_cast<size_t>(i)];
      if (!is_artificial(col)) x[col] = xB[i];
    }
    return x;
  }

  bool verify_current() const {
    const Eigen::VectorXd x = full_point();
    Eigen::VectorXd r = W * x - b;
    for (Eigen::Index i = 0; i < m; ++i) {
      const Eigen::Index col = basic[static_cast<size_t>(i)];
      if (is_artificial(col)) {
        const Eigen::Index row = col - n_cols;
        r[row] += art_sigma[static_cast<size_t>(row)] * xB[i];
      }
    }
    if (r.size() && r.cwiseAbs().maxCoeff() > std::max(feas_tol, 1e-7)) return false;
    for (Eigen::Index j = 0; j < n_cols; ++j) {
      const double v = x[j];
      if (finite(lo[j]) && v < lo[j] - 1e-7) return false;
      if (finite(hi[j]) && v > hi[j] + 1e-7) return false;
    }
    return true;
  }

  LpSolution optimize(const Eigen::Ref<const Eigen::VectorXd>& objective) {
    LpSolution sol;
    if (objective.size() != n_struct)
      throw std::invalid_argument("SimplexSolver: objective size mismatch");
    const LpStatus f = run_phase1();
    if (f != LpStatus::Optimal) {
      sol.status = f;
      sol.iterations = iterations;
      return sol;
    }
    cost.head(n_struct) = objective;
    cost.tail(n_cols - n_struct).setZero();

    LpStatus st = iterate(2);
    if (st == LpStatus::Optimal) {
      for (int attempt = 0; attempt < 3 && !verify_current(); ++attempt) {
        refactorize();
        st = iterate(2);
        if (st != LpStatus::Optimal) break;
      }
      if (st == LpStatus::Optimal && !verify_current()) st = LpStatus::NumericalFailure;
    }
    sol.status = st;
    sol.iterations = iterations;
    const Eigen::VectorXd x = full_point();
    sol.values = x.head(n_struct);
    sol.objective_value = objective.dot(sol.values);
    return sol;
  }
};

SimplexSolver::SimplexSolver(const LpProblem& problem) : impl_(std::make_unique<Impl>(problem)) {}
SimplexSolver::~SimplexSolver() = default;
SimplexSolver::SimplexSolver(SimplexSolver&&) noexcept = default;
SimplexSolver& SimplexSolver::operator=(SimplexSolver&&) noexcept = default;

LpStatus SimplexSolver::ensure_feasible() { return impl_->run_phase1(); }

LpSolution SimplexSolver::minimize(const Eigen::Ref<const Eigen::VectorXd>& objective) {
  return impl_->optimize(objective);
}

LpSolution SimplexSolver::solve() { return impl_->optimize(impl_->obj_struct); }

LpSolution solve(const LpProblem& problem) {
  SimplexSolver solver(problem);
  return solver.solve();
}

namespace {

std::string var_name(const LpProblem& p, Eigen::Index j) {
  if (j < static_cast<Eigen::Index>(p.names.size()) && !p.names[static_cast<size_t>(j)].empty())
    return p.names[static_cast<size_t>(j)];
  return "v" + std::to_string(j);
}

void print_row(const LpProblem& p, const Eigen::SparseMatrix<double>& A, Eigen::Index row,
               std::ostream& os) {
  bool first = true;
  for (Eigen::Index j = 0; j < A.cols(); ++j) {
    const double v = A.coeff(row, j);
    if (v == 0.0) continue;
    if (!first) os << (v >= 0 ? " + " : " - ");
    else if (v < 0) os << "-";
    const double a = std::abs(v);
    if (a != 1.0) os << a << " ";
    os << var_name(p, j);
    first = false;
  }
  if (first) os << "0";
}

}  // namespace

void dump(const LpProblem& p, std::ostream& os) {
  os << "minimize ";
  bool first = true;
  for (Eigen::Index j = 0; j < p.num_vars(); ++j) {
    if (p.objective[j] == 0.0) continue;
    if (!first) os << (p.objective[j] >= 0 ? " + " : " - ");
    else if (p.objective[j] < 0) os << "-";
    const double a = std::abs(p.objective[j]);
    if (a != 1.0) os << a << " ";
    os << var_name(p, j);
    first = false;
  }
  if (first) os << "0";
  os << "\nsubject to\n";
  for (Eigen::Index i = 0; i < p.ineq_A.rows(); ++i) {
    os << "  ";
    print_row(p, p.ineq_A, i, os);
    os << " <= " << p.ineq_b[i] << "\n";
  }
  for (Eigen::Index i = 0; i < p.eq_A.rows(); ++i) {
    os << "  ";
    print_row(p, p.eq_A, i, os);
    os << " == " << p.eq_b[i] << "\n";
  }
  os << "bounds\n";
  for (Eigen::Index j = 0; j < p.num_vars(); ++j)
    os << "  " << p.lower[j] << " <= " << var_name(p, j) << " <= " << p.upper[j] << "\n";
}

std::string dump_to_string(const LpProblem& p) {
  std::ostringstream ss;
  dump(p, ss);
  return ss.str();
}

}  // namespace volpriv
