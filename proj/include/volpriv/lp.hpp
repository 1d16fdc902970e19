#ifndef VOLPRIV_LP_HPP_
#define VOLPRIV_LP_HPP_

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace volpriv {

enum class LpStatus { Optimal, Infeasible, Unbounded, NumericalFailure };

const char* to_string(LpStatus status);

/// Minimize-form linear program:
///   min  objective . v
///   s.t. ineq_A v <= ineq_b,  eq_A v = eq_b,  lower <= v <= upper.
/// Bound entries may be +-infinity. `names` is optional and used only for
/// diagnostics; missing names print as v<i>.
struct LpProblem {
  Eigen::VectorXd objective;
  Eigen::SparseMatrix<double> ineq_A;
  Eigen::VectorXd ineq_b;
  Eigen::SparseMatrix<double> eq_A;
  Eigen::VectorXd eq_b;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  std::vector<std::string> names;

  Eigen::Index num_vars() const { return objective.size(); }

  /// Throws std::invalid_argument naming the first structural defect
  /// (mismatched row width, NaN coefficient, inverted bounds).
  void validate() const;
};

struct LpSolution {
  LpStatus status = LpStatus::NumericalFailure;
  Eigen::VectorXd values;
  double objective_value = 0.0;
  long iterations = 0;
};

struct LpFeasibility {
  bool feasible = false;
  double worst_residual = 0.0;
};

/// Solves the program with a deterministic two-phase simplex over bounded
/// variables. Identical problems yield identical statuses, objective values
/// and vertices. A wrong Optimal is never reported: solutions are re-verified
/// against the constraints before being returned.
LpSolution solve(const LpProblem& problem);

/// Residual check of a candidate point against all rows and bounds.
LpFeasibility check_feasible(const LpProblem& problem, const Eigen::Ref<const Eigen::VectorXd>& v,
                             double tol = 1e-8);

/// Human-readable listing, one constraint per line.
void dump(const LpProblem& problem, std::ostream& os);
std::string dump_to_string(const LpProblem& problem);

/// Re-solvable simplex instance. The constraint system is standardized once;
/// successive objectives re-optimize from the previous optimal basis, which is
/// much cheaper than solving from scratch (used for interval hulls where only
/// the objective row changes between solves).
class SimplexSolver {
 public:
  explicit SimplexSolver(const LpProblem& problem);
  ~SimplexSolver();
  SimplexSolver(SimplexSolver&&) noexcept;
  SimplexSolver& operator=(SimplexSolver&&) noexcept;

  /// Phase 1 only; Optimal means a feasible basis is available.
  LpStatus ensure_feasible();

  /// Phase 2 for the given objective over the structural variables.
  LpSolution minimize(const Eigen::Ref<const Eigen::VectorXd>& objective);

  /// Both phases with the problem's own objective.
  LpSolution solve();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace volpriv

#endif  // VOLPRIV_LP_HPP_
