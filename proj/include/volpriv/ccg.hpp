#ifndef VOLPRIV_CCG_HPP_
#define VOLPRIV_CCG_HPP_

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <stdexcept>
#include <vector>

#include "volpriv/interval.hpp"
#include "volpriv/rng.hpp"

namespace volpriv {

class EmptySetError : public std::runtime_error {
 public:
  explicit EmptySetError(const std::string& what) : std::runtime_error(what) {}
};

/// Constrained convex generator set
///   { G xi + c : A xi = b, xi constrained blockwise },
/// restricted to infinity-norm unit-ball generator blocks (constrained
/// zonotopes), which makes membership, emptiness, and interval hulls plain
/// linear programs.
///
/// linear_map / minkowski_sum / intersect are exact; generator and constraint
/// counts grow with every composition (no order reduction is performed).
struct Ccg {
  Eigen::MatrixXd generators;                  // n x ng
  Eigen::VectorXd center;                      // n
  Eigen::SparseMatrix<double> constraints_A;   // nc x ng
  Eigen::VectorXd constraints_b;               // nc
  std::vector<Eigen::Index> blocks;            // inf-ball block sizes, sum == ng

  /// Generator-free singleton {0} in one dimension.
  Ccg() : generators(1, 0), center(Eigen::VectorXd::Zero(1)), constraints_A(0, 0),
          constraints_b(0) {}

  Ccg(Eigen::MatrixXd G, Eigen::VectorXd c, Eigen::SparseMatrix<double> A, Eigen::VectorXd b,
      std::vector<Eigen::Index> block_sizes);

  Eigen::Index dim() const { return center.size(); }
  Eigen::Index num_generators() const { return generators.cols(); }
  Eigen::Index num_constraints() const { return constraints_A.rows(); }
};

/// Box as a constrained zonotope: G = diag(radius), c = center, no equalities.
Ccg from_interval(const Intervald& box);

/// Image R * Z; generator and constraint counts are unchanged.
Ccg linear_map(const Eigen::Ref<const Eigen::MatrixXd>& R, const Ccg& z);

/// Exact Minkowski sum; generators and constraints concatenate blockwise.
Ccg minkowski_sum(const Ccg& x, const Ccg& y);

/// Exact intersection; the result may be empty (see is_empty).
Ccg intersect(const Ccg& x, const Ccg& y);

/// One LP feasibility solve for { xi : G xi + c = point, A xi = b, |xi| <= 1 }.
bool is_member(const Ccg& z, const Eigen::Ref<const Eigen::VectorXd>& point);

/// One LP feasibility solve for the constraint system alone.
bool is_empty(const Ccg& z);

/// Tightest enclosing box; 2 n LP solves sharing one feasible basis.
/// Throws EmptySetError on an empty set.
Intervald interval_hull(const Ccg& z);

/// Hit-or-miss Monte Carlo volume: uniform samples in the interval hull,
/// hits counted by is_member. Deterministic for a given stream.
double mc_volume(const Ccg& z, int samples, RngStream& rng);

}  // namespace volpriv

#endif  // VOLPRIV_CCG_HPP_
