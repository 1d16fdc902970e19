#ifndef VOLPRIV_INTERVAL_HPP_
#define VOLPRIV_INTERVAL_HPP_

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <utility>

namespace volpriv {

/// Axis-aligned box given by stacked lower/upper bound vectors.
///
/// A constructed Interval is never empty: the constructor enforces
/// lower(i) <= upper(i) in every dimension. Emptiness only arises from
/// intersect(), which signals it through a disengaged optional instead of an
/// Interval with inverted bounds.
///
/// All comparisons are exact floating point; no epsilon fuzzing happens inside
/// the set operations.
template <typename Scalar>
class Interval {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  /// Degenerate one-dimensional box at the origin.
  Interval() : lower_(Vector::Zero(1)), upper_(Vector::Zero(1)) {}

  Interval(Vector lower, Vector upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
    if (lower_.size() == 0 || lower_.size() != upper_.size())
      throw std::invalid_argument("Interval: bounds must share a dimension >= 1");
    if ((lower_.array() > upper_.array()).any())
      throw std::invalid_argument("Interval: lower bound exceeds upper bound");
  }

  /// Degenerate box holding a single point.
  static Interval point(const Vector& v) { return Interval(v, v); }

  Eigen::Index dim() const { return lower_.size(); }
  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }

  Vector center() const { return (lower_ + upper_) / Scalar(2); }
  Vector radius() const { return (upper_ - lower_) / Scalar(2); }
  Vector width() const { return upper_ - lower_; }

  /// Lebesgue measure: the product of per-dimension widths.
  Scalar volume() const { return (upper_ - lower_).prod(); }

  /// Total width across all dimensions; linear surrogate for the volume.
  Scalar surrogate_volume() const { return (upper_ - lower_).sum(); }

  bool contains(const Eigen::Ref<const Vector>& p, Scalar slack = Scalar(0)) const {
    if (p.size() != dim()) throw std::invalid_argument("Interval::contains: dimension mismatch");
    return (p.array() >= lower_.array() - slack).all() &&
           (p.array() <= upper_.array() + slack).all();
  }

  /// True when this box lies inside `other`, allowing `slack` on every face.
  bool subset_of(const Interval& other, Scalar slack = Scalar(0)) const {
    if (other.dim() != dim()) throw std::invalid_argument("Interval::subset_of: dimension mismatch");
    return (lower_.array() >= other.lower_.array() - slack).all() &&
           (upper_.array() <= other.upper_.array() + slack).all();
  }

  friend bool operator==(const Interval& a, const Interval& b) {
    return a.lower_ == b.lower_ && a.upper_ == b.upper_;
  }

 private:
  Vector lower_, upper_;
};

using Intervald = Interval<double>;

/// Signed facewise bound differences (a minus b). Not an Interval: entries may
/// violate the bound ordering. Used only for volume bookkeeping; consumers
/// apply their own clamping.
template <typename Scalar>
struct BoundDelta {
  typename Interval<Scalar>::Vector lower;
  typename Interval<Scalar>::Vector upper;
};

using BoundDeltad = BoundDelta<double>;

/// Positive/negative part split of a matrix. Acting on stacked interval
/// bounds, the split computes the tightest interval image of a box under the
/// base map. Blocks are derived on demand; nothing is cached.
template <typename Scalar>
struct PsiMatrix {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Matrix base;

  Matrix pos() const { return (base + base.cwiseAbs()) / Scalar(2); }
  Matrix neg() const { return (base - base.cwiseAbs()) / Scalar(2); }
};

using PsiMatrixd = PsiMatrix<double>;

/// Tightest interval containing the image {A v : v in box}.
template <typename Derived>
Interval<typename Derived::Scalar> psi_apply(const Eigen::MatrixBase<Derived>& base,
                                             const Interval<typename Derived::Scalar>& box) {
  using Scalar = typename Derived::Scalar;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (base.cols() != box.dim()) throw std::invalid_argument("psi_apply: dimension mismatch");
  const Matrix pos = (base + base.cwiseAbs()) / Scalar(2);
  const Matrix neg = (base - base.cwiseAbs()) / Scalar(2);
  return Interval<Scalar>(pos * box.lower() + neg * box.upper(),
                          neg * box.lower() + pos * box.upper());
}

template <typename Scalar>
Interval<Scalar> psi_apply(const PsiMatrix<Scalar>& psi, const Interval<Scalar>& box) {
  return psi_apply(psi.base, box);
}

template <typename Scalar>
Interval<Scalar> minkowski_sum(const Interval<Scalar>& a, const Interval<Scalar>& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("minkowski_sum: dimension mismatch");
  return Interval<Scalar>(a.lower() + b.lower(), a.upper() + b.upper());
}

/// Facewise difference of bounds; see BoundDelta.
template <typename Scalar>
BoundDelta<Scalar> difference(const Interval<Scalar>& a, const Interval<Scalar>& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("difference: dimension mismatch");
  return BoundDelta<Scalar>{a.lower() - b.lower(), a.upper() - b.upper()};
}

/// Box intersection; a disengaged optional signals an empty result.
template <typename Scalar>
std::optional<Interval<Scalar>> intersect(const Interval<Scalar>& a, const Interval<Scalar>& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("intersect: dimension mismatch");
  typename Interval<Scalar>::Vector lo = a.lower().cwiseMax(b.lower());
  typename Interval<Scalar>::Vector hi = a.upper().cwiseMin(b.upper());
  if ((lo.array() > hi.array()).any()) return std::nullopt;
  return Interval<Scalar>(std::move(lo), std::move(hi));
}

}  // namespace volpriv

#endif  // VOLPRIV_INTERVAL_HPP_
