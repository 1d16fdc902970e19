#include "volpriv/ccg.hpp"

#include <numeric>
#include <utility>

#include "volpriv/lp.hpp"

namespace volpriv {

Ccg::Ccg(Eigen::MatrixXd G, Eigen::VectorXd c, Eigen::SparseMatrix<double> A, Eigen::VectorXd b,
         std::vector<Eigen::Index> block_sizes)
    : generators(std::move(G)),
      center(std::move(c)),
      constraints_A(std::move(A)),
      constraints_b(std::move(b)),
      blocks(std::move(block_sizes)) {
  if (center.size() == 0 || generators.rows() != center.size())
    throw std::invalid_argument("Ccg: generator rows must match the ambient dimension");
  if (constraints_A.rows() != constraints_b.size())
    throw std::invalid_argument("Ccg: constraint rows and right-hand side disagree");
  if (constraints_A.rows() > 0 && constraints_A.cols() != generators.cols())
    throw std::invalid_argument("Ccg: constraint width must match the generator count");
  const Eigen::Index total = std::accumulate(blocks.begin(), blocks.end(), Eigen::Index{0});
  if (total != generators.cols())
    throw std::invalid_argument("Ccg: block sizes must sum to the generator count");
  if (generators.cols() > 0 && blocks.empty())
    throw std::invalid_argument("Ccg: generator blocks missing");
}

Ccg from_interval(const Intervald& box) {
  const Eigen::Index n = box.dim();
  Eigen::MatrixXd G = box.radius().asDiagonal();
  return Ccg(std::move(G), box.center(), Eigen::SparseMatrix<double>(0, n), Eigen::VectorXd(0),
             {n});
}

Ccg linear_map(const Eigen::Ref<const Eigen::MatrixXd>& R, const Ccg& z) {
  if (R.cols() != z.dim()) throw std::invalid_argument("linear_map: dimension mismatch");
  return Ccg(R * z.generators, R * z.center, z.constraints_A, z.constraints_b, z.blocks);
}

namespace {

std::vector<Eigen::Index> concat_blocks(const Ccg& x, const Ccg& y) {
  std::vector<Eigen::Index> blocks = x.blocks;
  blocks.insert(blocks.end(), y.blocks.begin(), y.blocks.end());
  return blocks;
}

void append_sparse(std::vector<Eigen::Triplet<double>>& trips, const Eigen::SparseMatrix<double>& M,
                   Eigen::Index row_off, Eigen::Index col_off) {
  for (int k = 0; k < M.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(M, k); it; ++it)
      trips.emplace_back(static_cast<int>(row_off + it.row()), static_cast<int>(col_off + it.col()),
                         it.value());
}

void append_dense(std::vector<Eigen::Triplet<double>>& trips,
                  const Eigen::Ref<const Eigen::MatrixXd>& M, Eigen::Index row_off,
                  Eigen::Index col_off, double scale = 1.0) {
  for (Eigen::Index r = 0; r < M.rows(); ++r)
    for (Eigen::Index c = 0; c < M.cols(); ++c)
      if (M(r, c) != 0.0)
        trips.emplace_back(static_cast<int>(row_off + r), static_cast<int>(col_off + c),
                           scale * M(r, c));
}

}  // namespace

Ccg minkowski_sum(const Ccg& x, const Ccg& y) {
  if (x.dim() != y.dim()) throw std::invalid_argument("minkowski_sum: dimension mismatch");
  const Eigen::Index ngx = x.num_generators(), ngy = y.num_generators();
  const Eigen::Index ncx = x.num_constraints(), ncy = y.num_constraints();

  Eigen::MatrixXd G(x.dim(), ngx + ngy);
  G << x.generators, y.generators;

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(x.constraints_A.nonZeros() + y.constraints_A.nonZeros()));
  append_sparse(trips, x.constraints_A, 0, 0);
  append_sparse(trips, y.constraints_A, ncx, ngx);
  Eigen::SparseMatrix<double> A(ncx + ncy, ngx + ngy);
  A.setFromTriplets(trips.begin(), trips.end());

  Eigen::VectorXd b(ncx + ncy);
  b << x.constraints_b, y.constraints_b;

  return Ccg(std::move(G), x.center + y.center, std::move(A), std::move(b), concat_blocks(x, y));
}

Ccg intersect(const Ccg& x, const Ccg& y) {
  if (x.dim() != y.dim()) throw std::invalid_argument("intersect: dimension mismatch");
  const Eigen::Index n = x.dim();
  const Eigen::Index ngx = x.num_generators(), ngy = y.num_generators();
  const Eigen::Index ncx = x.num_constraints(), ncy = y.num_constraints();

  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n, ngx + ngy);
  G.leftCols(ngx) = x.generators;

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<size_t>(x.constraints_A.nonZeros() + y.constraints_A.nonZeros()) +
                static_cast<size_t>(n * (ngx + ngy)));
  append_sparse(trips, x.constraints_A, 0, 0);
  append_sparse(trips, y.constraints_A, ncx, ngx);
  append_dense(trips, x.generators, ncx + ncy, 0);
  append_dense(trips, y.generators, ncx + ncy, ngx, -1.0);
  Eigen::SparseMatrix<double> A(ncx + ncy + n, ngx + ngy);
  A.setFromTriplets(trips.begin(), trips.end());

  Eigen::VectorXd b(ncx + ncy + n);
  b << x.constraints_b, y.constraints_b, y.center - x.center;

  return Ccg(std::move(G), x.center, std::move(A), std::move(b), concat_blocks(x, y));
}

namespace {

// Feasibility system over xi in [-1,1]^ng with rows A xi = b and optionally
// G xi = point - c stacked below.
LpProblem membership_problem(const Ccg& z, const Eigen::VectorXd* point) {
  const Eigen::Index ng = z.num_generators();
  LpProblem p;
  p.objective = Eigen::VectorXd::Zero(ng);
  p.lower = Eigen::VectorXd::Constant(ng, -1.0);
  p.upper = Eigen::VectorXd::Constant(ng, 1.0);
  p.ineq_A.resize(0, ng);
  p.ineq_b.resize(0);

  const Eigen::Index extra = point ? z.dim() : 0;
  std::vector<Eigen::Triplet<double>> trips;
  append_sparse(trips, z.constraints_A, 0, 0);
  if (point) append_dense(trips, z.generators, z.num_constraints(), 0);
  p.eq_A.resize(z.num_constraints() + extra, ng);
  p.eq_A.setFromTriplets(trips.begin(), trips.end());
  p.eq_b.resize(z.num_constraints() + extra);
  p.eq_b.head(z.num_constraints()) = z.constraints_b;
  if (point) p.eq_b.tail(extra) = *point - z.center;
  return p;
}

}  // namespace

bool is_member(const Ccg& z, const Eigen::Ref<const Eigen::VectorXd>& point) {
  if (point.size() != z.dim()) throw std::invalid_argument("is_member: dimension mismatch");
  if (z.num_generators() == 0) return (point - z.center).lpNorm<Eigen::Infinity>() <= 1e-9;
  Eigen::VectorXd pt = point;
  SimplexSolver solver(membership_problem(z, &pt));
  const LpStatus st = solver.ensure_feasible();
  if (st == LpStatus::NumericalFailure)
    throw std::runtime_error("is_member: LP solver failed");
  return st == LpStatus::Optimal;
}

bool is_empty(const Ccg& z) {
  if (z.num_generators() == 0) return false;
  SimplexSolver solver(membership_problem(z, nullptr));
  const LpStatus st = solver.ensure_feasible();
  if (st == LpStatus::NumericalFailure) throw std::runtime_error("is_empty: LP solver failed");
  return st == LpStatus::Infeasible;
}

Intervald interval_hull(const Ccg& z) {
  const Eigen::Index n = z.dim();
  if (z.num_generators() == 0) return Intervald::point(z.center);

  SimplexSolver solver(membership_problem(z, nullptr));
  if (solver.ensure_feasible() != LpStatus::Optimal)
    throw EmptySetError("interval_hull: set is empty");

  Eigen::VectorXd lower(n), upper(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::VectorXd g = z.generators.row(i).transpose();
    LpSolution losol = solver.minimize(g);
    if (losol.status != LpStatus::Optimal) throw std::runtime_error("interval_hull: LP failed");
    lower[i] = losol.objective_value + z.center[i];
    LpSolution hisol = solver.minimize(-g);
    if (hisol.status != LpStatus::Optimal) throw std::runtime_error("interval_hull: LP failed");
    upper[i] = -hisol.objective_value + z.center[i];
    if (upper[i] < lower[i]) upper[i] = lower[i];  // solver noise on degenerate axes
  }
  return Intervald(std::move(lower), std::move(upper));
}

double mc_volume(const Ccg& z, int samples, RngStream& rng) {
  if (samples < 1) throw std::invalid_argument("mc_volume: samples must be >= 1");
  const Intervald hull = interval_hull(z);
  const double hull_volume = hull.volume();
  if (hull_volume == 0.0) return 0.0;

  long hits = 0;
  Eigen::VectorXd point(hull.dim());
  for (int s = 0; s < samples; ++s) {
    for (Eigen::Index i = 0; i < hull.dim(); ++i)
      point[i] = rng.uniform(hull.lower()[i], hull.upper()[i]);
    if (is_member(z, point)) ++hits;
  }
  return hull_volume * static_cast<double>(hits) / static_cast<double>(samples);
}

}  // namespace volpriv
