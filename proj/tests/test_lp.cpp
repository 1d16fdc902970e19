#include <doctest.h>

#include <Eigen/Dense>
#include <limits>
#include <sstream>

#include "oracles.hpp"
#include "volpriv/lp.hpp"
#include "volpriv/rng.hpp"

using volpriv::LpProblem;
using volpriv::LpSolution;
using volpriv::LpStatus;
using volpriv::RngStream;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

LpProblem make_problem(const Eigen::VectorXd& c, const Eigen::MatrixXd& ineq_A,
                       const Eigen::VectorXd& ineq_b, const Eigen::VectorXd& lo,
                       const Eigen::VectorXd& hi) {
  LpProblem p;
  p.objective = c;
  p.ineq_A = ineq_A.sparseView();
  p.ineq_b = ineq_b;
  p.eq_A.resize(0, c.size());
  p.eq_b.resize(0);
  p.lower = lo;
  p.upper = hi;
  return p;
}

}  // namespace

TEST_CASE("minimize v subject to v >= 3") {
  Eigen::MatrixXd A(1, 1);
  A << -1.0;
  const auto p = make_problem(Eigen::VectorXd::Ones(1), A, Eigen::VectorXd::Constant(1, -3.0),
                              Eigen::VectorXd::Constant(1, -kInf),
                              Eigen::VectorXd::Constant(1, kInf));
  const LpSolution sol = volpriv::solve(p);
  REQUIRE(sol.status == LpStatus::Optimal);
  CHECK(sol.objective_value == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(volpriv::check_feasible(p, sol.values).feasible);
}

TEST_CASE("minimize -v with v free is unbounded") {
  const auto p = make_problem(-Eigen::VectorXd::Ones(1), Eigen::MatrixXd(0, 1),
                              Eigen::VectorXd(0), Eigen::VectorXd::Constant(1, -kInf),
                              Eigen::VectorXd::Constant(1, kInf));
  CHECK(volpriv::solve(p).status == LpStatus::Unbounded);
}

TEST_CASE("two-variable program with a binding upper bound") {
  // minimize v1 + v2 s.t. v1 + v2 >= 1, v1, v2 >= 0, v1 <= 0.25
  Eigen::MatrixXd A(1, 2);
  A << -1.0, -1.0;
  Eigen::VectorXd lo = Eigen::VectorXd::Zero(2);
  Eigen::VectorXd hi(2);
  hi << 0.25, kInf;
  const auto p = make_problem(Eigen::VectorXd::Ones(2), A, Eigen::VectorXd::Constant(1, -1.0), lo,
                              hi);
  const LpSolution sol = volpriv::solve(p);
  REQUIRE(sol.status == LpStatus::Optimal);
  CHECK(sol.objective_value == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(volpriv::check_feasible(p, sol.values).feasible);
}

TEST_CASE("infeasible rows are reported as such") {
  Eigen::MatrixXd A(2, 1);
  A << 1.0, -1.0;  // v <= 0 and v >= 1
  Eigen::VectorXd b(2);
  b << 0.0, -1.0;
  const auto p = make_problem(Eigen::VectorXd::Ones(1), A, b,
                              Eigen::VectorXd::Constant(1, -kInf),
                              Eigen::VectorXd::Constant(1, kInf));
  CHECK(volpriv::solve(p).status == LpStatus::Infeasible);
}

TEST_CASE("bounds alone decide box problems") {
  const auto p = make_problem(-Eigen::VectorXd::Ones(1), Eigen::MatrixXd(0, 1), Eigen::VectorXd(0),
                              Eigen::VectorXd::Zero(1), Eigen::VectorXd::Constant(1, 5.0));
  const LpSolution sol = volpriv::solve(p);
  REQUIRE(sol.status == LpStatus::Optimal);
  CHECK(sol.values[0] == doctest::Approx(5.0));
}

TEST_CASE("equality rows and redundant duplicates") {
  LpProblem p;
  p.objective = Eigen::VectorXd::Zero(2);
  p.objective[0] = 1.0;
  Eigen::MatrixXd eq(2, 2);
  eq << 1.0, 1.0, 1.0, 1.0;  // duplicated row exercises the redundant-row path
  p.eq_A = eq.sparseView();
  p.eq_b = Eigen::VectorXd::Ones(2);
  p.ineq_A.resize(0, 2);
  p.ineq_b.resize(0);
  p.lower = Eigen::VectorXd::Zero(2);
  p.upper = Eigen::VectorXd::Constant(2, kInf);
  const LpSolution sol = volpriv::solve(p);
  REQUIRE(sol.status == LpStatus::Optimal);
  CHECK(sol.objective_value == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(sol.values[1] == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("check_feasible flags violations with the worst residual") {
  Eigen::MatrixXd A(1, 2);
  A << 1.0, 1.0;
  const auto p = make_problem(Eigen::VectorXd::Ones(2), A, Eigen::VectorXd::Ones(1),
                              Eigen::VectorXd::Zero(2), Eigen::VectorXd::Constant(2, kInf));
  Eigen::VectorXd bad(2);
  bad << 2.0, 0.0;
  const auto res = volpriv::check_feasible(p, bad);
  CHECK(!res.feasible);
  CHECK(res.worst_residual == doctest::Approx(1.0));
}

TEST_CASE("determinism: identical problems give identical results") {
  RngStream rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::MatrixXd A(3, 4);
    Eigen::VectorXd c(4), b(3);
    for (int i = 0; i < A.size(); ++i) A(i / 4, i % 4) = rng.uniform(-1, 1);
    for (int i = 0; i < 4; ++i) c[i] = rng.uniform(-1, 1);
    Eigen::VectorXd x0(4);
    for (int i = 0; i < 4; ++i) x0[i] = rng.uniform(0, 1);
    b = A * x0 + Eigen::VectorXd::Constant(3, 0.5);
    const auto p = make_problem(c, A, b, Eigen::VectorXd::Zero(4), Eigen::VectorXd::Ones(4));
    const LpSolution s1 = volpriv::solve(p);
    const LpSolution s2 = volpriv::solve(p);
    CHECK(s1.status == s2.status);
    if (s1.status == LpStatus::Optimal) {
      CHECK(s1.objective_value == s2.objective_value);
      CHECK(s1.values == s2.values);
    }
  }
}

TEST_CASE("weak duality against rejection-sampled feasible points") {
  RngStream rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 3;
    Eigen::MatrixXd A(2, n);
    for (int i = 0; i < A.size(); ++i) A(i / n, i % n) = rng.uniform(-1, 1);
    Eigen::VectorXd interior(n);
    for (int i = 0; i < n; ++i) interior[i] = rng.uniform(0.2, 0.8);
    const Eigen::VectorXd b = A * interior + Eigen::VectorXd::Constant(2, 0.3);
    Eigen::VectorXd c(n);
    for (int i = 0; i < n; ++i) c[i] = rng.uniform(-1, 1);
    const auto p = make_problem(c, A, b, Eigen::VectorXd::Zero(n), Eigen::VectorXd::Ones(n));
    const LpSolution sol = volpriv::solve(p);
    REQUIRE(sol.status == LpStatus::Optimal);
    for (int s = 0; s < 200; ++s) {
      Eigen::VectorXd x(n);
      for (int i = 0; i < n; ++i) x[i] = rng.uniform01();
      if (((A * x - b).array() <= 0).all()) CHECK(c.dot(x) >= sol.objective_value - 1e-7);
    }
  }
}

TEST_CASE("optimum matches brute-force vertex enumeration on small programs") {
  RngStream rng(41);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform01() * 3);  // 2..4 variables
    Eigen::MatrixXd A(3, n);
    for (int i = 0; i < A.size(); ++i) A(i / n, i % n) = rng.uniform(-1, 1);
    Eigen::VectorXd interior(n);
    for (int i = 0; i < n; ++i) interior[i] = rng.uniform(-0.5, 0.5);
    const Eigen::VectorXd b = A * interior + Eigen::VectorXd::Constant(3, 0.4);
    Eigen::VectorXd c(n);
    for (int i = 0; i < n; ++i) c[i] = rng.uniform(-1, 1);
    const Eigen::VectorXd lo = Eigen::VectorXd::Constant(n, -1.0);
    const Eigen::VectorXd hi = Eigen::VectorXd::Constant(n, 1.0);

    const auto p = make_problem(c, A, b, lo, hi);
    const LpSolution sol = volpriv::solve(p);
    REQUIRE(sol.status == LpStatus::Optimal);

    const auto brute = oracles::vertex_enumerate_min(A, b, lo, hi, c);
    REQUIRE(brute.found);
    CHECK(sol.objective_value == doctest::Approx(brute.objective).epsilon(1e-7));
  }
}

TEST_CASE("warm re-optimization matches fresh solves") {
  RngStream rng(53);
  Eigen::MatrixXd A(2, 3);
  for (int i = 0; i < A.size(); ++i) A(i / 3, i % 3) = rng.uniform(-1, 1);
  const Eigen::VectorXd b = Eigen::VectorXd::Constant(2, 1.0);
  auto p = make_problem(Eigen::VectorXd::Zero(3), A, b, Eigen::VectorXd::Constant(3, -1.0),
                        Eigen::VectorXd::Constant(3, 1.0));
  volpriv::SimplexSolver warm(p);
  REQUIRE(warm.ensure_feasible() == LpStatus::Optimal);
  for (int i = 0; i < 3; ++i) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(3);
    c[i] = 1.0;
    const LpSolution via_warm = warm.minimize(c);
    p.objective = c;
    const LpSolution fresh = volpriv::solve(p);
    REQUIRE(via_warm.status == LpStatus::Optimal);
    CHECK(via_warm.objective_value == doctest::Approx(fresh.objective_value).epsilon(1e-9));
  }
}

TEST_CASE("problem validation names defects") {
  LpProblem p;
  p.objective = Eigen::VectorXd::Ones(2);
  p.ineq_A.resize(1, 2);
  p.ineq_b = Eigen::VectorXd::Zero(2);  // row mismatch
  p.eq_A.resize(0, 2);
  p.eq_b.resize(0);
  p.lower = Eigen::VectorXd::Zero(2);
  p.upper = Eigen::VectorXd::Ones(2);
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);

  p.ineq_b = Eigen::VectorXd::Zero(1);
  p.lower[0] = 2.0;  // inverted bound
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("dump produces a readable listing") {
  Eigen::MatrixXd A(1, 2);
  A << 1.0, -2.0;
  auto p = make_problem(Eigen::VectorXd::Ones(2), A, Eigen::VectorXd::Ones(1),
                        Eigen::VectorXd::Zero(2), Eigen::VectorXd::Ones(2));
  p.names = {"alpha", "beta"};
  const std::string text = volpriv::dump_to_string(p);
  CHECK(text.find("minimize") != std::string::npos);
  CHECK(text.find("alpha") != std::string::npos);
  CHECK(text.find("<=") != std::string::npos);
}
