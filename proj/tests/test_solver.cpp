#include "doctest.h"

#include "canondual/error.hpp"
#include "canondual/solver.hpp"

#include <cmath>
#include <limits>
#include <random>

using namespace canondual;

namespace {

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }
Vector vec(std::initializer_list<double> v) {
  Vector r(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) r(i++) = x;
  return r;
}

Problem double_well(double f) {
  return Problem({CanonicalTerm(TermKind::Quartic, 1.0, scalar(1.0), -2.0)}, Vector::Constant(1, f));
}

Matrix swap2() {
  Matrix q(2, 2);
  q << 0, 1, 1, 0;
  return q;
}

double cubic_lhs(double s, double alpha, double lambda) { return (s / alpha + lambda) * s * s; }

}  // namespace

TEST_CASE("solve_cubic_dual") {
  auto r = solve_cubic_dual(1.0, 2.0, 0.0);
  REQUIRE(r.size() == 3);
  CHECK(r[0] == 0.0);
  CHECK(r[1] == 0.0);
  CHECK(r[2] == doctest::Approx(-2.0));

  r = solve_cubic_dual(1.0, 2.0, 0.5);
  REQUIRE(r.size() == 3);
  CHECK(r[0] == doctest::Approx(0.2365).epsilon(1e-3));
  CHECK(r[1] < 0.0);
  CHECK(r[2] < r[1]);
  for (double s : r) CHECK(std::abs(cubic_lhs(s, 1.0, 2.0) - 0.125) <= 1e-10);

  r = solve_cubic_dual(1.0, 2.0, 2.0);
  REQUIRE(r.size() == 1);
  CHECK(r[0] > 0.0);
  CHECK(std::abs(cubic_lhs(r[0], 1.0, 2.0) - 2.0) <= 1e-9 * 3.0);

  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> a(0.1, 3.0), l(-2.0, 3.0), f(0.0, 5.0);
  for (int i = 0; i < 200; ++i) {
    const double alpha = a(rng), lambda = l(rng), fn = f(rng);
    const double rhs = 0.5 * fn * fn;
    auto roots = solve_cubic_dual(alpha, lambda, fn);
    REQUIRE(!roots.empty());
    for (std::size_t k = 0; k < roots.size(); ++k) {
      CHECK(std::abs(cubic_lhs(roots[k], alpha, lambda) - rhs) <= 1e-9 * (1.0 + rhs));
      if (k > 0) CHECK(roots[k - 1] >= roots[k]);
    }
  }
}

TEST_CASE("solve_dual on the double-well") {
  SolverConfig cfg;
  SolveReport r = solve_dual(double_well(0.5), cfg);
  CHECK(r.outcome == SolveOutcome::Interior);
  CHECK(r.membership == Membership::Interior);
  const double s = r.sigma_bar(0);
  CHECK(std::abs(cubic_lhs(s, 1.0, 2.0) - 0.125) <= 1e-9);
  const double x = r.x_bar(0);
  CHECK(std::abs(x * x * x - 4.0 * x - 1.0) <= 1e-7);
  CHECK(r.duality_residual <= 1e-7 * (1.0 + std::abs(r.primal_value)));
  CHECK(r.xi_residual <= 1e-7 * (1.0 + std::abs(r.primal_value)));
  CHECK(r.grad_norm <= cfg.grad_tol);
  REQUIRE(r.triality.has_value());
  CHECK(r.triality->label == TrialityLabel::GlobalMin);

  r = solve_dual(double_well(-2.0), cfg);
  CHECK(r.outcome == SolveOutcome::Interior);
  CHECK(r.x_bar(0) < 0.0);
}

TEST_CASE("barrier trace is non-decreasing within each barrier level") {
  SolverConfig cfg;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    Matrix d(2, 3);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 3; ++j) d(i, j) = u(rng);
    Problem p({CanonicalTerm(TermKind::PlainQuadratic, 0.3, Matrix::Identity(3, 3)),
               CanonicalTerm(TermKind::Quartic, 1.0, d, -1.0),
               CanonicalTerm(TermKind::Exponential, 0.5, d.topRows(1))},
              vec({u(rng), u(rng), u(rng)}));
    SolveReport r = solve_dual(p, cfg);
    REQUIRE(!r.barrier_trace.empty());
    double prev = -std::numeric_limits<double>::infinity();
    for (double v : r.barrier_trace) {
      if (std::isnan(v)) {
        prev = -std::numeric_limits<double>::infinity();
        continue;
      }
      CHECK(v >= prev - 1e-12 * (1.0 + std::abs(prev)));
      prev = v;
    }
  }
}

TEST_CASE("solve_dual boundary and empty interior") {
  SolverConfig cfg;
  SolveReport r = solve_dual(double_well(0.0), cfg);
  CHECK(r.outcome == SolveOutcome::Boundary);
  CHECK(r.boundary_flag);
  CHECK(std::abs(r.sigma_bar(0)) < 1e-6);

  // G = -1 constant: no interior
  Problem neg({CanonicalTerm(TermKind::PlainQuadratic, -1.0, scalar(1.0))}, vec({1.0}));
  try {
    solve_dual(neg, cfg);
    FAIL("expected EmptyInterior");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyInterior);
  }
}

TEST_CASE("existence_check") {
  SolverConfig cfg;
  DualLayout qip = DualLayout::sign_quadratic(swap2(), vec({3, 0}));
  ExistenceResult e = existence_check(qip, cfg);
  CHECK(e.interior_nonempty);
  CHECK(e.lambda_min > 0.0);
  CHECK(in_S_plus(qip, e.witness) == Membership::Interior);

  DualLayout eye = DualLayout::sign_quadratic(Matrix::Identity(3, 3), vec({5, -1, 2}));
  e = existence_check(eye, cfg);
  CHECK(e.interior_nonempty);
  CHECK(e.witness.maxCoeff() < 1e-3);

  std::vector<DualInterval> nonpositive{DualInterval{-10.0, 0.0}};
  e = existence_check(double_well(0.0), cfg, nonpositive);
  CHECK_FALSE(e.interior_nonempty);
}

TEST_CASE("perturbed_solve") {
  SolverConfig cfg;
  DualLayout maxcut = DualLayout::sign_quadratic(swap2(), vec({0, 0}));
  SolveReport r = perturbed_solve(maxcut, cfg);
  CHECK((r.outcome == SolveOutcome::PerturbationCertified || r.outcome == SolveOutcome::PerturbationLocal));
  CHECK(std::abs(r.x_bar(0)) == 1.0);
  CHECK(r.x_bar(0) == -r.x_bar(1));
  CHECK(r.primal_value == doctest::Approx(-1.0));
  // sign symmetry
  CHECK(maxcut.primal(-r.x_bar) == doctest::Approx(r.primal_value));

  // already certified: no rounds
  DualLayout easy = DualLayout::sign_quadratic(swap2(), vec({3, 0}));
  SolveReport plain = solve_dual(easy, cfg);
  r = perturbed_solve(easy, cfg);
  CHECK(r.perturbation_rounds == 0);
  CHECK((r.x_bar - plain.x_bar).norm() == 0.0);

  SolverConfig off = cfg;
  off.perturb_delta0 = 0.0;
  r = perturbed_solve(double_well(0.5), off);
  SolveReport direct = solve_dual(double_well(0.5), off);
  CHECK(r.outcome == direct.outcome);
  CHECK(r.sigma_bar(0) == direct.sigma_bar(0));

  r = perturbed_solve(double_well(0.0), cfg);
  CHECK(std::abs(std::abs(r.x_bar(0)) - 2.0) < 1e-5);
  CHECK(std::abs(r.primal_value) < 1e-9);
}

TEST_CASE("dual_critical_points and fc_sweep") {
  SolverConfig cfg;
  auto pts = dual_critical_points(DualLayout::from_problem(double_well(0.5)), cfg);
  CHECK(pts.size() == 3);
  pts = dual_critical_points(DualLayout::from_problem(double_well(-2.0)), cfg);
  CHECK(pts.size() == 1);

  std::vector<double> grid;
  for (int i = 1; i <= 40; ++i) grid.push_back(0.1 * i);
  SweepResult sw = fc_sweep(double_well(0.0), vec({1.0}), grid, cfg);
  REQUIRE(sw.rows.size() == grid.size());
  REQUIRE(sw.threshold.has_value());
  // discriminant of (s + 2) s^2 = f^2 / 2 vanishes at f^2 = 64 / 27
  const double fc = std::sqrt(64.0 / 27.0);
  CHECK(std::abs(*sw.threshold - fc) <= 0.1);

  std::vector<double> high{2.0, 2.5, 3.0};
  sw = fc_sweep(double_well(0.0), vec({1.0}), high, cfg);
  for (const auto& row : sw.rows) CHECK(row.unique);

  std::vector<double> with_zero{0.0, 1.0};
  sw = fc_sweep(double_well(0.0), vec({1.0}), with_zero, cfg);
  CHECK_FALSE(sw.rows[0].unique);

  std::vector<double> bad{1.0, 0.5};
  CHECK_THROWS_AS(fc_sweep(double_well(0.0), vec({1.0}), bad, cfg), Error);
}

TEST_CASE("solver config validation") {
  SolverConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.barrier_shrink = 1.5;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = SolverConfig{};
  cfg.max_inner = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
}
