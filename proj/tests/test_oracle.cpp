#include "doctest.h"

#include "canondual/error.hpp"
#include "canondual/oracle.hpp"

#include <cmath>
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

}  // namespace

TEST_CASE("enumerate_signs examples") {
  Matrix q(2, 2);
  q << 0, 1, 1, 0;
  oracle::OracleResult r = oracle::enumerate_signs({q, vec({3, 0})});
  CHECK((r.best_x - vec({1, -1})).norm() == 0.0);
  CHECK(r.best_value == -4.0);
  CHECK(r.samples == 4);
  CHECK(r.method == "enumeration");

  const int n = 5;
  r = oracle::enumerate_signs({Matrix::Zero(n, n), Vector::Ones(n)});
  CHECK((r.best_x - Vector::Ones(n)).norm() == 0.0);
  CHECK(r.best_value == -n);

  r = oracle::enumerate_signs({Matrix::Identity(n, n), Vector::Zero(n)});
  CHECK(r.best_value == doctest::Approx(n / 2.0));
  CHECK((r.best_x + Vector::Ones(n)).norm() == 0.0);
  CHECK(r.minima.size() == 1);

  try {
    oracle::enumerate_signs({Matrix::Zero(25, 25), Vector::Zero(25)});
    FAIL("expected TooLarge");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TooLarge);
  }
}

TEST_CASE("enumerate_signs is independent of the thread count") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int n = 15;
  Matrix q(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) q(i, j) = q(j, i) = u(rng);
  Vector f(n);
  for (int i = 0; i < n; ++i) f(i) = u(rng);
  auto a = oracle::enumerate_signs({q, f}, 1);
  auto b = oracle::enumerate_signs({q, f}, 4);
  CHECK(a.best_value == b.best_value);
  CHECK((a.best_x - b.best_x).norm() == 0.0);
  // no single flip improves on the optimum
  for (int i = 0; i < n; ++i) {
    Vector x = a.best_x;
    x(i) = -x(i);
    CHECK(0.5 * x.dot(q * x) - x.dot(f) >= a.best_value - 1e-12);
  }
}

TEST_CASE("grid_multistart examples") {
  oracle::Box box{vec({-4.0}), vec({4.0})};
  auto r = oracle::grid_multistart(double_well(0.5), box, 4001, false, 1);
  CHECK(r.best_x(0) == doctest::Approx(2.1149).epsilon(1e-3));
  CHECK(r.samples == 4001);

  r = oracle::grid_multistart(double_well(0.0), box, 4001, true, 1);
  CHECK(std::abs(r.best_value) < 1e-12);
  bool plus = false, minus = false;
  for (const auto& m : r.minima) {
    if (std::abs(m(0) - 2.0) < 1e-6) plus = true;
    if (std::abs(m(0) + 2.0) < 1e-6) minus = true;
  }
  CHECK(plus);
  CHECK(minus);

  Matrix d(2, 2);
  d << 2, 1, 0, 1;
  Problem convex({CanonicalTerm(TermKind::PlainQuadratic, 1.0, d)}, vec({1, -0.5}));
  Vector exact = (d.transpose() * d).ldlt().solve(vec({1, -0.5}));
  oracle::Box box2{vec({-4, -4}), vec({4, 4})};
  r = oracle::grid_multistart(convex, box2, 401, false, 1);
  CHECK((r.best_x - exact).cwiseAbs().maxCoeff() <= 0.02 + 1e-12);
  r = oracle::grid_multistart(convex, box2, 401, true, 1);
  CHECK((r.best_x - exact).norm() < 1e-6);
}

TEST_CASE("grid_multistart random sampling is seeded") {
  const int n = 8;
  Problem p({CanonicalTerm(TermKind::PlainQuadratic, 1.0, Matrix::Identity(n, n))}, Vector::Ones(n));
  oracle::Box box{Vector::Constant(n, -2.0), Vector::Constant(n, 2.0)};
  auto a = oracle::grid_multistart(p, box, 2000, true, 5);
  auto b = oracle::grid_multistart(p, box, 2000, true, 5, 3);
  CHECK(a.best_value == b.best_value);
  CHECK(a.method == "multistart");
  CHECK((a.best_x - Vector::Ones(n)).norm() < 1e-6);
}

TEST_CASE("fd_gradient") {
  auto half_sq = [](const Vector& x) { return 0.5 * x.squaredNorm(); };
  Vector x = vec({0.3, -2.0, 5.0});
  CHECK((oracle::fd_gradient(half_sq, x) - x).norm() < 1e-8);

  Problem p = double_well(0.5);
  auto pi = [&](const Vector& v) { return eval_primal(p, v); };
  const double g = oracle::fd_gradient(pi, vec({1.0}))(0);
  CHECK(g == doctest::Approx(1.0 * (0.5 - 2.0) - 0.5).epsilon(1e-8));

  // Hessian of 1/2 x^T A x
  Matrix a(2, 2);
  a << 3, 1, 1, 2;
  auto quad = [&](const Vector& v) { return 0.5 * v.dot(a * v); };
  CHECK((oracle::fd_hessian(quad, vec({0.7, -0.1})) - a).norm() < 1e-5);
  CHECK((oracle::fd_hessian([&](const Vector& v) { return Vector(a * v); }, vec({0.7, -0.1})) - a).norm() < 1e-8);
}

TEST_CASE("legendre_check examples") {
  auto r = oracle::legendre_check(CanonicalTerm(TermKind::Quartic, 1.0, scalar(1.0), -2.0), {0.0, 1.0, 3.0});
  CHECK(r.max_residual <= 1e-12);
  CHECK(r.max_sup_gap <= 1e-4);
  CHECK(r.samples == 3);

  r = oracle::legendre_check(CanonicalTerm(TermKind::Exponential, 1.0, scalar(1.0)), {0.0});
  CHECK(r.max_residual <= 1e-12);

  r = oracle::legendre_check(CanonicalTerm(TermKind::XLogX, 1.0, scalar(1.0)), {1.0});
  CHECK(r.max_residual <= 1e-12);
  CHECK(r.max_sup_gap <= 1e-4);
}

TEST_CASE("legendre_check on 100 samples for every kind") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.05, 3.0);
  std::vector<double> xi(100);
  for (auto& v : xi) v = u(rng);
  for (auto kind : {TermKind::PlainQuadratic, TermKind::Quartic, TermKind::Exponential, TermKind::XLogX}) {
    const double beta = kind == TermKind::Quartic ? -1.5 : 0.0;
    auto r = oracle::legendre_check(CanonicalTerm(kind, 1.3, scalar(1.0), beta), xi);
    CAPTURE(to_string(kind));
    CHECK(r.samples == 100);
    CHECK(r.max_residual <= 1e-9);
    CHECK(r.max_sup_gap <= 1e-4);
  }
}
