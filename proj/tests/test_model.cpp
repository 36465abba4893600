#include "doctest.h"

#include "canondual/error.hpp"
#include "canondual/model.hpp"

#include <cmath>
#include <random>
#include <string>

using namespace canondual;

namespace {

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

Problem double_well(double f) {
  return Problem({CanonicalTerm(TermKind::Quartic, 1.0, scalar(1.0), -2.0)}, Vector::Constant(1, f));
}

ErrorCode code_of(const std::string& text) {
  try {
    load_problem(text);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("document was accepted: " << text);
  return ErrorCode::ParseError;
}

}  // namespace

TEST_CASE("eval_primal examples") {
  CHECK(eval_primal(double_well(0.5), Vector::Zero(1)) == doctest::Approx(2.0));

  // 1/2 x^2 = lambda
  Vector x = Vector::Constant(1, 2.0);
  CHECK(std::abs(eval_primal(double_well(0.0), x)) < 1e-15);

  Problem e({CanonicalTerm(TermKind::Exponential, 1.0, scalar(1.0))}, Vector::Zero(1));
  CHECK(eval_primal(e, Vector::Zero(1)) == doctest::Approx(1.0));

  Problem xl({CanonicalTerm(TermKind::XLogX, 1.0, scalar(1.0))}, Vector::Zero(1));
  CHECK(eval_primal(xl, Vector::Zero(1)) == 0.0);

  Problem big({CanonicalTerm(TermKind::Exponential, 1.0, scalar(1.0))}, Vector::Zero(1));
  CHECK_THROWS_AS(eval_primal(big, Vector::Constant(1, 100.0)), Error);
}

TEST_CASE("conjugate values and gradients") {
  CanonicalTerm quartic(TermKind::Quartic, 1.0, scalar(1.0), -2.0);
  // sup_xi [xi s - 1/2 (xi - 2)^2] at xi = s + 2: 1/2 s^2 + 2 s
  CHECK(quartic.conj_value(1.0) == doctest::Approx(2.5));
  CHECK(quartic.conj_grad(1.0) == doctest::Approx(3.0));

  CanonicalTerm ex(TermKind::Exponential, 1.0, scalar(1.0));
  CHECK(ex.conj_value(1.0) == doctest::Approx(-1.0));
  CHECK(std::abs(ex.conj_grad(1.0)) < 1e-15);

  CanonicalTerm xl(TermKind::XLogX, 1.0, scalar(1.0));
  CHECK(xl.conj_value(1.0) == doctest::Approx(1.0));
  CHECK(xl.conj_grad(1.0) == doctest::Approx(1.0));

  CanonicalTerm plain(TermKind::PlainQuadratic, 1.0, scalar(1.0));
  CHECK_FALSE(plain.has_dual_coordinate());
  CHECK_THROWS_AS(plain.conj_value(1.0), Error);
}

TEST_CASE("conjugate domain violations") {
  CanonicalTerm quartic(TermKind::Quartic, 1.0, scalar(1.0), -2.0);
  CHECK_NOTHROW(quartic.conj_value(-2.0));  // closed boundary
  try {
    quartic.conj_value(-2.5);
    FAIL("expected DomainViolation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DomainViolation);
  }
  CanonicalTerm ex(TermKind::Exponential, 1.0, scalar(1.0));
  CHECK_THROWS_AS(ex.conj_value(0.0), Error);
  CHECK_THROWS_AS(ex.conj_value(-1.0), Error);
  CanonicalTerm neg(TermKind::Exponential, -2.0, scalar(1.0));
  CHECK_NOTHROW(neg.conj_value(-1.0));
  CHECK_THROWS_AS(neg.conj_value(1.0), Error);

  CanonicalTerm xl(TermKind::XLogX, 1.0, scalar(1.0));
  CHECK(xl.phi(0.0) == 0.0);
  CHECK_THROWS_AS(xl.phi_prime(0.0), Error);
}

TEST_CASE("Fenchel-Young equality and biconjugation on random samples") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> a(0.2, 3.0);
  std::uniform_real_distribution<double> b(-3.0, 3.0);
  std::uniform_real_distribution<double> xi_dist(0.0, 4.0);
  for (int i = 0; i < 100; ++i) {
    const double alpha = a(rng);
    const double beta = b(rng);
    const double xi = xi_dist(rng);
    const double xi_pos = xi + 1e-3;
    CAPTURE(alpha);
    CAPTURE(beta);
    CAPTURE(xi);

    // duality maps written out by hand
    CanonicalTerm q(TermKind::Quartic, alpha, scalar(1.0), beta);
    double phi = 0.5 * alpha * (xi + beta) * (xi + beta);
    double s = alpha * (xi + beta);
    if (s >= alpha * beta) {
      CHECK(std::abs(phi + q.conj_value(s) - xi * s) <= 1e-9 * (1.0 + std::abs(phi)));
      CHECK(std::abs(q.conj_grad(s) - xi) <= 1e-9 * (1.0 + xi));
    }

    CanonicalTerm e(TermKind::Exponential, alpha, scalar(1.0));
    phi = alpha * std::exp(xi);
    s = alpha * std::exp(xi);
    CHECK(std::abs(phi + e.conj_value(s) - xi * s) <= 1e-9 * (1.0 + std::abs(phi)));
    CHECK(std::abs(e.conj_grad(s) - xi) <= 1e-9 * (1.0 + xi));

    CanonicalTerm x(TermKind::XLogX, alpha, scalar(1.0));
    phi = alpha * xi_pos * std::log(xi_pos);
    s = alpha * (std::log(xi_pos) + 1.0);
    CHECK(std::abs(phi + x.conj_value(s) - xi_pos * s) <= 1e-9 * (1.0 + std::abs(phi)));
    CHECK(std::abs(x.conj_grad(s) - xi_pos) <= 1e-9 * (1.0 + xi_pos));
  }
}

TEST_CASE("sign-integer evaluation agrees with continuous on the hypercube") {
  Matrix d(2, 3);
  d << 1, -1, 0, 0.5, 2, 1;
  Vector f(3);
  f << 0.3, -1, 2;
  std::vector<CanonicalTerm> terms{CanonicalTerm(TermKind::PlainQuadratic, -1.0, d),
                                   CanonicalTerm(TermKind::Quartic, 0.5, d.topRows(1), -1.0)};
  Problem cont(terms, f, VariableKind::Continuous);
  Problem sign(terms, f, VariableKind::SignInteger);
  for (int mask = 0; mask < 8; ++mask) {
    Vector x(3);
    for (int i = 0; i < 3; ++i) x(i) = (mask >> i) & 1 ? 1.0 : -1.0;
    CHECK(eval_primal(cont, x) == eval_primal(sign, x));
  }
}

TEST_CASE("double-well is nonnegative when f = 0") {
  Problem p = double_well(0.0);
  for (int i = 0; i <= 200; ++i) {
    Vector x = Vector::Constant(1, -5.0 + 0.05 * i);
    CHECK(eval_primal(p, x) >= -1e-12);
  }
}

TEST_CASE("primal gradient matches the closed form") {
  Problem p = double_well(0.5);
  for (double x : {-3.0, -1.0, 0.0, 1.0, 2.5}) {
    Vector v = Vector::Constant(1, x);
    CHECK(primal_gradient(p, v)(0) == doctest::Approx(x * (0.5 * x * x - 2.0) - 0.5));
  }
}

TEST_CASE("load_problem") {
  Problem p = load_problem(
      R"({"n":1,"f":[0.5],"variables":"continuous",)"
      R"("terms":[{"kind":"quartic","alpha":1,"beta":-2,"factor":[[1]]}]})");
  CHECK(p.n() == 1);
  REQUIRE(p.terms().size() == 1);
  CHECK(p.terms()[0].kind() == TermKind::Quartic);
  CHECK(p.terms()[0].beta() == -2.0);
  CHECK(p.terms()[0].q()(0, 0) == 1.0);
  CHECK(p.f()(0) == 0.5);
  CHECK(p.term_dual_dim() == 1);

  Problem q = load_problem(
      R"({"n":2,"f":[0,0],"variables":"sign_integer",)"
      R"("terms":[{"kind":"plain_quadratic","alpha":2,"factor":[[1,2],[0,1]]}]})");
  Matrix expected(2, 2);
  expected << 1, 2, 2, 5;
  CHECK((q.terms()[0].q() - expected).norm() == 0.0);
  CHECK(q.variables() == VariableKind::SignInteger);

  CHECK(code_of(R"({"n":1,"variables":"continuous","terms":[{"kind":"quartic","alpha":1,"factor":[[1]]}]})") ==
        ErrorCode::SchemaError);
  CHECK(code_of(R"({"n":3,"f":[0,0,0],"variables":"continuous",)"
                R"("terms":[{"kind":"quartic","alpha":1,"factor":[[1,2]]}]})") ==
        ErrorCode::DimensionMismatch);
  CHECK(code_of(R"({"n":1,"f":[0],"variables":"continuous","extra":1,)"
                R"("terms":[{"kind":"quartic","alpha":1,"factor":[[1]]}]})") == ErrorCode::SchemaError);
  CHECK(code_of(R"({"n":1,"f":[0],"variables":"continuous",)"
                R"("terms":[{"kind":"cubic","alpha":1,"factor":[[1]]}]})") == ErrorCode::SchemaError);
  CHECK(code_of(R"({"n":1,"f":[0],"variables":"continuous",)"
                R"("terms":[{"kind":"quartic","alpha":0,"factor":[[1]]}]})") == ErrorCode::SchemaError);
  CHECK(code_of(R"({"n":1,"f":[0],"variables":"continuous","terms":[]})") == ErrorCode::SchemaError);
}

TEST_CASE("schema errors carry the field path") {
  try {
    load_problem(R"({"n":1,"f":[0],"variables":"continuous",)"
                 R"("terms":[{"kind":"quartic","alpha":"x","factor":[[1]]}]})");
    FAIL("accepted");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("$.terms[0].alpha") != std::string::npos);
  }
}
