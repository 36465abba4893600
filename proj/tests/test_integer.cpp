#include "doctest.h"

#include "canondual/error.hpp"
#include "canondual/integer.hpp"

#include <cmath>
#include <limits>
#include <random>

using namespace canondual;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector r(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) r(i++) = x;
  return r;
}

Matrix swap2() {
  Matrix q(2, 2);
  q << 0, 1, 1, 0;
  return q;
}

// brute force over all sign vectors, written independently of the oracle module
double brute_min(const QipInstance& inst, Vector* argmin) {
  const int n = static_cast<int>(inst.n());
  double best = std::numeric_limits<double>::infinity();
  for (long mask = 0; mask < (1L << n); ++mask) {
    Vector x(n);
    for (int i = 0; i < n; ++i) x(i) = (mask >> i) & 1 ? 1.0 : -1.0;
    const double v = 0.5 * x.dot(inst.Q * x) - x.dot(inst.f);
    if (v < best) {
      best = v;
      if (argmin) *argmin = x;
    }
  }
  return best;
}

}  // namespace

TEST_CASE("sign_round") {
  SignRounding r = sign_round(vec({0.99, -1.01}));
  CHECK((r.x - vec({1, -1})).norm() == 0.0);
  CHECK_FALSE(r.zero_flag);

  r = sign_round(vec({0, 3}));
  CHECK((r.x - vec({1, 1})).norm() == 0.0);
  CHECK(r.zero_flag);

  r = sign_round(vec({-0.2, 0.9}));
  CHECK((r.x - vec({-1, 1})).norm() == 0.0);
}

TEST_CASE("complementarity_check") {
  QipInstance inst{swap2(), vec({3, 0})};
  auto rep = complementarity_check(inst, vec({1, -1}), vec({0.3, 2.0}), 1e-9);
  CHECK(rep.ok);
  CHECK(rep.complementarity == 0.0);

  rep = complementarity_check(inst, vec({0.5, 1}), vec({1, 0}), 1e-6);
  CHECK_FALSE(rep.ok);
  CHECK(rep.complementarity == doctest::Approx(0.75));
  CHECK_FALSE(rep.violations.empty());

  rep = complementarity_check(inst, vec({1.5, 1}), vec({0, 0}), 1e-6);
  CHECK_FALSE(rep.ok);
  CHECK(rep.max_excess == doctest::Approx(1.25));

  rep = complementarity_check(inst, vec({1, 1}), vec({-1, 0}), 1e-6);
  CHECK_FALSE(rep.ok);
  CHECK(rep.min_sigma == -1.0);
}

TEST_CASE("qip_dual_solve examples") {
  SolverConfig cfg;
  QipInstance a{swap2(), vec({3, 0})};
  QipReport r = qip_dual_solve(a, cfg);
  CHECK(r.certificate == Certificate::DualCertified);
  CHECK((r.x_star - vec({1, -1})).norm() == 0.0);
  CHECK(r.objective == doctest::Approx(-4.0));
  CHECK(r.dual_value == doctest::Approx(-4.0).epsilon(1e-9));
  CHECK((r.sigma_star - vec({2, 0.5})).norm() < 1e-6);

  QipInstance b{2.0 * Matrix::Identity(2, 2), vec({10, -10})};
  r = qip_dual_solve(b, cfg);
  CHECK(r.certificate == Certificate::DualCertified);
  CHECK((r.x_star - vec({1, -1})).norm() == 0.0);

  QipInstance c{swap2(), vec({0, 0})};
  r = qip_dual_solve(c, cfg);
  CHECK(r.certificate == Certificate::PerturbationOnly);
  CHECK(r.x_star(0) == -r.x_star(1));
  CHECK(r.objective == doctest::Approx(-1.0));
  CHECK(c.objective(-r.x_star) == doctest::Approx(r.objective));

  SolverConfig off = cfg;
  off.perturb_delta0 = 0.0;
  r = qip_dual_solve(c, off);
  CHECK(r.certificate == Certificate::Failed);
}

TEST_CASE("certified instances are exact and dual values are lower bounds") {
  SolverConfig cfg;
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  int certified = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 3 + trial % 6;
    Matrix q(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j <= i; ++j) q(i, j) = q(j, i) = u(rng);
    Vector f(n);
    for (int i = 0; i < n; ++i) f(i) = (coin(rng) ? 3.0 : -3.0) * std::sqrt(static_cast<double>(n));
    QipInstance inst{q, f};
    Vector xb;
    const double best = brute_min(inst, &xb);
    QipReport r = qip_dual_solve(inst, cfg);
    CAPTURE(trial);
    if (r.certificate == Certificate::DualCertified) {
      ++certified;
      CHECK((r.x_star - xb).norm() == 0.0);
      CHECK(std::abs(r.objective - r.dual_value) <= 1e-7 * (1.0 + std::abs(r.objective)));
      auto comp = complementarity_check(inst, r.x_star, r.sigma_star, 1e-6);
      CHECK(comp.ok);
    }
    if (std::isfinite(r.dual_value)) CHECK(r.dual_value <= best + 1e-7);
    CHECK(r.objective >= best - 1e-12);
  }
  CHECK(certified >= 45);
}

TEST_CASE("QIP JSON documents") {
  const char* doc = R"({"qip": {"Q": [[0, 1], [1, 0]], "f": [3, 0]}})";
  CHECK(is_qip_document(doc));
  QipInstance inst = load_qip(doc);
  CHECK((inst.Q - swap2()).norm() == 0.0);
  CHECK((inst.f - vec({3, 0})).norm() == 0.0);

  CHECK_FALSE(is_qip_document(R"({"n": 1, "f": [0], "variables": "continuous", "terms": []})"));
  CHECK_THROWS_AS(load_qip(R"({"qip": {"Q": [[0, 1], [1, 0]]}})"), Error);
  CHECK_THROWS_AS(load_qip(R"({"qip": {"Q": [[0, 1], [2, 0]], "f": [1, 1]}})"), Error);
  CHECK_THROWS_AS(load_qip(R"({"qip": {"Q": [[0, 1], [1, 0]], "f": [1]}})"), Error);
}

TEST_CASE("mixed layout separates into blocks") {
  Problem cont({CanonicalTerm(TermKind::Quartic, 1.0, Matrix::Constant(1, 1, 1.0), -2.0)},
               Vector::Constant(1, 0.5));
  DualLayout mixed = DualLayout::mixed(cont, swap2(), vec({3, 0}));
  CHECK(mixed.primal_dim() == 3);
  CHECK(mixed.dual_dim() == 3);
  REQUIRE(mixed.sign_variables().size() == 2);
  CHECK(mixed.sign_variables()[0] == 1);
  Vector x = vec({2.1, 1, -1});
  CHECK(mixed.primal(x) == doctest::Approx(eval_primal(cont, vec({2.1})) - 4.0));
}
