#include "doctest.h"

#include "canondual/error.hpp"
#include "canondual/linalg.hpp"

#include <cmath>
#include <limits>
#include <random>

using namespace canondual;
using linalg::Definiteness;

namespace {

Matrix random_symmetric(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = u(rng);
  return 0.5 * (a + a.transpose());
}

// Symmetric with a prescribed number of exact zero eigenvalues.
Matrix random_rank_deficient(std::mt19937_64& rng, int n, int rank) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix b(n, rank);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < rank; ++j) b(i, j) = u(rng);
  Vector d(rank);
  for (int j = 0; j < rank; ++j) d(j) = (j % 2 == 0 ? 1.0 : -1.0) * (0.5 + std::abs(u(rng)));
  return b * d.asDiagonal() * b.transpose();
}

Matrix mat2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

Definiteness mirror(Definiteness d) {
  switch (d) {
    case Definiteness::PositiveDefinite: return Definiteness::NegativeDefinite;
    case Definiteness::PositiveSemidefiniteSingular: return Definiteness::NegativeSemidefiniteSingular;
    case Definiteness::Indefinite: return Definiteness::Indefinite;
    case Definiteness::NegativeSemidefiniteSingular: return Definiteness::PositiveSemidefiniteSingular;
    case Definiteness::NegativeDefinite: return Definiteness::PositiveDefinite;
  }
  return d;
}

}  // namespace

TEST_CASE("eigh on small closed-form matrices") {
  auto d = linalg::eigh(Matrix::Identity(2, 2));
  CHECK(d.eigvals(0) == doctest::Approx(1.0));
  CHECK(d.eigvals(1) == doctest::Approx(1.0));
  CHECK((d.eigvecs.transpose() * d.eigvecs - Matrix::Identity(2, 2)).norm() < 1e-12);

  d = linalg::eigh(mat2(-2, 0, 0, 3));
  CHECK(d.eigvals(0) == doctest::Approx(-2.0));
  CHECK(d.eigvals(1) == doctest::Approx(3.0));

  // t^2 - 1 = 0
  d = linalg::eigh(mat2(0, 1, 1, 0));
  CHECK(d.eigvals(0) == doctest::Approx(-1.0));
  CHECK(d.eigvals(1) == doctest::Approx(1.0));
}

TEST_CASE("eigh rejects non-finite and asymmetric input") {
  Matrix m = Matrix::Identity(2, 2);
  m(0, 1) = std::numeric_limits<double>::quiet_NaN();
  m(1, 0) = m(0, 1);
  CHECK_THROWS_AS(linalg::eigh(m), Error);
  try {
    linalg::eigh(m);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidMatrix);
  }
  CHECK_THROWS_AS(linalg::eigh(mat2(1, 2, 0, 1)), Error);
}

TEST_CASE("pinv examples") {
  Matrix p = linalg::pinv(mat2(2, 0, 0, 0), 1e-10);
  CHECK((p - mat2(0.5, 0, 0, 0)).norm() < 1e-14);

  CHECK((linalg::pinv(Matrix::Identity(3, 3)) - Matrix::Identity(3, 3)).norm() < 1e-14);

  // det = 3, adjugate / det
  Matrix inv = mat2(1, -1, -1, 4) / 3.0;
  CHECK((linalg::pinv(mat2(4, 1, 1, 1)) - inv).norm() < 1e-13);

  CHECK(linalg::pinv(Matrix::Zero(3, 3)).norm() == 0.0);
}

TEST_CASE("random corpus: Moore-Penrose axioms, reconstruction, orthonormality") {
  std::mt19937_64 rng(20240601);
  std::uniform_int_distribution<int> dim(1, 12);
  for (int trial = 0; trial < 200; ++trial) {
    int n = dim(rng);
    Matrix m;
    if (trial % 3 == 2 && n > 1) {
      m = random_rank_deficient(rng, n, std::max(1, n / 2));
    } else {
      m = random_symmetric(rng, n);
    }
    CAPTURE(trial);
    CAPTURE(n);

    auto d = linalg::eigh(m);
    for (int i = 1; i < n; ++i) CHECK(d.eigvals(i - 1) <= d.eigvals(i));
    Matrix rec = d.eigvecs * d.eigvals.asDiagonal() * d.eigvecs.transpose();
    CHECK((rec - m).norm() <= 1e-9 * (1.0 + m.norm()));
    CHECK((d.eigvecs.transpose() * d.eigvecs - Matrix::Identity(n, n)).norm() <= 1e-10);

    Matrix p = linalg::pinv(m);
    CHECK((m * p * m - m).norm() <= 1e-8);
    CHECK((p * m * p - p).norm() <= 1e-8 * (1.0 + p.norm()));
    Matrix mp = m * p;
    Matrix pm = p * m;
    CHECK((mp - mp.transpose()).norm() <= 1e-8);
    CHECK((pm - pm.transpose()).norm() <= 1e-8);

    CHECK(linalg::psd_classify(-m, 1e-9) == mirror(linalg::psd_classify(m, 1e-9)));
  }
}

TEST_CASE("psd_classify") {
  CHECK(linalg::psd_classify(Matrix::Identity(2, 2), 1e-9) == Definiteness::PositiveDefinite);
  CHECK(linalg::psd_classify(mat2(1, 0, 0, -1), 1e-9) == Definiteness::Indefinite);
  CHECK(linalg::psd_classify(mat2(2, 0, 0, 0), 1e-9) == Definiteness::PositiveSemidefiniteSingular);
  CHECK(linalg::psd_classify(mat2(-2, 0, 0, 0), 1e-9) == Definiteness::NegativeSemidefiniteSingular);
  CHECK(linalg::psd_classify(-Matrix::Identity(3, 3), 1e-9) == Definiteness::NegativeDefinite);
  // within tol counts as zero
  CHECK(linalg::psd_classify(mat2(1, 0, 0, 1e-12), 1e-9) == Definiteness::PositiveSemidefiniteSingular);
}

TEST_CASE("solve_in_range") {
  Vector f(2);
  f << 3, 0;
  Vector x = linalg::solve_in_range(Matrix::Identity(2, 2), f, 1e-10);
  CHECK(x(0) == doctest::Approx(3.0));
  CHECK(x(1) == doctest::Approx(0.0));

  // 4x + y = 3, x + y = 0
  x = linalg::solve_in_range(mat2(4, 1, 1, 1), f, 1e-10);
  CHECK(x(0) == doctest::Approx(1.0));
  CHECK(x(1) == doctest::Approx(-1.0));

  Vector g(2);
  g << 0, 1;
  try {
    linalg::solve_in_range(mat2(1, 0, 0, 0), g, 1e-10);
    FAIL("expected RangeViolation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::RangeViolation);
  }
}
