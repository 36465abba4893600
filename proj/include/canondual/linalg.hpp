#pragma once

#include <Eigen/Dense>

#include <string_view>

namespace canondual {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

namespace linalg {

/// Relative eigenvalue cut used when truncating a pseudoinverse.
inline constexpr double kDefaultRankTol = 1e-10;

struct EigenDecomp {
  Vector eigvals;  // ascending
  Matrix eigvecs;  // orthonormal columns, eigvecs.col(i) pairs with eigvals(i)
};

enum class Definiteness {
  PositiveDefinite,
  PositiveSemidefiniteSingular,
  Indefinite,
  NegativeSemidefiniteSingular,
  NegativeDefinite,
};

std::string_view to_string(Definiteness d);

/// True when every entry is finite and |m - m^T| <= 1e-12 * max|m|.
bool is_symmetric(const Matrix& m);

/// Throws InvalidMatrix unless `m` is square, finite and symmetric.
void require_symmetric(const Matrix& m);

EigenDecomp eigh(const Matrix& m);

/// Moore-Penrose pseudoinverse. Eigenvalues with |lambda| <= rank_tol * max|lambda|
/// are treated as zero.
Matrix pinv(const Matrix& m, double rank_tol = kDefaultRankTol);
Matrix pinv(const EigenDecomp& d, double rank_tol = kDefaultRankTol);

/// Same, with an absolute cut: |lambda| <= abs_tol counts as zero.
Matrix pinv_absolute(const EigenDecomp& d, double abs_tol);

Definiteness classify_eigenvalues(const Vector& eigvals, double tol);
Definiteness psd_classify(const Matrix& m, double tol);

/// x = M^+ f, rejected with RangeViolation unless ||M x - f|| <= tol (1 + ||f||).
Vector solve_in_range(const Matrix& m, const Vector& f, double tol);

}  // namespace linalg
}  // namespace canondual
