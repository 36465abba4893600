#include "canondual/linalg.hpp"

#include "canondual/error.hpp"

#include <cmath>

namespace canondual {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidMatrix: return "InvalidMatrix";
    case ErrorCode::RangeViolation: return "RangeViolation";
    case ErrorCode::DomainViolation: return "DomainViolation";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SingularG: return "SingularG";
    case ErrorCode::EmptyInterior: return "EmptyInterior";
    case ErrorCode::MaxIterations: return "MaxIterations";
    case ErrorCode::NotCritical: return "NotCritical";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::Unbounded: return "Unbounded";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::UnsupportedTerm: return "UnsupportedTerm";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

namespace linalg {

std::string_view to_string(Definiteness d) {
  switch (d) {
    case Definiteness::PositiveDefinite: return "PositiveDefinite";
    case Definiteness::PositiveSemidefiniteSingular: return "PositiveSemidefiniteSingular";
    case Definiteness::Indefinite: return "Indefinite";
    case Definiteness::NegativeSemidefiniteSingular: return "NegativeSemidefiniteSingular";
    case Definiteness::NegativeDefinite: return "NegativeDefinite";
  }
  return "Unknown";
}

bool is_symmetric(const Matrix& m) {
  if (m.rows() != m.cols() || !m.allFinite()) return false;
  if (m.size() == 0) return true;
  const double scale = m.cwiseAbs().maxCoeff();
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale;
}

void require_symmetric(const Matrix& m) {
  if (m.rows() != m.cols()) throw Error(ErrorCode::InvalidMatrix, "matrix is not square");
  if (!m.allFinite()) throw Error(ErrorCode::InvalidMatrix, "matrix has non-finite entries");
  if (!is_symmetric(m)) throw Error(ErrorCode::InvalidMatrix, "matrix is not symmetric");
}

EigenDecomp eigh(const Matrix& m) {
  require_symmetric(m);
  if (m.rows() == 0) return {Vector(0), Matrix(0, 0)};
  // Only the lower triangle is read; symmetrize so both halves agree exactly.
  const Matrix sym = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::InvalidMatrix, "eigendecomposition did not converge");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

Matrix pinv_absolute(const EigenDecomp& d, double abs_tol) {
  const auto n = d.eigvals.size();
  Vector inv = Vector::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(d.eigvals(i)) > abs_tol) inv(i) = 1.0 / d.eigvals(i);
  }
  return d.eigvecs * inv.asDiagonal() * d.eigvecs.transpose();
}

Matrix pinv(const EigenDecomp& d, double rank_tol) {
  if (d.eigvals.size() == 0) return Matrix(0, 0);
  const double largest = d.eigvals.cwiseAbs().maxCoeff();
  if (largest == 0.0) return Matrix::Zero(d.eigvals.size(), d.eigvals.size());
  return pinv_absolute(d, rank_tol * largest);
}

Matrix pinv(const Matrix& m, double rank_tol) { return pinv(eigh(m), rank_tol); }

Definiteness classify_eigenvalues(const Vector& eigvals, double tol) {
  Eigen::Index pos = 0, neg = 0, zero = 0;
  for (double l : eigvals) {
    if (l > tol) {
      ++pos;
    } else if (l < -tol) {
      ++neg;
    } else {
      ++zero;
    }
  }
  if (pos > 0 && neg > 0) return Definiteness::Indefinite;
  if (neg == 0 && zero == 0) return Definiteness::PositiveDefinite;
  if (pos == 0 && zero == 0) return Definiteness::NegativeDefinite;
  if (neg == 0) return Definiteness::PositiveSemidefiniteSingular;
  return Definiteness::NegativeSemidefiniteSingular;
}

Definiteness psd_classify(const Matrix& m, double tol) {
  return classify_eigenvalues(eigh(m).eigvals, tol);
}

Vector solve_in_range(const Matrix& m, const Vector& f, double tol) {
  if (m.rows() != f.size()) throw Error(ErrorCode::DimensionMismatch, "solve_in_range: size of f");
  const Vector x = pinv(m) * f;
  const double residual = (m * x - f).norm();
  if (!(residual <= tol * (1.0 + f.norm()))) {
    throw Error(ErrorCode::RangeViolation,
                "right-hand side is not in the range of the matrix (residual " +
                    std::to_string(residual) + ")");
  }
  return x;
}

}  // namespace linalg
}  // namespace canondual
