#pragma once

#include "canondual/linalg.hpp"

#include <cstddef>
#include <limits>
#include <optional>
#include <string_view>
#include <vector>

namespace canondual {

/// The four canonical term shapes of the unconstrained model. With
/// xi = 1/2 x^T Q x the canonical functions are
///   PlainQuadratic  Phi = xi        (alpha folded into xi = 1/2 alpha x^T Q x)
///   Quartic         Phi = 1/2 alpha (xi + beta)^2
///   Exponential     Phi = alpha exp(xi)
///   XLogX           Phi = alpha xi log(xi)
enum class TermKind { PlainQuadratic, Quartic, Exponential, XLogX };

enum class VariableKind { Continuous, SignInteger };

/// Kind of a dual coordinate. SignRelaxation is the multiplier sigma_i of the
/// relaxed integer constraint x_i^2 <= 1, whose conjugate is the linear e^T sigma.
enum class DualKind { Quartic, Exponential, XLogX, SignRelaxation };

std::string_view to_string(TermKind k);
std::string_view to_string(VariableKind k);
std::string_view to_string(DualKind k);

/// Open interval (lower, upper) whose closure is the dual domain of one coordinate.
struct DualInterval {
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();

  bool contains_closed(double s) const { return s >= lower && s <= upper; }
  bool contains_open(double s) const { return s > lower && s < upper; }
};

namespace conjugate {

DualInterval domain(DualKind kind, double alpha, double beta);

/// Phi^*(sigma). Throws DomainViolation outside the closed dual domain
/// (Exponential needs sigma / alpha > 0 strictly).
double value(DualKind kind, double alpha, double beta, double sigma);

/// d Phi^* / d sigma, the inverse of the duality map sigma = Phi'(xi).
double grad(DualKind kind, double alpha, double beta, double sigma);

double hess(DualKind kind, double alpha, double beta, double sigma);

}  // namespace conjugate

/// Canonical functions Phi(xi) keyed by the kind of their dual coordinate.
/// SignRelaxation is the indicator of xi <= 1 and contributes 0 on the box.
namespace canonical {

double phi(DualKind kind, double alpha, double beta, double xi);
double phi_prime(DualKind kind, double alpha, double beta, double xi);
double phi_second(DualKind kind, double alpha, double beta, double xi);

}  // namespace canonical

class CanonicalTerm {
 public:
  /// `factor` is D_s (m_s x n); the term operator is Q_s = D_s^T D_s.
  CanonicalTerm(TermKind kind, double alpha, Matrix factor, double beta = 0.0);

  TermKind kind() const { return kind_; }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  const Matrix& factor() const { return factor_; }
  const Matrix& q() const { return q_; }
  std::size_t dim() const { return static_cast<std::size_t>(factor_.cols()); }

  bool has_dual_coordinate() const { return kind_ != TermKind::PlainQuadratic; }
  std::optional<DualKind> dual_kind() const;

  /// Matrix M_s with grad_x xi_s = M_s x (alpha Q for plain quadratics, Q otherwise).
  Matrix measure_operator() const;

  /// Canonical measure xi_s(x).
  double measure(const Vector& x) const;

  double phi(double xi) const;
  double phi_prime(double xi) const;
  double phi_second(double xi) const;

  double conj_value(double sigma) const;
  double conj_grad(double sigma) const;
  double conj_hess(double sigma) const;
  DualInterval dual_domain() const;

 private:
  DualKind require_dual(const char* what) const;

  TermKind kind_;
  double alpha_;
  double beta_;
  Matrix factor_;
  Matrix q_;
};

class Problem {
 public:
  Problem(std::vector<CanonicalTerm> terms, Vector f,
          VariableKind variables = VariableKind::Continuous);

  std::size_t n() const { return static_cast<std::size_t>(f_.size()); }
  const std::vector<CanonicalTerm>& terms() const { return terms_; }
  const Vector& f() const { return f_; }
  VariableKind variables() const { return variables_; }

  /// Number of term dual coordinates (one per non-plain term). Sign-integer
  /// problems add n more coordinates at the dual layer.
  std::size_t term_dual_dim() const;

  /// Same terms, new input vector.
  Problem with_input(Vector f) const;

 private:
  std::vector<CanonicalTerm> terms_;
  Vector f_;
  VariableKind variables_;
};

/// Pi(x) = sum_s Phi_s(xi_s(x)) - x^T f. Throws NonFinite on overflow.
double eval_primal(const Problem& p, const Vector& x);

/// grad Pi(x) = sum_s Phi_s'(xi_s) M_s x - f.
Vector primal_gradient(const Problem& p, const Vector& x);

/// Splits an arbitrary symmetric Q into plain quadratic terms (alpha = +1 on
/// the positive eigenspace, alpha = -1 on the negative one) so that
/// 1/2 x^T Q x - x^T f is representable as a Problem.
Problem problem_from_quadratic(const Matrix& q, const Vector& f, VariableKind variables);

/// Parses the JSON problem document. Throws SchemaError (with a field path)
/// or DimensionMismatch.
Problem load_problem(std::string_view json_text);

}  // namespace canondual
