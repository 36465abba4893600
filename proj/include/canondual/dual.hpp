#pragma once

#include "canondual/linalg.hpp"
#include "canondual/model.hpp"

#include <optional>
#include <string_view>
#include <vector>

namespace canondual {

/// One coordinate of the dual vector: its conjugate and its operator in G.
struct DualCoordinate {
  DualKind kind;
  double alpha = 1.0;
  double beta = 0.0;
  Matrix q;  // sigma * q enters G; the paired canonical measure is 1/2 x^T q x

  double conj_value(double s) const { return conjugate::value(kind, alpha, beta, s); }
  double conj_grad(double s) const { return conjugate::grad(kind, alpha, beta, s); }
  double conj_hess(double s) const { return conjugate::hess(kind, alpha, beta, s); }
  DualInterval domain() const { return conjugate::domain(kind, alpha, beta); }
  double measure(const Vector& x) const { return 0.5 * x.dot(q * x); }
  double phi(double xi) const { return canonical::phi(kind, alpha, beta, xi); }
  double phi_prime(double xi) const { return canonical::phi_prime(kind, alpha, beta, xi); }
  double phi_second(double xi) const { return canonical::phi_second(kind, alpha, beta, xi); }
};

/// Everything the dual side needs from a problem:
///   G(sigma) = base + sum_s sigma_s q_s,   Pi^d = -1/2 f^T G^+ f - sum_s Phi_s^*(sigma_s) + offset.
/// Built from a Problem (base = sum of alpha_i Q_i over plain quadratics), from a
/// sign-integer quadratic (base = Q, one SignRelaxation coordinate per variable
/// with q = 2 e_i e_i^T), or as the quadratic perturbation of another layout.
class DualLayout {
 public:
  static DualLayout from_problem(const Problem& p);
  static DualLayout sign_quadratic(const Matrix& q, const Vector& f);

  /// Continuous block `continuous` followed by a sign-integer block (q_int, f_int);
  /// the two blocks are additively separable.
  static DualLayout mixed(const Problem& continuous, const Matrix& q_int, const Vector& f_int);

  /// G -> G + delta I, f -> f + delta anchor, offset += 1/2 delta ||anchor||^2.
  DualLayout perturbed(double delta, const Vector& anchor) const;

  std::size_t primal_dim() const { return static_cast<std::size_t>(f_.size()); }
  std::size_t dual_dim() const { return coords_.size(); }
  const Matrix& base() const { return base_; }
  const Vector& f() const { return f_; }
  double offset() const { return offset_; }
  const std::vector<DualCoordinate>& coords() const { return coords_; }

  /// Primal indices constrained to {-1, 1}.
  const std::vector<std::size_t>& sign_variables() const { return sign_vars_; }

  Matrix assemble(const Vector& sigma) const;

  /// Primal side of the same model: 1/2 x^T base x + sum_s Phi_s(xi_s) - x^T f + offset.
  /// Sign coordinates contribute nothing (their indicator is zero on the box).
  double primal(const Vector& x) const;
  Vector primal_gradient(const Vector& x) const;
  Matrix primal_hessian(const Vector& x) const;

  double conj_total(const Vector& sigma) const;
  bool in_domain_closed(const Vector& sigma) const;
  bool in_domain_open(const Vector& sigma) const;
  void require_dim(const Vector& sigma) const;

 private:
  Matrix base_;
  Vector f_;
  double offset_ = 0.0;
  std::vector<DualCoordinate> coords_;
  std::vector<std::size_t> sign_vars_;
};

struct GapMatrix {
  Matrix g;
  linalg::EigenDecomp decomp;
  linalg::Definiteness classification;
  double tol;   // eigenvalue threshold used for the classification
  Matrix pinv;  // G^+ with eigenvalues |lambda| <= tol dropped
};

/// 1e-8 (1 + ||G||_F): scale-aware zero threshold for eigenvalues of G.
double boundary_tolerance(const Matrix& g);

GapMatrix assemble_G(const DualLayout& layout, const Vector& sigma);
GapMatrix assemble_G(const Problem& p, const Vector& sigma);

/// Xi(x, sigma) = 1/2 x^T G x - Phi^*(sigma) - x^T f + offset.
double eval_Xi(const DualLayout& layout, const Vector& x, const Vector& sigma);
double eval_Xi(const Problem& p, const Vector& x, const Vector& sigma);

/// Gap(x, sigma) = 1/2 x^T G(sigma) x.
double gap_value(const DualLayout& layout, const Vector& x, const Vector& sigma);
double gap_value(const Problem& p, const Vector& x, const Vector& sigma);

/// Pi^d(sigma). Throws RangeViolation when f is not in range(G(sigma)).
double eval_dual(const DualLayout& layout, const Vector& sigma);
double eval_dual(const Problem& p, const Vector& sigma);

/// Component s: 1/2 xbar^T q_s xbar - dPhi_s^*(sigma_s) with xbar = G^{-1} f.
/// Throws SingularG when G(sigma) is numerically singular.
Vector grad_dual(const DualLayout& layout, const Vector& sigma);
Vector grad_dual(const Problem& p, const Vector& sigma);

/// -B^T G^{-1} B - diag(Phi^*''), B = [q_1 xbar, ..., q_m xbar].
Matrix hess_dual(const DualLayout& layout, const Vector& sigma);

struct Recovery {
  Vector x;
  double residual;  // ||G x - f||
};

/// xbar = G^+ f. Throws RangeViolation when the residual shows f is not in range(G).
/// With `zero_tol` set, eigenvalues |lambda| <= zero_tol are dropped instead of
/// using the default relative rank cut.
Recovery recover_x(const DualLayout& layout, const Vector& sigma,
                   std::optional<double> zero_tol = std::nullopt);
Recovery recover_x(const Problem& p, const Vector& sigma);

/// xi_s(x) - dPhi_s^*(sigma_s) per coordinate; zero at a canonical critical pair.
Vector canonical_residual(const DualLayout& layout, const Vector& x, const Vector& sigma);

enum class Membership { Interior, Boundary, Outside };
std::string_view to_string(Membership m);

/// Interior: G > tol I and every coordinate strictly inside its domain.
/// Boundary: G >= -tol I, closed domain, f in range(G). Outside otherwise.
/// Default tol is boundary_tolerance(G).
Membership in_S_plus(const DualLayout& layout, const Vector& sigma,
                     std::optional<double> tol = std::nullopt);
Membership in_S_plus(const Problem& p, const Vector& sigma,
                     std::optional<double> tol = std::nullopt);

}  // namespace canondual
