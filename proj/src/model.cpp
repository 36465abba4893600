#include "canondual/model.hpp"

#include "canondual/error.hpp"

#include <cmath>
#include <string>

namespace canondual {

std::string_view to_string(TermKind k) {
  switch (k) {
    case TermKind::PlainQuadratic: return "plain_quadratic";
    case TermKind::Quartic: return "quartic";
    case TermKind::Exponential: return "exponential";
    case TermKind::XLogX: return "xlogx";
  }
  return "unknown";
}

std::string_view to_string(VariableKind k) {
  return k == VariableKind::Continuous ? "continuous" : "sign_integer";
}

std::string_view to_string(DualKind k) {
  switch (k) {
    case DualKind::Quartic: return "quartic";
    case DualKind::Exponential: return "exponential";
    case DualKind::XLogX: return "xlogx";
    case DualKind::SignRelaxation: return "sign_relaxation";
  }
  return "unknown";
}

namespace conjugate {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

[[noreturn]] void domain_error(DualKind kind, double sigma) {
  throw Error(ErrorCode::DomainViolation, "sigma = " + std::to_string(sigma) +
                                              " outside the dual domain of a " +
                                              std::string(to_string(kind)) + " coordinate");
}

}  // namespace

DualInterval domain(DualKind kind, double alpha, double beta) {
  switch (kind) {
    case DualKind::Quartic:
      // image of xi >= 0 under sigma = alpha (xi + beta)
      return alpha > 0 ? DualInterval{alpha * beta, kInf} : DualInterval{-kInf, alpha * beta};
    case DualKind::Exponential:
      return alpha > 0 ? DualInterval{0.0, kInf} : DualInterval{-kInf, 0.0};
    case DualKind::XLogX:
      return {};
    case DualKind::SignRelaxation:
      return {0.0, kInf};
  }
  return {};
}

double value(DualKind kind, double alpha, double beta, double sigma) {
  const DualInterval dom = domain(kind, alpha, beta);
  switch (kind) {
    case DualKind::Quartic:
      if (!dom.contains_closed(sigma)) domain_error(kind, sigma);
      return sigma * sigma / (2.0 * alpha) - beta * sigma;
    case DualKind::Exponential:
      if (!dom.contains_open(sigma)) domain_error(kind, sigma);
      return sigma * (std::log(sigma / alpha) - 1.0);
    case DualKind::XLogX:
      return alpha * std::exp(sigma / alpha - 1.0);
    case DualKind::SignRelaxation:
      if (!dom.contains_closed(sigma)) domain_error(kind, sigma);
      return sigma;
  }
  return 0.0;
}

double grad(DualKind kind, double alpha, double beta, double sigma) {
  const DualInterval dom = domain(kind, alpha, beta);
  switch (kind) {
    case DualKind::Quartic:
      if (!dom.contains_closed(sigma)) domain_error(kind, sigma);
      return sigma / alpha - beta;
    case DualKind::Exponential:
      if (!dom.contains_open(sigma)) domain_error(kind, sigma);
      return std::log(sigma / alpha);
    case DualKind::XLogX:
      return std::exp(sigma / alpha - 1.0);
    case DualKind::SignRelaxation:
      if (!dom.contains_closed(sigma)) domain_error(kind, sigma);
      return 1.0;
  }
  return 0.0;
}

double hess(DualKind kind, double alpha, double beta, double sigma) {
  const DualInterval dom = domain(kind, alpha, beta);
  switch (kind) {
    case DualKind::Quartic:
      if (!dom.contains_closed(sigma)) domain_error(kind, sigma);
      return 1.0 / alpha;
    case DualKind::Exponential:
      if (!dom.contains_open(sigma)) domain_error(kind, sigma);
      return 1.0 / sigma;
    case DualKind::XLogX:
      return std::exp(sigma / alpha - 1.0) / alpha;
    case DualKind::SignRelaxation:
      if (!dom.contains_closed(sigma)) domain_error(kind, sigma);
      return 0.0;
  }
  return 0.0;
}

}  // namespace conjugate

namespace canonical {

double phi(DualKind kind, double alpha, double beta, double xi) {
  switch (kind) {
    case DualKind::Quartic: return 0.5 * alpha * (xi + beta) * (xi + beta);
    case DualKind::Exponential: return alpha * std::exp(xi);
    case DualKind::XLogX:
      if (xi < 0.0) throw Error(ErrorCode::DomainViolation, "xlogx needs xi >= 0");
      return xi == 0.0 ? 0.0 : alpha * xi * std::log(xi);
    case DualKind::SignRelaxation: return 0.0;
  }
  return 0.0;
}

double phi_prime(DualKind kind, double alpha, double beta, double xi) {
  switch (kind) {
    case DualKind::Quartic: return alpha * (xi + beta);
    case DualKind::Exponential: return alpha * std::exp(xi);
    case DualKind::XLogX:
      if (xi <= 0.0) throw Error(ErrorCode::DomainViolation, "xlogx derivative needs xi > 0");
      return alpha * (std::log(xi) + 1.0);
    case DualKind::SignRelaxation: return 0.0;
  }
  return 0.0;
}

double phi_second(DualKind kind, double alpha, double /*beta*/, double xi) {
  switch (kind) {
    case DualKind::Quartic: return alpha;
    case DualKind::Exponential: return alpha * std::exp(xi);
    case DualKind::XLogX:
      if (xi <= 0.0) throw Error(ErrorCode::DomainViolation, "xlogx derivative needs xi > 0");
      return alpha / xi;
    case DualKind::SignRelaxation: return 0.0;
  }
  return 0.0;
}

}  // namespace canonical

CanonicalTerm::CanonicalTerm(TermKind kind, double alpha, Matrix factor, double beta)
    : kind_(kind), alpha_(alpha), beta_(beta), factor_(std::move(factor)) {
  if (!std::isfinite(alpha_) || alpha_ == 0.0) {
    throw Error(ErrorCode::SchemaError, "alpha must be finite and nonzero");
  }
  if (!std::isfinite(beta_)) throw Error(ErrorCode::SchemaError, "beta must be finite");
  if (kind_ != TermKind::Quartic && beta_ != 0.0) {
    throw Error(ErrorCode::SchemaError, "beta is only meaningful for quartic terms");
  }
  if (factor_.rows() == 0 || factor_.cols() == 0) {
    throw Error(ErrorCode::DimensionMismatch, "factor must be a non-empty matrix");
  }
  if (!factor_.allFinite()) throw Error(ErrorCode::SchemaError, "factor has non-finite entries");
  q_ = factor_.transpose() * factor_;
}

std::optional<DualKind> CanonicalTerm::dual_kind() const {
  switch (kind_) {
    case TermKind::PlainQuadratic: return std::nullopt;
    case TermKind::Quartic: return DualKind::Quartic;
    case TermKind::Exponential: return DualKind::Exponential;
    case TermKind::XLogX: return DualKind::XLogX;
  }
  return std::nullopt;
}

DualKind CanonicalTerm::require_dual(const char* what) const {
  const auto k = dual_kind();
  if (!k) {
    throw Error(ErrorCode::DomainViolation,
                std::string(what) + ": plain quadratic terms have no dual coordinate");
  }
  return *k;
}

Matrix CanonicalTerm::measure_operator() const {
  return kind_ == TermKind::PlainQuadratic ? Matrix(alpha_ * q_) : q_;
}

double CanonicalTerm::measure(const Vector& x) const {
  const Vector dx = factor_ * x;
  const double half_norm = 0.5 * dx.squaredNorm();
  return kind_ == TermKind::PlainQuadratic ? alpha_ * half_norm : half_norm;
}

double CanonicalTerm::phi(double xi) const {
  if (kind_ == TermKind::PlainQuadratic) return xi;
  return canonical::phi(*dual_kind(), alpha_, beta_, xi);
}

double CanonicalTerm::phi_prime(double xi) const {
  if (kind_ == TermKind::PlainQuadratic) return 1.0;
  return canonical::phi_prime(*dual_kind(), alpha_, beta_, xi);
}

double CanonicalTerm::phi_second(double xi) const {
  if (kind_ == TermKind::PlainQuadratic) return 0.0;
  return canonical::phi_second(*dual_kind(), alpha_, beta_, xi);
}

double CanonicalTerm::conj_value(double sigma) const {
  return conjugate::value(require_dual("conj_value"), alpha_, beta_, sigma);
}

double CanonicalTerm::conj_grad(double sigma) const {
  return conjugate::grad(require_dual("conj_grad"), alpha_, beta_, sigma);
}

double CanonicalTerm::conj_hess(double sigma) const {
  return conjugate::hess(require_dual("conj_hess"), alpha_, beta_, sigma);
}

DualInterval CanonicalTerm::dual_domain() const {
  return conjugate::domain(require_dual("dual_domain"), alpha_, beta_);
}

Problem::Problem(std::vector<CanonicalTerm> terms, Vector f, VariableKind variables)
    : terms_(std::move(terms)), f_(std::move(f)), variables_(variables) {
  if (terms_.empty()) throw Error(ErrorCode::SchemaError, "a problem needs at least one term");
  if (f_.size() == 0) throw Error(ErrorCode::DimensionMismatch, "input vector f is empty");
  if (!f_.allFinite()) throw Error(ErrorCode::SchemaError, "input vector f has non-finite entries");
  for (std::size_t s = 0; s < terms_.size(); ++s) {
    if (terms_[s].dim() != n()) {
      throw Error(ErrorCode::DimensionMismatch,
                  "terms[" + std::to_string(s) + "].factor has " +
                      std::to_string(terms_[s].dim()) + " columns, expected " +
                      std::to_string(n()));
    }
  }
}

std::size_t Problem::term_dual_dim() const {
  std::size_t count = 0;
  for (const auto& t : terms_) count += t.has_dual_coordinate() ? 1 : 0;
  return count;
}

Problem Problem::with_input(Vector f) const { return Problem(terms_, std::move(f), variables_); }

double eval_primal(const Problem& p, const Vector& x) {
  if (static_cast<std::size_t>(x.size()) != p.n()) {
    throw Error(ErrorCode::DimensionMismatch, "eval_primal: x has the wrong dimension");
  }
  double total = -x.dot(p.f());
  for (const auto& t : p.terms()) total += t.phi(t.measure(x));
  if (!std::isfinite(total)) throw Error(ErrorCode::NonFinite, "primal objective overflowed");
  return total;
}

Vector primal_gradient(const Problem& p, const Vector& x) {
  if (static_cast<std::size_t>(x.size()) != p.n()) {
    throw Error(ErrorCode::DimensionMismatch, "primal_gradient: x has the wrong dimension");
  }
  Vector g = -p.f();
  for (const auto& t : p.terms()) {
    const double xi = t.measure(x);
    if (t.kind() == TermKind::XLogX && xi == 0.0) {
      // alpha (log xi + 1) Q x -> 0 as x -> 0 along any ray, Q x vanishing linearly
      continue;
    }
    g += t.phi_prime(xi) * (t.measure_operator() * x);
  }
  return g;
}

Problem problem_from_quadratic(const Matrix& q, const Vector& f, VariableKind variables) {
  linalg::require_symmetric(q);
  if (q.rows() != f.size()) throw Error(ErrorCode::DimensionMismatch, "Q and f sizes differ");
  const auto d = linalg::eigh(q);
  const auto n = q.rows();
  const double cut = 1e-14 * (1.0 + d.eigvals.cwiseAbs().maxCoeff());
  std::vector<CanonicalTerm> terms;
  for (double sign : {1.0, -1.0}) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (sign * d.eigvals(i) > cut) idx.push_back(i);
    }
    if (idx.empty()) continue;
    Matrix factor(static_cast<Eigen::Index>(idx.size()), n);
    for (std::size_t r = 0; r < idx.size(); ++r) {
      factor.row(static_cast<Eigen::Index>(r)) =
          std::sqrt(sign * d.eigvals(idx[r])) * d.eigvecs.col(idx[r]).transpose();
    }
    terms.emplace_back(TermKind::PlainQuadratic, sign, std::move(factor));
  }
  if (terms.empty()) terms.emplace_back(TermKind::PlainQuadratic, 1.0, Matrix::Zero(1, n));
  return Problem(std::move(terms), f, variables);
}

}  // namespace canondual
