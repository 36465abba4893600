#include "canondual/dual.hpp"

#include "canondual/error.hpp"

#include <algorithm>
#include <cmath>

namespace canondual {

namespace {

constexpr double kSingularRel = 1e-13;
constexpr double kRangeTol = 1e-8;

struct Solved {
  linalg::EigenDecomp decomp;
  Vector x;
};

// xbar = G^{-1} f for a nonsingular G.
Solved solve_nonsingular(const DualLayout& layout, const Vector& sigma) {
  const Matrix g = layout.assemble(sigma);
  auto decomp = linalg::eigh(g);
  const double largest = decomp.eigvals.cwiseAbs().maxCoeff();
  const double smallest = decomp.eigvals.cwiseAbs().minCoeff();
  if (largest == 0.0 || smallest <= kSingularRel * largest) {
    throw Error(ErrorCode::SingularG, "G(sigma) is singular; the dual gradient is undefined");
  }
  Vector x = decomp.eigvecs *
             (decomp.eigvecs.transpose() * layout.f()).cwiseQuotient(decomp.eigvals);
  return {std::move(decomp), std::move(x)};
}

}  // namespace

std::string_view to_string(Membership m) {
  switch (m) {
    case Membership::Interior: return "Interior";
    case Membership::Boundary: return "Boundary";
    case Membership::Outside: return "Outside";
  }
  return "Unknown";
}

DualLayout DualLayout::from_problem(const Problem& p) {
  DualLayout d;
  const auto n = static_cast<Eigen::Index>(p.n());
  d.base_ = Matrix::Zero(n, n);
  d.f_ = p.f();
  for (const auto& t : p.terms()) {
    if (t.kind() == TermKind::PlainQuadratic) {
      d.base_ += t.alpha() * t.q();
    } else {
      d.coords_.push_back({*t.dual_kind(), t.alpha(), t.beta(), t.q()});
    }
  }
  if (p.variables() == VariableKind::SignInteger) {
    for (Eigen::Index i = 0; i < n; ++i) {
      Matrix q = Matrix::Zero(n, n);
      q(i, i) = 2.0;
      d.coords_.push_back({DualKind::SignRelaxation, 1.0, 0.0, std::move(q)});
      d.sign_vars_.push_back(static_cast<std::size_t>(i));
    }
  }
  return d;
}

DualLayout DualLayout::sign_quadratic(const Matrix& q, const Vector& f) {
  linalg::require_symmetric(q);
  if (q.rows() != f.size()) throw Error(ErrorCode::DimensionMismatch, "Q and f sizes differ");
  DualLayout d;
  const auto n = q.rows();
  d.base_ = q;
  d.f_ = f;
  for (Eigen::Index i = 0; i < n; ++i) {
    Matrix qi = Matrix::Zero(n, n);
    qi(i, i) = 2.0;
    d.coords_.push_back({DualKind::SignRelaxation, 1.0, 0.0, std::move(qi)});
    d.sign_vars_.push_back(static_cast<std::size_t>(i));
  }
  return d;
}

DualLayout DualLayout::mixed(const Problem& continuous, const Matrix& q_int, const Vector& f_int) {
  if (continuous.variables() != VariableKind::Continuous) {
    throw Error(ErrorCode::SchemaError, "mixed: the first block must be continuous");
  }
  const DualLayout a = from_problem(continuous);
  const DualLayout b = sign_quadratic(q_int, f_int);
  const auto n1 = static_cast<Eigen::Index>(a.primal_dim());
  const auto n2 = static_cast<Eigen::Index>(b.primal_dim());
  const auto n = n1 + n2;
  DualLayout d;
  d.base_ = Matrix::Zero(n, n);
  d.base_.topLeftCorner(n1, n1) = a.base_;
  d.base_.bottomRightCorner(n2, n2) = b.base_;
  d.f_.resize(n);
  d.f_ << a.f_, b.f_;
  for (const auto& c : a.coords_) {
    Matrix q = Matrix::Zero(n, n);
    q.topLeftCorner(n1, n1) = c.q;
    d.coords_.push_back({c.kind, c.alpha, c.beta, std::move(q)});
  }
  for (const auto& c : b.coords_) {
    Matrix q = Matrix::Zero(n, n);
    q.bottomRightCorner(n2, n2) = c.q;
    d.coords_.push_back({c.kind, c.alpha, c.beta, std::move(q)});
  }
  for (auto i : b.sign_vars_) d.sign_vars_.push_back(i + static_cast<std::size_t>(n1));
  return d;
}

DualLayout DualLayout::perturbed(double delta, const Vector& anchor) const {
  if (anchor.size() != f_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "perturbation anchor has the wrong dimension");
  }
  DualLayout d = *this;
  d.base_ += delta * Matrix::Identity(base_.rows(), base_.cols());
  d.f_ += delta * anchor;
  d.offset_ += 0.5 * delta * anchor.squaredNorm();
  return d;
}

void DualLayout::require_dim(const Vector& sigma) const {
  if (static_cast<std::size_t>(sigma.size()) != coords_.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "dual point has " + std::to_string(sigma.size()) + " coordinates, expected " +
                    std::to_string(coords_.size()));
  }
  if (!sigma.allFinite()) throw Error(ErrorCode::NonFinite, "dual point is not finite");
}

Matrix DualLayout::assemble(const Vector& sigma) const {
  require_dim(sigma);
  Matrix g = base_;
  for (std::size_t s = 0; s < coords_.size(); ++s) {
    g += sigma(static_cast<Eigen::Index>(s)) * coords_[s].q;
  }
  return g;
}

namespace {

void require_primal_dim(const DualLayout& d, const Vector& x) {
  if (static_cast<std::size_t>(x.size()) != d.primal_dim()) {
    throw Error(ErrorCode::DimensionMismatch, "primal point has the wrong dimension");
  }
}

}  // namespace

double DualLayout::primal(const Vector& x) const {
  require_primal_dim(*this, x);
  double total = 0.5 * x.dot(base_ * x) - x.dot(f_) + offset_;
  for (const auto& c : coords_) total += c.phi(c.measure(x));
  if (!std::isfinite(total)) throw Error(ErrorCode::NonFinite, "primal objective overflowed");
  return total;
}

Vector DualLayout::primal_gradient(const Vector& x) const {
  require_primal_dim(*this, x);
  Vector g = base_ * x - f_;
  for (const auto& c : coords_) {
    if (c.kind == DualKind::SignRelaxation) continue;
    const double xi = c.measure(x);
    if (c.kind == DualKind::XLogX && xi == 0.0) continue;  // q x = 0 there
    g += c.phi_prime(xi) * (c.q * x);
  }
  return g;
}

Matrix DualLayout::primal_hessian(const Vector& x) const {
  require_primal_dim(*this, x);
  Matrix h = base_;
  for (const auto& c : coords_) {
    if (c.kind == DualKind::SignRelaxation) continue;
    const double xi = c.measure(x);
    const Vector qx = c.q * x;
    h += c.phi_prime(xi) * c.q + c.phi_second(xi) * qx * qx.transpose();
  }
  return 0.5 * (h + h.transpose());
}

double DualLayout::conj_total(const Vector& sigma) const {
  require_dim(sigma);
  double total = 0.0;
  for (std::size_t s = 0; s < coords_.size(); ++s) {
    total += coords_[s].conj_value(sigma(static_cast<Eigen::Index>(s)));
  }
  return total;
}

bool DualLayout::in_domain_closed(const Vector& sigma) const {
  require_dim(sigma);
  for (std::size_t s = 0; s < coords_.size(); ++s) {
    const double v = sigma(static_cast<Eigen::Index>(s));
    const auto dom = coords_[s].domain();
    // the exponential conjugate is undefined at sigma = 0
    const bool ok = coords_[s].kind == DualKind::Exponential ? dom.contains_open(v)
                                                             : dom.contains_closed(v);
    if (!ok) return false;
  }
  return true;
}

bool DualLayout::in_domain_open(const Vector& sigma) const {
  require_dim(sigma);
  for (std::size_t s = 0; s < coords_.size(); ++s) {
    if (!coords_[s].domain().contains_open(sigma(static_cast<Eigen::Index>(s)))) return false;
  }
  return true;
}

double boundary_tolerance(const Matrix& g) { return 1e-8 * (1.0 + g.norm()); }

GapMatrix assemble_G(const DualLayout& layout, const Vector& sigma) {
  GapMatrix out;
  out.g = layout.assemble(sigma);
  out.decomp = linalg::eigh(out.g);
  out.tol = boundary_tolerance(out.g);
  out.classification = linalg::classify_eigenvalues(out.decomp.eigvals, out.tol);
  out.pinv = linalg::pinv_absolute(out.decomp, out.tol);
  return out;
}

GapMatrix assemble_G(const Problem& p, const Vector& sigma) {
  return assemble_G(DualLayout::from_problem(p), sigma);
}

double eval_Xi(const DualLayout& layout, const Vector& x, const Vector& sigma) {
  if (static_cast<std::size_t>(x.size()) != layout.primal_dim()) {
    throw Error(ErrorCode::DimensionMismatch, "eval_Xi: x has the wrong dimension");
  }
  const Matrix g = layout.assemble(sigma);
  return 0.5 * x.dot(g * x) - layout.conj_total(sigma) - x.dot(layout.f()) + layout.offset();
}

double eval_Xi(const Problem& p, const Vector& x, const Vector& sigma) {
  return eval_Xi(DualLayout::from_problem(p), x, sigma);
}

double gap_value(const DualLayout& layout, const Vector& x, const Vector& sigma) {
  if (static_cast<std::size_t>(x.size()) != layout.primal_dim()) {
    throw Error(ErrorCode::DimensionMismatch, "gap_value: x has the wrong dimension");
  }
  return 0.5 * x.dot(layout.assemble(sigma) * x);
}

double gap_value(const Problem& p, const Vector& x, const Vector& sigma) {
  return gap_value(DualLayout::from_problem(p), x, sigma);
}

Recovery recover_x(const DualLayout& layout, const Vector& sigma, std::optional<double> zero_tol) {
  const Matrix g = layout.assemble(sigma);
  const auto decomp = linalg::eigh(g);
  const Matrix gp = zero_tol ? linalg::pinv_absolute(decomp, *zero_tol) : linalg::pinv(decomp);
  Recovery r;
  r.x = gp * layout.f();
  r.residual = (g * r.x - layout.f()).norm();
  if (!(r.residual <= kRangeTol * (1.0 + layout.f().norm()))) {
    throw Error(ErrorCode::RangeViolation,
                "f is not in the range of G(sigma): sigma is outside S_c (residual " +
                    std::to_string(r.residual) + ")");
  }
  return r;
}

Recovery recover_x(const Problem& p, const Vector& sigma) {
  return recover_x(DualLayout::from_problem(p), sigma);
}

double eval_dual(const DualLayout& layout, const Vector& sigma) {
  const double conj = layout.conj_total(sigma);  // domain check first
  const Recovery r = recover_x(layout, sigma);
  return -0.5 * layout.f().dot(r.x) - conj + layout.offset();
}

double eval_dual(const Problem& p, const Vector& sigma) {
  return eval_dual(DualLayout::from_problem(p), sigma);
}

Vector grad_dual(const DualLayout& layout, const Vector& sigma) {
  layout.require_dim(sigma);
  const Solved s = solve_nonsingular(layout, sigma);
  Vector g(static_cast<Eigen::Index>(layout.dual_dim()));
  for (std::size_t k = 0; k < layout.dual_dim(); ++k) {
    const auto& c = layout.coords()[k];
    const auto i = static_cast<Eigen::Index>(k);
    g(i) = c.measure(s.x) - c.conj_grad(sigma(i));
  }
  return g;
}

Vector grad_dual(const Problem& p, const Vector& sigma) {
  return grad_dual(DualLayout::from_problem(p), sigma);
}

Matrix hess_dual(const DualLayout& layout, const Vector& sigma) {
  layout.require_dim(sigma);
  const Solved s = solve_nonsingular(layout, sigma);
  const auto m = static_cast<Eigen::Index>(layout.dual_dim());
  const auto n = static_cast<Eigen::Index>(layout.primal_dim());
  Matrix b(n, m);
  for (Eigen::Index k = 0; k < m; ++k) b.col(k) = layout.coords()[k].q * s.x;
  // G^{-1} B through the eigenbasis
  const Matrix vb = s.decomp.eigvecs.transpose() * b;
  const Matrix scaled = s.decomp.eigvals.cwiseInverse().asDiagonal() * vb;
  Matrix h = -vb.transpose() * scaled;
  for (Eigen::Index k = 0; k < m; ++k) h(k, k) -= layout.coords()[k].conj_hess(sigma(k));
  return 0.5 * (h + h.transpose());
}

Vector canonical_residual(const DualLayout& layout, const Vector& x, const Vector& sigma) {
  layout.require_dim(sigma);
  Vector r(static_cast<Eigen::Index>(layout.dual_dim()));
  for (std::size_t k = 0; k < layout.dual_dim(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    r(i) = layout.coords()[k].measure(x) - layout.coords()[k].conj_grad(sigma(i));
  }
  return r;
}

Membership in_S_plus(const DualLayout& layout, const Vector& sigma, std::optional<double> tol) {
  layout.require_dim(sigma);
  if (!layout.in_domain_closed(sigma)) return Membership::Outside;
  const Matrix g = layout.assemble(sigma);
  const auto decomp = linalg::eigh(g);
  const double t = tol.value_or(boundary_tolerance(g));
  const double lmin = decomp.eigvals.size() ? decomp.eigvals.minCoeff() : 0.0;
  if (lmin < -t) return Membership::Outside;

  bool strict_domain = true;
  for (std::size_t k = 0; k < layout.dual_dim(); ++k) {
    const auto dom = layout.coords()[k].domain();
    const double v = sigma(static_cast<Eigen::Index>(k));
    if (std::isfinite(dom.lower) && v <= dom.lower + t) strict_domain = false;
    if (std::isfinite(dom.upper) && v >= dom.upper - t) strict_domain = false;
  }
  if (lmin > t && strict_domain) return Membership::Interior;

  // boundary points still have to lie in S_c: f in range(G)
  const Vector x = linalg::pinv_absolute(decomp, t) * layout.f();
  const double residual = (g * x - layout.f()).norm();
  if (residual > kRangeTol * (1.0 + layout.f().norm())) return Membership::Outside;
  return Membership::Boundary;
}

Membership in_S_plus(const Problem& p, const Vector& sigma, std::optional<double> tol) {
  return in_S_plus(DualLayout::from_problem(p), sigma, tol);
}

}  // namespace canondual
