#include "canondual/triality.hpp"

#include "canondual/error.hpp"

#include <algorithm>
#include <cmath>

namespace canondual {

using linalg::Definiteness;

std::string_view to_string(TrialityLabel l) {
  switch (l) {
    case TrialityLabel::GlobalMin: return "GlobalMin";
    case TrialityLabel::LocalMax: return "LocalMax";
    case TrialityLabel::LocalMin: return "LocalMin";
    case TrialityLabel::BoundaryDegenerate: return "BoundaryDegenerate";
    case TrialityLabel::Unclassified: return "Unclassified";
  }
  return "Unknown";
}

Matrix hessian_primal(const Problem& p, const Vector& x) {
  return DualLayout::from_problem(p).primal_hessian(x);
}

double default_critical_tol(const Vector& f) { return 1e-6 * (1.0 + f.norm()); }

TrialityClass classify(const DualLayout& layout, const Vector& x, const Vector& sigma,
                       std::optional<double> tol_opt) {
  const double tol = tol_opt.value_or(default_critical_tol(layout.f()));
  layout.require_dim(sigma);
  if (static_cast<std::size_t>(x.size()) != layout.primal_dim()) {
    throw Error(ErrorCode::DimensionMismatch, "classify: x has the wrong dimension");
  }
  if (!layout.in_domain_closed(sigma)) {
    throw Error(ErrorCode::NotCritical, "sigma lies outside the dual domain");
  }

  TrialityClass out;
  const bool sign_problem = !layout.sign_variables().empty();

  // primal side
  if (sign_problem) {
    double dist = 0.0;
    for (auto i : layout.sign_variables()) {
      dist = std::max(dist, std::abs(std::abs(x(static_cast<Eigen::Index>(i))) - 1.0));
    }
    out.primal_residual = dist;
  } else {
    out.primal_residual = layout.primal_gradient(x).norm();
  }

  // dual side: canonical duality relations plus the x-stationarity of Xi
  const Matrix g = layout.assemble(sigma);
  const double xi_stationarity = (g * x - layout.f()).norm();
  const double canonical = layout.dual_dim() ? canonical_residual(layout, x, sigma).norm() : 0.0;
  out.dual_residual = std::max(xi_stationarity, canonical);

  if (out.primal_residual > tol || out.dual_residual > tol) {
    throw Error(ErrorCode::NotCritical,
                "(x, sigma) is not a critical pair: primal residual " +
                    std::to_string(out.primal_residual) + ", dual residual " +
                    std::to_string(out.dual_residual) + ", tol " + std::to_string(tol));
  }

  const auto gdec = linalg::eigh(g);
  out.g_eigvals = gdec.eigvals;
  out.g_class = linalg::classify_eigenvalues(gdec.eigvals, boundary_tolerance(g));
  out.dims_equal = layout.primal_dim() == layout.dual_dim();

  if (out.g_class != Definiteness::PositiveSemidefiniteSingular &&
      out.g_class != Definiteness::NegativeSemidefiniteSingular && layout.dual_dim() > 0) {
    const Matrix hd = hess_dual(layout, sigma);
    const auto hdec = linalg::eigh(hd);
    out.dual_hessian_eigvals = hdec.eigvals;
    out.dual_hessian_class = linalg::classify_eigenvalues(hdec.eigvals, boundary_tolerance(hd));
  }

  if (out.g_class == Definiteness::PositiveDefinite ||
      out.g_class == Definiteness::PositiveSemidefiniteSingular) {
    out.label = TrialityLabel::GlobalMin;
    if (out.g_class == Definiteness::PositiveSemidefiniteSingular) {
      out.note = "G(sigma) is singular: sigma lies on the boundary of S+";
    }
    return out;
  }

  if (sign_problem) {
    out.note = "local triality statements are not defined on the sign hypercube";
    return out;
  }

  const Matrix hp = layout.primal_hessian(x);
  const auto pdec = linalg::eigh(hp);
  out.primal_hessian_eigvals = pdec.eigvals;
  out.primal_hessian_class = linalg::classify_eigenvalues(pdec.eigvals, boundary_tolerance(hp));

  if (out.g_class == Definiteness::NegativeSemidefiniteSingular) {
    out.label = TrialityLabel::BoundaryDegenerate;
    out.note = "G(sigma) is negative semidefinite and singular";
    return out;
  }
  if (out.g_class == Definiteness::Indefinite) {
    out.note = "G(sigma) is indefinite: neither S+ nor S-";
    return out;
  }

  // G negative definite
  switch (*out.primal_hessian_class) {
    case Definiteness::NegativeDefinite:
      out.label = TrialityLabel::LocalMax;
      break;
    case Definiteness::PositiveDefinite:
      if (out.dims_equal) {
        out.label = TrialityLabel::LocalMin;
      } else {
        out.note = "double-min holds only weakly when dim Pi != dim Pi^d";
      }
      break;
    case Definiteness::PositiveSemidefiniteSingular:
    case Definiteness::NegativeSemidefiniteSingular:
      out.label = TrialityLabel::BoundaryDegenerate;
      out.note = "primal Hessian is singular";
      break;
    case Definiteness::Indefinite:
      out.note = "primal Hessian is indefinite (saddle point)";
      break;
  }
  return out;
}

TrialityClass classify(const Problem& p, const Vector& x, const Vector& sigma,
                       std::optional<double> tol) {
  return classify(DualLayout::from_problem(p), x, sigma, tol);
}

}  // namespace canondual
