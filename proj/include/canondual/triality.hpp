#pragma once

#include "canondual/dual.hpp"
#include "canondual/linalg.hpp"
#include "canondual/model.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace canondual {

enum class TrialityLabel { GlobalMin, LocalMax, LocalMin, BoundaryDegenerate, Unclassified };

std::string_view to_string(TrialityLabel l);

struct TrialityClass {
  TrialityLabel label = TrialityLabel::Unclassified;
  linalg::Definiteness g_class;
  Vector g_eigvals;
  std::optional<linalg::Definiteness> primal_hessian_class;
  Vector primal_hessian_eigvals;
  std::optional<linalg::Definiteness> dual_hessian_class;
  Vector dual_hessian_eigvals;
  bool dims_equal = false;
  double primal_residual = 0.0;  // ||grad Pi(x)|| (continuous) or distance to {-1,1}^n
  double dual_residual = 0.0;    // max of canonical residual and ||G x - f||
  std::string note;
};

/// Hessian of Pi at x: sum_s [Phi_s'(xi_s) M_s + Phi_s''(xi_s) (M_s x)(M_s x)^T].
Matrix hessian_primal(const Problem& p, const Vector& x);

/// 1e-6 (1 + ||f||).
double default_critical_tol(const Vector& f);

/// Triality classification of a critical pair (x, sigma). Throws NotCritical
/// when either side fails its stationarity test at `tol`.
TrialityClass classify(const DualLayout& layout, const Vector& x, const Vector& sigma,
                       std::optional<double> tol = std::nullopt);
TrialityClass classify(const Problem& p, const Vector& x, const Vector& sigma,
                       std::optional<double> tol = std::nullopt);

}  // namespace canondual
