#pragma once

#include "canondual/dual.hpp"
#include "canondual/solver.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace canondual {

/// min 1/2 x^T Q x - x^T f over x in {-1, 1}^n.
struct QipInstance {
  Matrix Q;
  Vector f;

  std::size_t n() const { return static_cast<std::size_t>(f.size()); }
  /// Throws InvalidMatrix / DimensionMismatch / NonFinite.
  void validate() const;
  double objective(const Vector& x) const { return 0.5 * x.dot(Q * x) - x.dot(f); }
};

enum class Certificate { DualCertified, PerturbationOnly, Failed };
std::string_view to_string(Certificate c);

struct QipReport {
  Vector x_star;
  Vector sigma_star;
  double objective = 0.0;
  Certificate certificate = Certificate::Failed;
  double dual_value = 0.0;
  bool zero_flag = false;  // some component of G^+ f was exactly zero before rounding
  std::vector<Vector> alternatives;
  std::string note;
};

/// Canonical dual of the QIP: max -1/2 f^T G(sigma)^+ f - sum sigma over
/// sigma > 0, G(sigma) = Q + 2 Diag(sigma) > 0. Falls back to the perturbation
/// method when the interior maximizer does not recover a sign vector.
/// Setting cfg.perturb_delta0 = 0 disables the fallback (certificate Failed).
QipReport qip_dual_solve(const QipInstance& inst, const SolverConfig& cfg);
/// Same pipeline on any layout with sign variables; the objective is layout.primal.
QipReport qip_dual_solve(const DualLayout& layout, const SolverConfig& cfg);

struct SignRounding {
  Vector x;
  bool zero_flag = false;
};

/// Componentwise sign; exact zeros go to +1 and set zero_flag.
SignRounding sign_round(const Vector& x);

struct ComplementarityReport {
  bool ok = true;
  double max_excess = 0.0;         // max(x_i^2 - 1, 0)
  double min_sigma = 0.0;
  double complementarity = 0.0;    // |sum (x_i^2 - 1) sigma_i|
  std::vector<std::string> violations;
};

ComplementarityReport complementarity_check(const QipInstance& inst, const Vector& x,
                                            const Vector& sigma, double tol);

/// {"qip": {"Q": [[...]], "f": [...]}}
QipInstance load_qip(std::string_view json_text);

/// True when the text is a QIP document rather than a problem document.
bool is_qip_document(std::string_view json_text);

}  // namespace canondual
