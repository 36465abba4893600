#include "canondual/integer.hpp"

#include "canondual/error.hpp"
#include "canondual/json_util.hpp"

#include <cmath>

namespace canondual {

namespace {

constexpr double kSnapTol = 1e-5;

// Rounds the sign variables only; continuous coordinates of a mixed layout pass through.
Vector round_signs(const DualLayout& layout, const Vector& x, bool& zero_flag) {
  Vector out = x;
  for (auto i : layout.sign_variables()) {
    const auto ii = static_cast<Eigen::Index>(i);
    if (x(ii) == 0.0) zero_flag = true;
    out(ii) = x(ii) < 0.0 ? -1.0 : 1.0;
  }
  return out;
}

}  // namespace

std::string_view to_string(Certificate c) {
  switch (c) {
    case Certificate::DualCertified: return "DualCertified";
    case Certificate::PerturbationOnly: return "PerturbationOnly";
    case Certificate::Failed: return "Failed";
  }
  return "Unknown";
}

void QipInstance::validate() const {
  if (f.size() == 0) throw Error(ErrorCode::DimensionMismatch, "QIP needs n >= 1");
  if (Q.rows() != f.size() || Q.cols() != f.size()) {
    throw Error(ErrorCode::DimensionMismatch, "QIP: Q must be n x n with n = len(f)");
  }
  if (!Q.allFinite() || !f.allFinite()) throw Error(ErrorCode::NonFinite, "QIP data is not finite");
  linalg::require_symmetric(Q);
}

SignRounding sign_round(const Vector& x) {
  SignRounding r;
  r.x.resize(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x(i) == 0.0) r.zero_flag = true;
    r.x(i) = x(i) < 0.0 ? -1.0 : 1.0;
  }
  return r;
}

QipReport qip_dual_solve(const QipInstance& inst, const SolverConfig& cfg) {
  inst.validate();
  return qip_dual_solve(DualLayout::sign_quadratic(inst.Q, inst.f), cfg);
}

QipReport qip_dual_solve(const DualLayout& layout, const SolverConfig& cfg) {
  QipReport rep;

  try {
    SolverConfig plain = cfg;
    plain.perturb_delta0 = 0.0;
    const SolveReport r = solve_dual(layout, plain);
    if (r.outcome == SolveOutcome::Interior) {
      bool snapped = true;
      for (auto i : layout.sign_variables()) {
        snapped = snapped && std::abs(std::abs(r.x_bar(static_cast<Eigen::Index>(i))) - 1.0) <= kSnapTol;
      }
      if (snapped) {
        rep.x_star = round_signs(layout, r.x_bar, rep.zero_flag);
        rep.sigma_star = r.sigma_bar;
        rep.objective = layout.primal(rep.x_star);
        rep.dual_value = r.dual_value;
        rep.certificate = Certificate::DualCertified;
        return rep;
      }
      rep.note = "interior dual maximizer does not recover a sign vector";
    } else {
      rep.note = "dual maximizer on the boundary of S+";
    }
  } catch (const Error& e) {
    rep.note = std::string("dual solve failed: ") + e.what();
  }

  if (cfg.perturb_delta0 <= 0.0) {
    rep.certificate = Certificate::Failed;
    return rep;
  }
  try {
    const SolveReport r = perturbed_solve(layout, cfg);
    rep.x_star = round_signs(layout, r.x_bar, rep.zero_flag);
    rep.sigma_star = r.sigma_bar;
    rep.objective = layout.primal(rep.x_star);
    rep.dual_value = r.dual_value;
    rep.alternatives = r.alternatives;
    rep.certificate = Certificate::PerturbationOnly;
    if (!rep.note.empty()) rep.note += "; ";
    rep.note += "answer from the perturbation method, not certified";
  } catch (const Error& e) {
    rep.certificate = Certificate::Failed;
    if (!rep.note.empty()) rep.note += "; ";
    rep.note += std::string("perturbation failed: ") + e.what();
  }
  return rep;
}

ComplementarityReport complementarity_check(const QipInstance& inst, const Vector& x,
                                            const Vector& sigma, double tol) {
  if (x.size() != static_cast<Eigen::Index>(inst.n()) || sigma.size() != x.size()) {
    throw Error(ErrorCode::DimensionMismatch, "complementarity_check: size mismatch");
  }
  ComplementarityReport rep;
  double sum = 0.0;
  rep.min_sigma = x.size() ? sigma.minCoeff() : 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double eps = x(i) * x(i) - 1.0;
    rep.max_excess = std::max(rep.max_excess, eps);
    if (eps > tol) rep.violations.push_back("x_" + std::to_string(i) + "^2 exceeds 1");
    if (sigma(i) < -tol) rep.violations.push_back("sigma_" + std::to_string(i) + " is negative");
    sum += eps * sigma(i);
  }
  rep.complementarity = std::abs(sum);
  if (rep.complementarity > tol) {
    rep.violations.push_back("complementarity |<x o x - e, sigma>| = " + std::to_string(rep.complementarity));
  }
  rep.ok = rep.violations.empty();
  return rep;
}

bool is_qip_document(std::string_view json_text) {
  const auto j = json_util::parse(json_text);
  return j.is_object() && j.contains("qip");
}

QipInstance load_qip(std::string_view json_text) {
  using namespace json_util;
  const Json root = parse(json_text);
  require_object(root, "$");
  reject_unknown(root, "$", {"qip"});
  const Json& q = field(root, "$", "qip");
  require_object(q, "$.qip");
  reject_unknown(q, "$.qip", {"Q", "f"});
  QipInstance inst;
  inst.Q = matrix(field(q, "$.qip", "Q"), "$.qip.Q");
  inst.f = vector(field(q, "$.qip", "f"), "$.qip.f");
  if (inst.Q.rows() != inst.f.size() || inst.Q.cols() != inst.f.size()) {
    throw Error(ErrorCode::DimensionMismatch, "$.qip.Q: must be n x n with n = len(f)");
  }
  inst.validate();
  return inst;
}

}  // namespace canondual
