#include "canondual/solver.hpp"

#include "canondual/error.hpp"
#include "canondual/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace canondual {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kSnapTol = 1e-5;
constexpr double kClusterRadius = 1e-5;

struct BarrierEval {
  bool feasible = false;
  double value = 0.0;  // Pi^d + mu * (log det G + sum log slack)
  double dual = 0.0;
  Vector grad;
  Matrix hess;
  double min_eig = 0.0;
};

// Evaluates the barrier objective at a strictly feasible sigma; infeasible
// points (G not positive definite or sigma outside the open domain) are
// reported through `feasible`.
BarrierEval barrier_eval(const DualLayout& layout, const Vector& sigma, double mu, bool derivs) {
  BarrierEval e;
  if (!sigma.allFinite() || !layout.in_domain_open(sigma)) return e;
  const Matrix g = layout.assemble(sigma);
  const auto dec = linalg::eigh(g);
  const Vector& lam = dec.eigvals;
  e.min_eig = lam.minCoeff();
  if (!(e.min_eig > 0.0)) return e;

  const Vector y = dec.eigvecs.transpose() * layout.f();
  const Vector x = dec.eigvecs * y.cwiseQuotient(lam);
  const auto& coords = layout.coords();
  const auto m = static_cast<Eigen::Index>(coords.size());

  double log_terms = 0.0;
  if (mu > 0.0) {
    log_terms = lam.array().log().sum();
    for (Eigen::Index k = 0; k < m; ++k) {
      const auto dom = coords[k].domain();
      if (std::isfinite(dom.lower)) log_terms += std::log(sigma(k) - dom.lower);
      if (std::isfinite(dom.upper)) log_terms += std::log(dom.upper - sigma(k));
    }
  }
  e.dual = -0.5 * layout.f().dot(x) - layout.conj_total(sigma) + layout.offset();
  e.value = e.dual + mu * log_terms;
  if (!std::isfinite(e.value)) return e;
  e.feasible = true;
  if (!derivs) return e;

  const auto n = static_cast<Eigen::Index>(layout.primal_dim());
  Matrix b(n, m);
  for (Eigen::Index k = 0; k < m; ++k) b.col(k) = coords[k].q * x;
  const Matrix vb = dec.eigvecs.transpose() * b;
  e.hess = -vb.transpose() * lam.cwiseInverse().asDiagonal() * vb;
  e.grad.resize(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    e.grad(k) = 0.5 * x.dot(b.col(k)) - coords[k].conj_grad(sigma(k));
    e.hess(k, k) -= coords[k].conj_hess(sigma(k));
  }
  if (mu > 0.0) {
    const Vector isq = lam.cwiseSqrt().cwiseInverse();
    std::vector<Matrix> r(static_cast<std::size_t>(m));
    for (Eigen::Index k = 0; k < m; ++k) {
      r[k] = isq.asDiagonal() * (dec.eigvecs.transpose() * coords[k].q * dec.eigvecs) *
             isq.asDiagonal();
      e.grad(k) += mu * r[k].trace();
    }
    for (Eigen::Index k = 0; k < m; ++k) {
      for (Eigen::Index l = k; l < m; ++l) {
        const double t = mu * r[k].cwiseProduct(r[l]).sum();
        e.hess(k, l) -= t;
        if (l != k) e.hess(l, k) -= t;
      }
      const auto dom = coords[k].domain();
      if (std::isfinite(dom.lower)) {
        const double s = sigma(k) - dom.lower;
        e.grad(k) += mu / s;
        e.hess(k, k) -= mu / (s * s);
      }
      if (std::isfinite(dom.upper)) {
        const double s = dom.upper - sigma(k);
        e.grad(k) -= mu / s;
        e.hess(k, k) -= mu / (s * s);
      }
    }
  }
  e.hess = 0.5 * (e.hess + e.hess.transpose());
  return e;
}

// Ascent direction: Newton when -H is positive definite, scaled gradient otherwise.
Vector ascent_direction(const BarrierEval& e) {
  Eigen::LLT<Matrix> llt(-e.hess);
  if (llt.info() == Eigen::Success) {
    Vector d = llt.solve(e.grad);
    if (d.allFinite()) return d;
  }
  const double scale = std::max(1.0, e.hess.norm());
  return e.grad / scale;
}

struct AscentState {
  Vector sigma;
  int iterations = 0;
};

// Damped Newton ascent on the barrier objective at fixed mu. Every accepted
// step increases the objective (Armijo, c = 1e-4).
void barrier_ascent(const DualLayout& layout, AscentState& st, double mu, const SolverConfig& cfg,
                    std::vector<double>& trace) {
  BarrierEval e = barrier_eval(layout, st.sigma, mu, true);
  if (!e.feasible) throw Error(ErrorCode::EmptyInterior, "barrier start is not strictly feasible");
  for (int it = 0; it < cfg.max_inner; ++it) {
    const Vector d = ascent_direction(e);
    const double dec = e.grad.dot(d);
    if (!(dec > 1e-18 * (1.0 + std::abs(e.value)))) break;
    double t = 1.0;
    bool accepted = false;
    BarrierEval cand;
    for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
      cand = barrier_eval(layout, st.sigma + t * d, mu, true);
      if (cand.feasible && cand.value >= e.value + 1e-4 * t * dec) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    st.sigma += t * d;
    ++st.iterations;
    e = std::move(cand);
    trace.push_back(e.value);
    if (t * d.norm() <= cfg.step_tol * (1.0 + st.sigma.norm()) && dec < 1e-12) break;
  }
}

// Newton on Pi^d itself, staying strictly inside S+. Accepts a step when it
// lowers the gradient norm or satisfies Armijo on Pi^d.
void polish(const DualLayout& layout, AscentState& st, const SolverConfig& cfg) {
  BarrierEval e = barrier_eval(layout, st.sigma, 0.0, true);
  if (!e.feasible) return;
  for (int it = 0; it < 100; ++it) {
    const double gnorm = e.grad.norm();
    if (gnorm <= 1e-3 * cfg.grad_tol) break;
    const Vector d = ascent_direction(e);
    const double dec = e.grad.dot(d);
    double t = 1.0;
    bool accepted = false;
    BarrierEval cand;
    for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
      cand = barrier_eval(layout, st.sigma + t * d, 0.0, true);
      if (!cand.feasible) continue;
      if (cand.grad.norm() < gnorm || cand.value >= e.value + 1e-4 * t * dec) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    st.sigma += t * d;
    ++st.iterations;
    e = std::move(cand);
  }
}

std::vector<DualInterval> domain_box(const DualLayout& layout) {
  std::vector<DualInterval> box;
  for (const auto& c : layout.coords()) box.push_back(c.domain());
  return box;
}

double margin(double bound) { return 1e-6 * (1.0 + std::abs(bound)); }

double clamp_into(double v, const DualInterval& iv) {
  if (std::isfinite(iv.lower)) v = std::max(v, iv.lower + margin(iv.lower));
  if (std::isfinite(iv.upper)) v = std::min(v, iv.upper - margin(iv.upper));
  return v;
}

double min_eig(const DualLayout& layout, const Vector& sigma, Vector* eigvec = nullptr) {
  const auto dec = linalg::eigh(layout.assemble(sigma));
  if (eigvec) *eigvec = dec.eigvecs.col(0);
  return dec.eigvals(0);
}

void require_sign_snap(const DualLayout& layout, const Vector& x, bool& snapped) {
  snapped = true;
  for (auto i : layout.sign_variables()) {
    if (std::abs(std::abs(x(static_cast<Eigen::Index>(i))) - 1.0) > kSnapTol) snapped = false;
  }
}

Vector sign_round_vars(const DualLayout& layout, Vector x) {
  for (auto i : layout.sign_variables()) {
    auto& v = x(static_cast<Eigen::Index>(i));
    v = v < 0.0 ? -1.0 : 1.0;
  }
  return x;
}

bool lex_less(const Vector& a, const Vector& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a(i) < b(i)) return true;
    if (a(i) > b(i)) return false;
  }
  return false;
}

std::vector<Vector> cluster(std::vector<Vector> pts, double radius) {
  std::sort(pts.begin(), pts.end(), lex_less);
  std::vector<Vector> reps;
  for (auto& p : pts) {
    bool seen = false;
    for (const auto& r : reps) seen = seen || (r - p).norm() <= radius;
    if (!seen) reps.push_back(std::move(p));
  }
  return reps;
}

}  // namespace

std::string_view to_string(SolveOutcome o) {
  switch (o) {
    case SolveOutcome::Interior: return "Interior";
    case SolveOutcome::Boundary: return "Boundary";
    case SolveOutcome::PerturbationCertified: return "PerturbationCertified";
    case SolveOutcome::PerturbationLocal: return "PerturbationLocal";
  }
  return "Unknown";
}

void SolverConfig::validate() const {
  auto bad = [](const char* what) { throw Error(ErrorCode::SchemaError, std::string("config: ") + what); };
  if (!(barrier_weight > 0)) bad("barrier_weight must be positive");
  if (!(barrier_shrink > 0 && barrier_shrink < 1)) bad("barrier_shrink must lie in (0, 1)");
  if (!(barrier_min > 0)) bad("barrier_min must be positive");
  if (max_outer <= 0 || max_inner <= 0) bad("iteration limits must be positive");
  if (!(grad_tol > 0) || !(step_tol > 0)) bad("tolerances must be positive");
  if (!(perturb_delta0 >= 0)) bad("perturb_delta0 must be nonnegative");
  if (!(perturb_shrink > 0 && perturb_shrink < 1)) bad("perturb_shrink must lie in (0, 1)");
  if (!(perturb_delta_min >= 0)) bad("perturb_delta_min must be nonnegative");
  if (max_perturb_rounds <= 0 || perturb_starts <= 0 || sweep_starts <= 0) {
    bad("round and start counts must be positive");
  }
}

ExistenceResult existence_check(const DualLayout& layout, const SolverConfig& cfg,
                                const std::optional<std::vector<DualInterval>>& bounds) {
  const auto m = static_cast<Eigen::Index>(layout.dual_dim());
  const std::vector<DualInterval> box = bounds.value_or(domain_box(layout));
  if (static_cast<Eigen::Index>(box.size()) != m) {
    throw Error(ErrorCode::DimensionMismatch, "existence_check: one interval per dual coordinate");
  }
  ExistenceResult best;
  best.lambda_min = -std::numeric_limits<double>::infinity();
  auto consider = [&](const Vector& s) {
    if (!layout.in_domain_open(s)) return false;
    const double l = min_eig(layout, s);
    if (l > best.lambda_min) {
      best.lambda_min = l;
      best.witness = s;
    }
    best.interior_nonempty = best.lambda_min > 0.0;
    return best.interior_nonempty;
  };

  if (m == 0) {
    best.witness = Vector(0);
    best.lambda_min = layout.primal_dim() ? min_eig(layout, Vector(0)) : 0.0;
    best.interior_nonempty = best.lambda_min > 0.0;
    return best;
  }

  // a point just inside the domain near the origin
  Vector s(m);
  for (Eigen::Index k = 0; k < m; ++k) s(k) = clamp_into(1e-6, box[k]);
  if (consider(s)) return best;

  // large multiples of a feasible direction
  const auto base_dec = linalg::eigh(layout.base());
  double t = 1.0 + std::max(0.0, -base_dec.eigvals(0));
  for (int rep = 0; rep < 25; ++rep, t *= 4.0) {
    for (Eigen::Index k = 0; k < m; ++k) {
      const auto& iv = box[k];
      double v;
      if (!std::isfinite(iv.upper)) {
        v = std::max(std::isfinite(iv.lower) ? iv.lower : 0.0, 0.0) + t;
      } else if (!std::isfinite(iv.lower)) {
        v = iv.upper > 0.0 ? 0.5 * iv.upper : iv.upper - 1.0;
      } else {
        v = 0.5 * (iv.lower + iv.upper);
      }
      s(k) = clamp_into(v, iv);
    }
    if (consider(s)) return best;
  }

  // projected supergradient ascent on lambda_min from the best point so far
  if (best.witness.size() != m) {
    for (Eigen::Index k = 0; k < m; ++k) s(k) = clamp_into(0.0, box[k]);
    best.witness = s;
    best.lambda_min = min_eig(layout, s);
  }
  s = best.witness;
  const double step0 = 1.0 + s.cwiseAbs().maxCoeff();
  Vector v;
  for (int it = 0; it < 500; ++it) {
    min_eig(layout, s, &v);
    Vector sub(m);
    for (Eigen::Index k = 0; k < m; ++k) sub(k) = v.dot(layout.coords()[k].q * v);
    const double nrm = sub.norm();
    if (nrm == 0.0) break;
    const double eta = step0 / std::sqrt(1.0 + it);
    for (Eigen::Index k = 0; k < m; ++k) s(k) = clamp_into(s(k) + eta * sub(k) / nrm, box[k]);
    if (consider(s)) return best;
  }
  (void)cfg;
  return best;
}

ExistenceResult existence_check(const Problem& p, const SolverConfig& cfg,
                                const std::optional<std::vector<DualInterval>>& bounds) {
  return existence_check(DualLayout::from_problem(p), cfg, bounds);
}

SolveReport solve_dual(const DualLayout& layout, const SolverConfig& cfg) {
  cfg.validate();
  SolveReport rep;
  const auto m = layout.dual_dim();

  AscentState st;
  if (m > 0) {
    const auto ex = existence_check(layout, cfg);
    if (!ex.interior_nonempty) {
      throw Error(ErrorCode::EmptyInterior,
                  "no dual point with G(sigma) > 0 found (best lambda_min " +
                      std::to_string(ex.lambda_min) + ")");
    }
    st.sigma = ex.witness;
    double mu = cfg.barrier_weight;
    for (int outer = 0; outer < cfg.max_outer && mu >= cfg.barrier_min; ++outer, mu *= cfg.barrier_shrink) {
      if (!rep.barrier_trace.empty()) rep.barrier_trace.push_back(kNaN);
      barrier_ascent(layout, st, mu, cfg, rep.barrier_trace);
    }
    polish(layout, st, cfg);
  } else {
    st.sigma = Vector(0);
    if (!(min_eig(layout, st.sigma) > 0.0)) {
      // no dual coordinates: G is the constant base matrix
      const auto mem = in_S_plus(layout, st.sigma);
      if (mem == Membership::Outside) {
        throw Error(ErrorCode::EmptyInterior, "constant G is not positive semidefinite");
      }
    }
  }

  rep.sigma_bar = st.sigma;
  rep.iterations = st.iterations;
  rep.membership = in_S_plus(layout, st.sigma);
  const Matrix g = layout.assemble(st.sigma);
  const double tol = boundary_tolerance(g);
  rep.min_eig_G = linalg::eigh(g).eigvals(0);

  Recovery rec;
  if (rep.membership == Membership::Interior) {
    rec = recover_x(layout, st.sigma);
    rep.grad_norm = m ? grad_dual(layout, st.sigma).norm() : 0.0;
    if (!(rep.grad_norm <= cfg.grad_tol)) {
      throw Error(ErrorCode::MaxIterations,
                  "interior dual point reached but ||grad Pi^d|| = " + std::to_string(rep.grad_norm));
    }
    rep.outcome = SolveOutcome::Interior;
  } else if (rep.membership == Membership::Boundary) {
    rec = recover_x(layout, st.sigma, tol);
    rep.boundary_flag = true;
    rep.grad_norm = kNaN;
    rep.outcome = SolveOutcome::Boundary;
    rep.note = "dual maximizer on the boundary of S+; xbar from the truncated pseudoinverse";
  } else {
    throw Error(ErrorCode::MaxIterations, "barrier iterate left S+");
  }

  rep.x_bar = rec.x;
  rep.range_residual = rec.residual;
  rep.primal_value = layout.primal(rep.x_bar);
  rep.dual_value = -0.5 * layout.f().dot(rep.x_bar) - layout.conj_total(st.sigma) + layout.offset();
  rep.duality_residual = std::abs(rep.primal_value - rep.dual_value);
  rep.xi_residual = std::abs(eval_Xi(layout, rep.x_bar, st.sigma) - rep.primal_value);
  try {
    rep.triality = classify(layout, rep.x_bar, st.sigma);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NotCritical) throw;
    if (!rep.note.empty()) rep.note += "; ";
    rep.note += "pair is not critical, triality not assigned";
  }
  return rep;
}

SolveReport solve_dual(const Problem& p, const SolverConfig& cfg) {
  return solve_dual(DualLayout::from_problem(p), cfg);
}

SolveReport perturbed_solve(const DualLayout& layout, const SolverConfig& cfg) {
  cfg.validate();
  std::optional<SolveReport> plain;
  try {
    plain = solve_dual(layout, cfg);
  } catch (const Error& e) {
    if (cfg.perturb_delta0 == 0.0) throw;
  }
  if (cfg.perturb_delta0 == 0.0) return *plain;
  if (plain && plain->outcome == SolveOutcome::Interior) {
    bool snapped = true;
    require_sign_snap(layout, plain->x_bar, snapped);
    if (snapped) return *plain;
  }

  const auto n = static_cast<Eigen::Index>(layout.primal_dim());
  std::vector<bool> is_sign(static_cast<std::size_t>(n), false);
  for (auto i : layout.sign_variables()) is_sign[i] = true;

  struct Run {
    bool ok = false;
    SolveReport last;
    Vector x;
    bool certified = false;
    int rounds = 0;
    double value = 0.0;
  };
  std::vector<Run> runs(static_cast<std::size_t>(cfg.perturb_starts));

  SolverConfig inner = cfg;
  inner.threads = 1;
  parallel_for(runs.size(), cfg.threads, [&](std::size_t r) {
    std::mt19937_64 rng(cfg.seed + 0x9e3779b97f4a7c15ULL * (r + 1));
    std::normal_distribution<double> normal;
    std::bernoulli_distribution coin;
    Vector chi(n);
    double cont_norm = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (is_sign[i]) {
        chi(i) = coin(rng) ? 1.0 : -1.0;
      } else {
        chi(i) = normal(rng);
        cont_norm += chi(i) * chi(i);
      }
    }
    cont_norm = std::sqrt(cont_norm);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!is_sign[i] && cont_norm > 0) chi(i) /= cont_norm;
    }

    Run& run = runs[r];
    double delta = cfg.perturb_delta0;
    for (int k = 0; k < cfg.max_perturb_rounds; ++k) {
      const DualLayout pert = layout.perturbed(delta, chi);
      SolveReport res;
      try {
        res = solve_dual(pert, inner);
      } catch (const Error&) {
        break;
      }
      run.ok = true;
      run.rounds = k + 1;
      const Vector next = sign_round_vars(layout, res.x_bar);
      bool snapped = true;
      require_sign_snap(layout, res.x_bar, snapped);
      run.certified = res.outcome == SolveOutcome::Interior && snapped;
      run.last = std::move(res);
      const double moved = (next - chi).norm();
      chi = next;
      if (moved <= cfg.step_tol * (1.0 + chi.norm())) break;
      delta = std::max(delta * cfg.perturb_shrink, cfg.perturb_delta_min);
    }
    if (run.ok) {
      run.x = chi;
      run.value = layout.primal(chi);
    }
  });

  const Run* best = nullptr;
  for (const auto& run : runs) {
    if (!run.ok) continue;
    if (!best || run.value < best->value - 1e-12 * (1.0 + std::abs(best->value)) ||
        (std::abs(run.value - best->value) <= 1e-12 * (1.0 + std::abs(best->value)) &&
         lex_less(run.x, best->x))) {
      best = &run;
    }
  }
  if (!best) {
    throw Error(ErrorCode::MaxIterations, "every perturbed dual solve failed");
  }

  SolveReport rep = best->last;
  rep.x_bar = best->x;
  rep.primal_value = best->value;
  rep.perturbation_rounds = best->rounds;
  rep.outcome = best->certified ? SolveOutcome::PerturbationCertified : SolveOutcome::PerturbationLocal;
  std::vector<Vector> ties;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    if (runs[r].ok && runs[r].value <= best->value + 1e-9 * (1.0 + std::abs(best->value))) ties.push_back(runs[r].x);
  }
  rep.alternatives = cluster(std::move(ties), kClusterRadius);
  // Pi^d of the original problem at the perturbed multiplier: a valid lower
  // bound only when that multiplier lies in S+ of the original problem.
  rep.membership = in_S_plus(layout, rep.sigma_bar);
  rep.dual_value = kNaN;
  rep.xi_residual = kNaN;
  if (rep.membership != Membership::Outside) {
    try {
      const Matrix g0 = layout.assemble(rep.sigma_bar);
      const Recovery rec = recover_x(layout, rep.sigma_bar, boundary_tolerance(g0));
      rep.dual_value = -0.5 * layout.f().dot(rec.x) - layout.conj_total(rep.sigma_bar) + layout.offset();
      rep.xi_residual = std::abs(eval_Xi(layout, rep.x_bar, rep.sigma_bar) - rep.primal_value);
    } catch (const Error&) {
      rep.dual_value = kNaN;
    }
  }
  rep.duality_residual = std::abs(rep.primal_value - rep.dual_value);
  rep.note = best->certified
                 ? "global optimality not guaranteed: certified only for the perturbed problem"
                 : "perturbation did not reach an interior perturbed dual; local answer";
  rep.triality.reset();
  try {
    rep.triality = classify(layout, rep.x_bar, rep.sigma_bar);
  } catch (const Error&) {
    // the perturbed multiplier need not pair with xbar in the original problem
  }
  return rep;
}

SolveReport perturbed_solve(const Problem& p, const SolverConfig& cfg) {
  return perturbed_solve(DualLayout::from_problem(p), cfg);
}

std::vector<double> solve_cubic_dual(double alpha, double lambda, double f_norm) {
  if (!(alpha > 0)) throw Error(ErrorCode::DomainViolation, "solve_cubic_dual needs alpha > 0");
  if (!(f_norm >= 0)) throw Error(ErrorCode::DomainViolation, "solve_cubic_dual needs f_norm >= 0");
  // sigma^3 + a sigma^2 - d = 0
  const double a = alpha * lambda;
  const double d = alpha * 0.5 * f_norm * f_norm;
  std::vector<double> roots;
  if (d == 0.0) {
    roots = {0.0, 0.0, -a};
  } else {
    const double p = -a * a / 3.0;
    const double q = 2.0 * a * a * a / 27.0 - d;
    const double disc = -(4.0 * p * p * p + 27.0 * q * q);
    const double shift = -a / 3.0;
    if (disc > 0.0) {
      const double r = 2.0 * std::sqrt(-p / 3.0);
      const double arg = std::clamp(3.0 * q / (2.0 * p) * std::sqrt(-3.0 / p), -1.0, 1.0);
      const double phi = std::acos(arg) / 3.0;
      for (int k = 0; k < 3; ++k) {
        roots.push_back(r * std::cos(phi - 2.0 * std::numbers::pi * k / 3.0) + shift);
      }
    } else {
      const double h = std::sqrt(std::max(0.0, q * q / 4.0 + p * p * p / 27.0));
      const double t = std::cbrt(-q / 2.0 + h) + std::cbrt(-q / 2.0 - h);
      roots.push_back(t + shift);
    }
    for (double& s : roots) {
      for (int it = 0; it < 4; ++it) {
        const double val = (s + a) * s * s - d;
        const double der = 3.0 * s * s + 2.0 * a * s;
        if (der == 0.0) break;
        const double next = s - val / der;
        if (!std::isfinite(next)) break;
        if (std::abs((next + a) * next * next - d) >= std::abs(val)) break;
        s = next;
      }
    }
  }
  std::sort(roots.begin(), roots.end(), std::greater<>());
  return roots;
}

std::vector<Vector> dual_critical_points(const DualLayout& layout, const SolverConfig& cfg) {
  const auto m = static_cast<Eigen::Index>(layout.dual_dim());
  if (m == 0) return {};
  double radius = 1.0 + layout.f().norm() + layout.base().norm();
  for (const auto& c : layout.coords()) radius += std::abs(c.alpha) + std::abs(c.alpha * c.beta);
  radius *= 4.0;

  const auto count = static_cast<std::size_t>(cfg.sweep_starts);
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  // Latin hypercube over the (clipped) domain box
  std::vector<Vector> starts(count, Vector(m));
  for (Eigen::Index k = 0; k < m; ++k) {
    auto iv = layout.coords()[k].domain();
    double lo = std::isfinite(iv.lower) ? iv.lower : -radius;
    double hi = std::isfinite(iv.upper) ? iv.upper : radius;
    if (hi <= lo) hi = lo + radius;
    std::vector<std::size_t> strata(count);
    for (std::size_t i = 0; i < count; ++i) strata[i] = i;
    std::shuffle(strata.begin(), strata.end(), rng);
    for (std::size_t i = 0; i < count; ++i) {
      const double u = (static_cast<double>(strata[i]) + unit(rng)) / static_cast<double>(count);
      starts[i](k) = lo + u * (hi - lo);
    }
  }

  const double gtol = 1e-10 * (1.0 + layout.f().squaredNorm());
  std::vector<std::optional<Vector>> found(count);
  parallel_for(count, cfg.threads, [&](std::size_t i) {
    Vector s = starts[i];
    auto grad_at = [&](const Vector& v) -> std::optional<Vector> {
      if (!layout.in_domain_open(v)) return std::nullopt;
      try {
        return grad_dual(layout, v);
      } catch (const Error&) {
        return std::nullopt;
      }
    };
    auto g = grad_at(s);
    if (!g) return;
    for (int it = 0; it < 200; ++it) {
      if (g->norm() <= gtol) {
        found[i] = s;
        return;
      }
      Matrix h;
      try {
        h = hess_dual(layout, s);
      } catch (const Error&) {
        return;
      }
      const Vector d = -h.fullPivLu().solve(*g);
      if (!d.allFinite()) return;
      double t = 1.0;
      bool accepted = false;
      for (int ls = 0; ls < 40; ++ls, t *= 0.5) {
        auto gc = grad_at(s + t * d);
        if (gc && gc->norm() < g->norm()) {
          s += t * d;
          g = gc;
          accepted = true;
          break;
        }
      }
      if (!accepted) return;
    }
  });

  std::vector<Vector> pts;
  for (auto& f : found) {
    if (f) pts.push_back(*f);
  }
  return cluster(std::move(pts), kClusterRadius);
}

SweepResult fc_sweep(const Problem& tmpl, const Vector& direction, const std::vector<double>& grid,
                     const SolverConfig& cfg) {
  cfg.validate();
  if (static_cast<std::size_t>(direction.size()) != tmpl.n()) {
    throw Error(ErrorCode::DimensionMismatch, "sweep direction has the wrong dimension");
  }
  if (!(direction.norm() > 0)) throw Error(ErrorCode::DomainViolation, "sweep direction is zero");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 0) || (i > 0 && !(grid[i] > grid[i - 1]))) {
      throw Error(ErrorCode::DomainViolation, "sweep grid must be nonnegative and strictly ascending");
    }
  }
  const Vector dir = direction.normalized();
  SweepResult out;
  out.rows.resize(grid.size());
  SolverConfig inner = cfg;
  inner.threads = 1;
  parallel_for(grid.size(), cfg.threads, [&](std::size_t i) {
    SweepRow& row = out.rows[i];
    row.magnitude = grid[i];
    const DualLayout layout = DualLayout::from_problem(tmpl.with_input(grid[i] * dir));
    bool interior = false;
    try {
      const SolveReport r = solve_dual(layout, inner);
      row.outcome = std::string(to_string(r.membership));
      row.sigma_bar = r.sigma_bar;
      interior = r.membership == Membership::Interior;
    } catch (const Error& e) {
      row.outcome = std::string(to_string(e.code()));
    }
    const auto crit = dual_critical_points(layout, inner);
    row.critical_points = crit.size();
    row.unique = interior && crit.size() == 1 && (crit[0] - row.sigma_bar).norm() <= kClusterRadius;
  });
  for (std::size_t i = out.rows.size(); i-- > 0;) {
    if (!out.rows[i].unique) break;
    out.threshold = out.rows[i].magnitude;
  }
  return out;
}

}  // namespace canondual
