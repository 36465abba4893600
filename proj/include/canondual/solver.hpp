#pragma once

#include "canondual/dual.hpp"
#include "canondual/model.hpp"
#include "canondual/triality.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace canondual {

struct SolverConfig {
  double barrier_weight = 1.0;  // initial mu
  double barrier_shrink = 0.2;  // mu <- mu * shrink per outer iteration
  double barrier_min = 1e-12;   // outer loop stops once mu drops below this
  int max_outer = 80;
  int max_inner = 200;
  double grad_tol = 1e-9;
  double step_tol = 1e-10;
  double perturb_delta0 = 1.0;
  double perturb_shrink = 0.5;
  double perturb_delta_min = 1e-4;  // floor on delta_k
  int max_perturb_rounds = 60;
  int perturb_starts = 8;  // seeded restarts of the perturbation anchor
  int sweep_starts = 96;   // Newton starts per magnitude in fc_sweep
  std::uint64_t seed = 1;
  unsigned threads = 0;  // 0: CANON_DUAL_THREADS or hardware concurrency

  /// Throws SchemaError when a field is out of range.
  void validate() const;
};

enum class SolveOutcome { Interior, Boundary, PerturbationCertified, PerturbationLocal };

std::string_view to_string(SolveOutcome o);

struct SolveReport {
  Vector x_bar;
  Vector sigma_bar;
  double primal_value = 0.0;
  double dual_value = 0.0;
  double duality_residual = 0.0;  // |Pi(xbar) - Pi^d(sigmabar)|
  double xi_residual = 0.0;       // |Xi(xbar, sigmabar) - Pi(xbar)|
  Membership membership = Membership::Outside;
  SolveOutcome outcome = SolveOutcome::Interior;
  std::optional<TrialityClass> triality;
  int iterations = 0;
  bool boundary_flag = false;
  double grad_norm = 0.0;  // ||grad Pi^d|| at sigmabar (NaN on the boundary)
  double range_residual = 0.0;
  double min_eig_G = 0.0;
  int perturbation_rounds = 0;
  std::vector<Vector> alternatives;  // distinct end points of the perturbation restarts
  std::vector<double> barrier_trace;  // barrier objective after each accepted step, per mu level
  std::string note;
};

/// Concave maximization of Pi^d over int S+ by a log-det barrier method with
/// Newton steps, followed by an unbarriered Newton polish. Throws EmptyInterior
/// when no sigma with G(sigma) > 0 can be found and MaxIterations when an
/// interior run does not reach grad_tol.
SolveReport solve_dual(const DualLayout& layout, const SolverConfig& cfg);
SolveReport solve_dual(const Problem& p, const SolverConfig& cfg);

/// Quadratic perturbation: alternates the dual solve of
/// Xi + 1/2 delta_k ||chi - chi_k||^2 with the anchor update chi_{k+1} = chi-bar
/// (sign-rounded on integer coordinates). Returns the unperturbed solve when it
/// is already certified or when delta0 = 0.
SolveReport perturbed_solve(const DualLayout& layout, const SolverConfig& cfg);
SolveReport perturbed_solve(const Problem& p, const SolverConfig& cfg);

struct ExistenceResult {
  bool interior_nonempty = false;
  Vector witness;  // best point found; G(witness) > 0 when interior_nonempty
  double lambda_min = 0.0;
};

/// Maximizes lambda_min(G(sigma)) over the dual domain (optionally narrowed by
/// `bounds`, one open interval per coordinate) by projected supergradient
/// ascent. A negative answer is heuristic.
ExistenceResult existence_check(const DualLayout& layout, const SolverConfig& cfg,
                                const std::optional<std::vector<DualInterval>>& bounds = std::nullopt);
ExistenceResult existence_check(const Problem& p, const SolverConfig& cfg,
                                const std::optional<std::vector<DualInterval>>& bounds = std::nullopt);

/// Real roots of (sigma / alpha + lambda) sigma^2 = 1/2 f_norm^2, descending,
/// repeated roots listed with multiplicity.
std::vector<double> solve_cubic_dual(double alpha, double lambda, double f_norm);

/// Stationary points of Pi^d anywhere in the open dual domain where G is
/// nonsingular, from cfg.sweep_starts seeded Newton starts; clustered at 1e-5.
std::vector<Vector> dual_critical_points(const DualLayout& layout, const SolverConfig& cfg);

struct SweepRow {
  double magnitude = 0.0;
  std::string outcome;  // Interior / Boundary / error code
  bool unique = false;
  std::size_t critical_points = 0;
  Vector sigma_bar;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::optional<double> threshold;  // smallest magnitude after which every row is unique
};

SweepResult fc_sweep(const Problem& tmpl, const Vector& direction, const std::vector<double>& grid,
                     const SolverConfig& cfg);

}  // namespace canondual
