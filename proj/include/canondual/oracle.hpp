#pragma once

#include "canondual/integer.hpp"
#include "canondual/linalg.hpp"
#include "canondual/model.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace canondual::oracle {

using ScalarField = std::function<double(const Vector&)>;
using VectorField = std::function<Vector(const Vector&)>;

struct OracleResult {
  Vector best_x;
  double best_value = 0.0;
  std::size_t samples = 0;
  std::string method;            // "enumeration", "grid", "multistart"
  std::vector<Vector> minima;    // grid: distinct points within 1e-6 of best_value; enumeration: best_x
};

/// Exact minimum of 1/2 x^T Q x - x^T f over {-1, 1}^n; ties go to the
/// lexicographically smallest x (-1 < 1). Throws TooLarge for n > 24.
OracleResult enumerate_signs(const QipInstance& inst, unsigned threads = 0);

struct Box {
  Vector lower;
  Vector upper;

  std::size_t n() const { return static_cast<std::size_t>(lower.size()); }
  Vector clamp(const Vector& x) const { return x.cwiseMax(lower).cwiseMin(upper); }
};

/// Full tensor grid with `grid_points` per axis when n <= 6, otherwise
/// `grid_points` seeded uniform samples; optionally refined by projected
/// gradient descent with Armijo backtracking (c = 1e-4) from the best samples.
OracleResult grid_multistart(const ScalarField& fun, const VectorField& grad, const Box& box,
                             std::size_t grid_points, bool local_refine, std::uint64_t seed,
                             unsigned threads = 0);
OracleResult grid_multistart(const Problem& p, const Box& box, std::size_t grid_points,
                             bool local_refine, std::uint64_t seed, unsigned threads = 0);

/// Central differences.
Vector fd_gradient(const ScalarField& fun, const Vector& x, double h = 1e-5);
/// Central differences of an analytic gradient, symmetrized.
Matrix fd_hessian(const VectorField& grad, const Vector& x, double h = 1e-5);
/// Second-order central differences of a scalar field.
Matrix fd_hessian(const ScalarField& fun, const Vector& x, double h = 1e-4);

struct LegendreReport {
  double max_residual = 0.0;  // max |Phi(xi) + Phi^*(sigma) - xi sigma| with sigma = Phi'(xi)
  double max_sup_gap = 0.0;   // max |Phi^*(sigma) - sup_grid [xi sigma - Phi(xi)]|
  std::size_t samples = 0;
};

/// Checks the closed-form conjugate of `t` against the Fenchel-Young equality
/// and a dense-grid supremum. Samples must lie in the domain of Phi.
LegendreReport legendre_check(const CanonicalTerm& t, const std::vector<double>& xi_samples);

}  // namespace canondual::oracle
