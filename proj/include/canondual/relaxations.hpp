#pragma once

#include "canondual/dual.hpp"
#include "canondual/integer.hpp"
#include "canondual/lp.hpp"
#include "canondual/model.hpp"
#include "canondual/solver.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace canondual {

/// min g + sum Phi^*(sigma)  s.t.  [[G(sigma), f], [f^T, 2g]] >= 0, sigma in the dual domain.
/// The optimal value equals offset - max Pi^d.
struct SdpProblem {
  DualLayout layout;

  std::size_t n() const { return layout.primal_dim(); }
  std::size_t dual_dim() const { return layout.dual_dim(); }
  Matrix block(const Vector& sigma, double g) const;
  double objective(const Vector& sigma, double g) const;
  /// Smallest feasible g at sigma: 1/2 f^T G^+ f.
  double min_g(const Vector& sigma) const;
};

SdpProblem build_sdp(const Problem& p);
SdpProblem build_sdp(const QipInstance& inst);

struct SdpSolution {
  Vector sigma;
  double g = 0.0;
  double value = 0.0;  // g + sum Phi^*(sigma)
  bool block_psd = false;
};

/// Solves the SDP through its equivalent canonical dual and returns the SDP-form point.
SdpSolution solve_sdp_via_dual(const SdpProblem& sdp, const SolverConfig& cfg);

/// G >= -tol, ||f - G G^+ f|| <= tol and 2g >= f^T G^+ f - tol.
bool schur_psd_check(const Matrix& g_mat, const Vector& f, double g, double tol);
/// Smallest eigenvalue of [[G, f], [f^T, 2g]] >= -tol.
bool block_psd_check(const Matrix& g_mat, const Vector& f, double g, double tol);

/// SDPA sparse data: min c^T y  s.t.  sum_i F_i y_i - F_0 >= 0.
struct SdpaEntry {
  int matrix;  // 0 for F_0
  int block;   // 1-based
  int i;       // 1-based, i <= j
  int j;
  double value;
  bool operator==(const SdpaEntry&) const = default;
};

struct SdpaData {
  std::string comment;
  int num_vars = 0;
  std::vector<int> block_sizes;  // negative: diagonal block
  Vector c;
  std::vector<SdpaEntry> entries;
  std::vector<std::string> var_names;  // sigma_s, g, t_j; carried in the comment header
  bool operator==(const SdpaData& o) const;
};

/// Variables (sigma, g, t): one (n+1)-block, a 2x2 epigraph block
/// [[2 alpha, sigma], [sigma, t]] per quartic coordinate, and a diagonal block of
/// domain constraints. Throws UnsupportedTerm for Exponential, XLogX or
/// quartic alpha < 0.
SdpaData to_sdpa(const SdpProblem& sdp);
std::string write_sdpa(const SdpaData& data);
SdpaData parse_sdpa(std::string_view text);
void export_sdp(const SdpProblem& sdp, const std::string& path);

/// First-level RLT relaxation of min 1/2 x^T Q x - f^T x over a box (and
/// optional extra rows A x <= b, multiplied with the bound factors).
struct RltProblem {
  std::size_t n = 0;
  Matrix Q;
  Vector f;
  Vector lower;
  Vector upper;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // xi index -> (k, l), k <= l
  lp::LinearProgram lp;

  std::size_t xi_index(std::size_t k, std::size_t l) const;  // column of xi_kl in lp
};

RltProblem build_rlt(const Matrix& q, const Vector& f, const Vector& lower, const Vector& upper,
                     const Matrix& extra_a = Matrix(), const Vector& extra_b = Vector());

struct RltSolution {
  Vector x;
  Matrix xi;  // symmetric n x n
  double value = 0.0;
  double product_gap = 0.0;  // max |xi_kl - x_k x_l|
};

/// Guard n <= 10. Throws TooLarge, Infeasible, Unbounded.
RltSolution solve_lp_small(const RltProblem& rlt);

void export_rlt_lp(const RltProblem& rlt, const std::string& path);

}  // namespace canondual
