#include "canondual/oracle.hpp"

#include "canondual/error.hpp"
#include "canondual/parallel.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <random>

namespace canondual::oracle {

namespace {

constexpr std::size_t kMaxEnumerate = 24;
constexpr std::size_t kMaxGridDim = 6;
constexpr double kTieTol = 1e-12;
constexpr double kMinimaTol = 1e-6;

bool lex_less(const Vector& a, const Vector& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a(i) != b(i)) return a(i) < b(i);
  }
  return false;
}

struct Candidate {
  Vector x;
  double value = std::numeric_limits<double>::infinity();
};

bool better(const Candidate& a, const Candidate& b) {
  const double scale = kTieTol * (1.0 + std::abs(b.value));
  if (a.value < b.value - scale) return true;
  if (a.value > b.value + scale) return false;
  return b.x.size() == 0 || lex_less(a.x, b.x);
}

// Gray-code sweep of the sign vectors whose top `chunk_bits` bits equal `prefix`.
Candidate enumerate_chunk(const QipInstance& inst, std::uint64_t prefix, std::size_t free_bits) {
  const auto n = static_cast<Eigen::Index>(inst.n());
  Vector x(n);
  // bit i set <=> x_i = +1; coordinate 0 is the most significant for the lexicographic order
  auto bit_of = [&](Eigen::Index i) { return static_cast<std::size_t>(n - 1 - i); };
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::size_t b = bit_of(i);
    x(i) = (b >= free_bits && ((prefix >> (b - free_bits)) & 1U)) ? 1.0 : -1.0;
  }
  Vector qx = inst.Q * x;
  double value = 0.5 * x.dot(qx) - x.dot(inst.f);
  Candidate best{x, value};
  const std::uint64_t count = std::uint64_t{1} << free_bits;
  for (std::uint64_t k = 1; k < count; ++k) {
    const auto b = static_cast<std::size_t>(std::countr_zero(k));
    const Eigen::Index i = n - 1 - static_cast<Eigen::Index>(b);
    const double old = x(i);
    const double d = -2.0 * old;
    // 1/2 (x + d e_i)^T Q (x + d e_i) - (x + d e_i)^T f
    value += d * qx(i) + 0.5 * d * d * inst.Q(i, i) - d * inst.f(i);
    qx += d * inst.Q.col(i);
    x(i) = -old;
    if (value <= best.value + kTieTol * (1.0 + std::abs(best.value))) {
      // re-evaluate exactly before comparing to avoid drift from the update
      Candidate c{x, inst.objective(x)};
      if (better(c, best)) best = std::move(c);
    }
  }
  best.value = inst.objective(best.x);
  return best;
}

Candidate refine(const ScalarField& fun, const VectorField& grad, const Box& box, Vector x) {
  double fx = fun(x);
  const double scale = 1.0 + (box.upper - box.lower).norm();
  for (int it = 0; it < 500; ++it) {
    const Vector g = grad(x);
    double t = scale / std::max(1.0, g.norm());
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
      const Vector cand = box.clamp(x - t * g);
      const Vector step = cand - x;
      if (step.norm() == 0.0) break;
      const double fc = fun(cand);
      // Armijo along the projected arc
      if (fc <= fx + 1e-4 * g.dot(step)) {
        moved = fc < fx;
        x = cand;
        fx = fc;
        break;
      }
    }
    if (!moved) break;
  }
  return {x, fx};
}

}  // namespace

OracleResult enumerate_signs(const QipInstance& inst, unsigned threads) {
  inst.validate();
  const std::size_t n = inst.n();
  if (n > kMaxEnumerate) {
    throw Error(ErrorCode::TooLarge, "enumerate_signs: n = " + std::to_string(n) + " exceeds 24");
  }
  const std::size_t chunk_bits = std::min<std::size_t>(n, n > 12 ? 6 : 0);
  const std::size_t free_bits = n - chunk_bits;
  const std::size_t chunks = std::size_t{1} << chunk_bits;
  std::vector<Candidate> part(chunks);
  parallel_for(chunks, threads, [&](std::size_t c) { part[c] = enumerate_chunk(inst, c, free_bits); });
  Candidate best;
  for (const auto& c : part) {
    if (better(c, best)) best = c;
  }
  OracleResult r;
  r.best_x = best.x;
  r.best_value = best.value;
  r.samples = std::size_t{1} << n;
  r.method = "enumeration";
  r.minima.push_back(best.x);
  return r;
}

OracleResult grid_multistart(const ScalarField& fun, const VectorField& grad, const Box& box,
                             std::size_t grid_points, bool local_refine, std::uint64_t seed,
                             unsigned threads) {
  const std::size_t n = box.n();
  if (n == 0 || static_cast<std::size_t>(box.upper.size()) != n) {
    throw Error(ErrorCode::DimensionMismatch, "grid_multistart: malformed box");
  }
  if (!(box.lower.array() <= box.upper.array()).all() || !box.lower.allFinite() || !box.upper.allFinite()) {
    throw Error(ErrorCode::DomainViolation, "grid_multistart: box needs finite lower <= upper");
  }
  if (grid_points < 1) throw Error(ErrorCode::DomainViolation, "grid_multistart: no samples");

  const bool full = n <= kMaxGridDim;
  std::size_t total = grid_points;
  if (full) {
    double t = std::pow(static_cast<double>(grid_points), static_cast<double>(n));
    if (t > 5e7) throw Error(ErrorCode::TooLarge, "grid_multistart: grid exceeds 5e7 points");
    total = static_cast<std::size_t>(t);
  }

  std::vector<Vector> pts;
  if (!full) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    pts.reserve(total);
    for (std::size_t k = 0; k < total; ++k) {
      Vector x(static_cast<Eigen::Index>(n));
      for (std::size_t i = 0; i < n; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        x(ii) = box.lower(ii) + u(rng) * (box.upper(ii) - box.lower(ii));
      }
      pts.push_back(std::move(x));
    }
  }
  auto point = [&](std::size_t k) {
    if (!full) return pts[k];
    Vector x(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      const std::size_t j = k % grid_points;
      k /= grid_points;
      x(ii) = grid_points == 1 ? 0.5 * (box.lower(ii) + box.upper(ii))
                               : box.lower(ii) + (box.upper(ii) - box.lower(ii)) * static_cast<double>(j) /
                                                     static_cast<double>(grid_points - 1);
    }
    return x;
  };

  std::vector<double> values(total);
  parallel_for(total, threads, [&](std::size_t k) {
    double v = fun(point(k));
    values[k] = std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  });

  // grid-local minima (or the best samples) seed the refinement
  std::vector<std::size_t> order(total);
  for (std::size_t k = 0; k < total; ++k) order[k] = k;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

  std::vector<Candidate> cands;
  const std::size_t seeds = std::min<std::size_t>(total, local_refine ? 16 : 1);
  for (std::size_t s = 0; s < total && cands.size() < seeds; ++s) {
    Vector x = point(order[s]);
    bool near = false;
    const double sep = 0.05 * (box.upper - box.lower).norm();
    for (const auto& c : cands) near = near || (c.x - x).norm() < sep;
    if (!near) cands.push_back({std::move(x), values[order[s]]});
  }
  if (local_refine) {
    std::vector<Candidate> refined(cands.size());
    parallel_for(cands.size(), threads, [&](std::size_t i) { refined[i] = refine(fun, grad, box, cands[i].x); });
    for (std::size_t i = 0; i < cands.size(); ++i) {
      if (refined[i].value <= cands[i].value) cands[i] = refined[i];
    }
  }
  Candidate best;
  for (const auto& c : cands) {
    if (better(c, best)) best = c;
  }
  OracleResult r;
  r.best_x = best.x;
  r.best_value = best.value;
  r.samples = total;
  r.method = full ? "grid" : "multistart";
  std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) { return lex_less(a.x, b.x); });
  for (const auto& c : cands) {
    if (c.value > best.value + kMinimaTol * (1.0 + std::abs(best.value))) continue;
    bool seen = false;
    for (const auto& m : r.minima) seen = seen || (m - c.x).norm() < 1e-3;
    if (!seen) r.minima.push_back(c.x);
  }
  return r;
}

OracleResult grid_multistart(const Problem& p, const Box& box, std::size_t grid_points,
                             bool local_refine, std::uint64_t seed, unsigned threads) {
  if (box.n() != p.n()) throw Error(ErrorCode::DimensionMismatch, "grid_multistart: box dimension");
  auto fun = [&](const Vector& x) {
    try {
      return eval_primal(p, x);
    } catch (const Error&) {
      return std::numeric_limits<double>::infinity();
    }
  };
  auto grad = [&](const Vector& x) { return primal_gradient(p, x); };
  OracleResult r = grid_multistart(fun, grad, box, grid_points, local_refine, seed, threads);
  r.best_value = eval_primal(p, r.best_x);
  return r;
}

Vector fd_gradient(const ScalarField& fun, const Vector& x, double h) {
  Vector g(x.size());
  Vector y = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    y(i) = x(i) + h;
    const double up = fun(y);
    y(i) = x(i) - h;
    const double down = fun(y);
    y(i) = x(i);
    g(i) = (up - down) / (2.0 * h);
  }
  return g;
}

Matrix fd_hessian(const VectorField& grad, const Vector& x, double h) {
  const auto n = x.size();
  Matrix hm(n, n);
  Vector y = x;
  for (Eigen::Index i = 0; i < n; ++i) {
    y(i) = x(i) + h;
    const Vector up = grad(y);
    y(i) = x(i) - h;
    const Vector down = grad(y);
    y(i) = x(i);
    hm.col(i) = (up - down) / (2.0 * h);
  }
  return 0.5 * (hm + hm.transpose());
}

Matrix fd_hessian(const ScalarField& fun, const Vector& x, double h) {
  const auto n = x.size();
  Matrix hm(n, n);
  const double f0 = fun(x);
  Vector y = x;
  for (Eigen::Index i = 0; i < n; ++i) {
    y(i) = x(i) + h;
    const double up = fun(y);
    y(i) = x(i) - h;
    const double down = fun(y);
    y(i) = x(i);
    hm(i, i) = (up - 2.0 * f0 + down) / (h * h);
    for (Eigen::Index j = 0; j < i; ++j) {
      auto at = [&](double si, double sj) {
        Vector z = x;
        z(i) += si * h;
        z(j) += sj * h;
        return fun(z);
      };
      hm(i, j) = hm(j, i) = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * h * h);
    }
  }
  return hm;
}

LegendreReport legendre_check(const CanonicalTerm& t, const std::vector<double>& xi_samples) {
  LegendreReport rep;
  rep.samples = xi_samples.size();
  if (xi_samples.empty()) return rep;
  const bool positive_xi = t.kind() == TermKind::XLogX;
  auto conj = [&](double s) { return t.has_dual_coordinate() ? t.conj_value(s) : 0.0; };

  const auto [mn, mx] = std::minmax_element(xi_samples.begin(), xi_samples.end());
  const double spread = 1.0 + (*mx - *mn);
  double lo = *mn - spread;
  const double hi = *mx + spread;
  if (positive_xi) lo = std::max(lo, 0.0);
  constexpr int kGrid = 20001;
  const double step = (hi - lo) / (kGrid - 1);

  for (double xi : xi_samples) {
    if (positive_xi && !(xi > 0.0)) {
      throw Error(ErrorCode::DomainViolation, "legendre_check: xlogx needs xi > 0");
    }
    const double s = t.phi_prime(xi);
    rep.max_residual = std::max(rep.max_residual, std::abs(t.phi(xi) + conj(s) - xi * s));

    // sup over the grid, then golden-section refinement inside the best cell
    auto obj = [&](double z) { return z * s - t.phi(z); };
    int best = 0;
    double best_v = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < kGrid; ++k) {
      const double v = obj(lo + step * k);
      if (v > best_v) {
        best_v = v;
        best = k;
      }
    }
    double a = std::max(lo, lo + step * (best - 1));
    double b = std::min(hi, lo + step * (best + 1));
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int it = 0; it < 100 && b - a > 1e-15 * (1.0 + std::abs(a)); ++it) {
      const double c = b - gr * (b - a);
      const double d = a + gr * (b - a);
      if (obj(c) > obj(d)) {
        b = d;
      } else {
        a = c;
      }
    }
    best_v = std::max(best_v, obj(0.5 * (a + b)));
    rep.max_sup_gap = std::max(rep.max_sup_gap, std::abs(conj(s) - best_v));
  }
  return rep;
}

}  // namespace canondual::oracle
