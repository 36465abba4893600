#pragma once

#include "canondual/linalg.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace canondual::lp {

enum class Sense { LessEqual, GreaterEqual, Equal };

/// min c^T x  s.t.  A x (sense) b,  lower <= x <= upper (bounds may be infinite).
struct LinearProgram {
  std::vector<std::string> names;
  Vector c;
  Matrix A;  // rows x names.size()
  Vector b;
  std::vector<Sense> sense;
  std::vector<std::string> row_names;
  Vector lower;
  Vector upper;

  std::size_t num_vars() const { return names.size(); }
  std::size_t num_rows() const { return sense.size(); }
  void validate() const;
  bool operator==(const LinearProgram& o) const;
};

struct LpSolution {
  Vector x;
  double value = 0.0;
  int pivots = 0;
};

/// Dense two-phase simplex with Bland's rule. Throws Infeasible or Unbounded.
LpSolution solve(const LinearProgram& lp);

/// CPLEX-style LP text (Minimize / Subject To / Bounds / End), numbers with 17
/// significant digits, one line per row. Deterministic.
std::string write_text(const LinearProgram& lp);

/// Inverse of write_text. Throws ParseError.
LinearProgram parse_text(std::string_view text);

/// %.17g
std::string format_number(double v);

}  // namespace canondual::lp
