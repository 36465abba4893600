#include "canondual/lp.hpp"

#include "canondual/error.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <map>
#include <sstream>

namespace canondual::lp {

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxPivots = 200000;

enum class Status { Optimal, Unbounded };

// Tableau rows 0..m-1 are constraints, row m holds reduced costs; the last
// column is the right-hand side.
struct Tableau {
  Matrix t;
  std::vector<Eigen::Index> basis;
  int pivots = 0;

  Eigen::Index rows() const { return t.rows() - 1; }
  Eigen::Index cols() const { return t.cols() - 1; }

  void pivot(Eigen::Index r, Eigen::Index c) {
    t.row(r) /= t(r, c);
    for (Eigen::Index i = 0; i < t.rows(); ++i) {
      if (i != r && t(i, c) != 0.0) t.row(i) -= t(i, c) * t.row(r);
    }
    basis[static_cast<std::size_t>(r)] = c;
    ++pivots;
  }

  void price(const Vector& cost) {
    t.row(rows()).setZero();
    t.row(rows()).head(cost.size()) = cost.transpose();
    for (Eigen::Index i = 0; i < rows(); ++i) {
      const double cb = cost(basis[static_cast<std::size_t>(i)]);
      if (cb != 0.0) t.row(rows()) -= cb * t.row(i);
    }
  }

  // Bland: lowest-index improving column, lowest-index basic variable among ratio ties.
  Status run(Eigen::Index usable_cols) {
    for (;;) {
      if (pivots > kMaxPivots) throw Error(ErrorCode::MaxIterations, "simplex pivot limit");
      Eigen::Index enter = -1;
      for (Eigen::Index j = 0; j < usable_cols; ++j) {
        if (t(rows(), j) < -kPivotTol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return Status::Optimal;
      Eigen::Index leave = -1;
      double best = kInf;
      for (Eigen::Index i = 0; i < rows(); ++i) {
        const double a = t(i, enter);
        if (a <= kPivotTol) continue;
        const double ratio = t(i, cols()) / a;
        if (ratio < best - 1e-12 ||
            (ratio <= best + 1e-12 && leave >= 0 &&
             basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)])) {
          best = std::min(best, ratio);
          leave = i;
        }
      }
      if (leave < 0) return Status::Unbounded;
      pivot(leave, enter);
    }
  }
};

// Column map from the original variables to nonnegative simplex columns.
struct VarMap {
  enum class Kind { Shift, Mirror, Split };
  Kind kind;
  double anchor = 0.0;  // x = anchor + y (Shift), anchor - y (Mirror)
  Eigen::Index col = 0;
};

}  // namespace

void LinearProgram::validate() const {
  const auto n = static_cast<Eigen::Index>(names.size());
  if (c.size() != n || lower.size() != n || upper.size() != n || A.cols() != n ||
      A.rows() != static_cast<Eigen::Index>(sense.size()) || b.size() != A.rows() ||
      row_names.size() != sense.size()) {
    throw Error(ErrorCode::DimensionMismatch, "linear program: inconsistent sizes");
  }
  if (!c.allFinite() || !A.allFinite() || !b.allFinite()) {
    throw Error(ErrorCode::NonFinite, "linear program: non-finite data");
  }
}

bool LinearProgram::operator==(const LinearProgram& o) const {
  return names == o.names && c == o.c && A == o.A && b == o.b && sense == o.sense &&
         row_names == o.row_names && lower == o.lower && upper == o.upper;
}

LpSolution solve(const LinearProgram& lp) {
  lp.validate();
  const auto n = static_cast<Eigen::Index>(lp.num_vars());
  for (Eigen::Index j = 0; j < n; ++j) {
    if (lp.lower(j) > lp.upper(j)) throw Error(ErrorCode::Infeasible, "contradictory bounds on " + lp.names[j]);
  }

  // Substitute x_j by nonnegative columns; finite two-sided bounds become rows.
  std::vector<VarMap> map(static_cast<std::size_t>(n));
  Eigen::Index ncols = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    auto& v = map[j];
    if (std::isfinite(lp.lower(j))) {
      v = {VarMap::Kind::Shift, lp.lower(j), ncols++};
    } else if (std::isfinite(lp.upper(j))) {
      v = {VarMap::Kind::Mirror, lp.upper(j), ncols++};
    } else {
      v = {VarMap::Kind::Split, 0.0, ncols};
      ncols += 2;
    }
  }
  struct Row {
    Vector a;
    double b;
    Sense s;
  };
  std::vector<Row> rows;
  auto transform = [&](const Vector& a, double b, Sense s) {
    Row r{Vector::Zero(ncols), b, s};
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto& v = map[j];
      switch (v.kind) {
        case VarMap::Kind::Shift: r.a(v.col) += a(j); r.b -= a(j) * v.anchor; break;
        case VarMap::Kind::Mirror: r.a(v.col) -= a(j); r.b -= a(j) * v.anchor; break;
        case VarMap::Kind::Split: r.a(v.col) += a(j); r.a(v.col + 1) -= a(j); break;
      }
    }
    if (r.b < 0.0) {
      r.a = -r.a;
      r.b = -r.b;
      if (r.s == Sense::LessEqual) r.s = Sense::GreaterEqual;
      else if (r.s == Sense::GreaterEqual) r.s = Sense::LessEqual;
    }
    rows.push_back(std::move(r));
  };
  for (Eigen::Index i = 0; i < lp.A.rows(); ++i) {
    transform(lp.A.row(i).transpose(), lp.b(i), lp.sense[static_cast<std::size_t>(i)]);
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    if (map[j].kind == VarMap::Kind::Shift && std::isfinite(lp.upper(j))) {
      Vector e = Vector::Zero(n);
      e(j) = 1.0;
      transform(e, lp.upper(j), Sense::LessEqual);
    }
  }
  Vector cost = Vector::Zero(ncols);
  double cost0 = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto& v = map[j];
    switch (v.kind) {
      case VarMap::Kind::Shift: cost(v.col) += lp.c(j); cost0 += lp.c(j) * v.anchor; break;
      case VarMap::Kind::Mirror: cost(v.col) -= lp.c(j); cost0 += lp.c(j) * v.anchor; break;
      case VarMap::Kind::Split: cost(v.col) += lp.c(j); cost(v.col + 1) -= lp.c(j); break;
    }
  }

  const auto m = static_cast<Eigen::Index>(rows.size());
  Eigen::Index nslack = 0, nart = 0;
  for (const auto& r : rows) {
    if (r.s != Sense::Equal) ++nslack;
    if (r.s != Sense::LessEqual) ++nart;
  }
  const Eigen::Index total = ncols + nslack + nart;
  Tableau tab;
  tab.t = Matrix::Zero(m + 1, total + 1);
  tab.basis.resize(static_cast<std::size_t>(m));
  Eigen::Index sc = ncols, ac = ncols + nslack;
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& r = rows[static_cast<std::size_t>(i)];
    tab.t.row(i).head(ncols) = r.a.transpose();
    tab.t(i, total) = r.b;
    if (r.s == Sense::LessEqual) {
      tab.t(i, sc) = 1.0;
      tab.basis[i] = sc++;
    } else {
      if (r.s == Sense::GreaterEqual) tab.t(i, sc++) = -1.0;
      tab.t(i, ac) = 1.0;
      tab.basis[i] = ac++;
    }
  }

  if (nart > 0) {
    Vector phase1 = Vector::Zero(total);
    phase1.tail(nart).setOnes();
    tab.price(phase1);
    tab.run(total);
    if (-tab.t(m, total) > 1e-7 * (1.0 + tab.t.col(total).head(m).cwiseAbs().maxCoeff())) {
      throw Error(ErrorCode::Infeasible, "linear program is infeasible");
    }
    // drive remaining artificials out of the basis
    for (Eigen::Index i = 0; i < m; ++i) {
      if (tab.basis[i] < ncols + nslack) continue;
      for (Eigen::Index j = 0; j < ncols + nslack; ++j) {
        if (std::abs(tab.t(i, j)) > kPivotTol) {
          tab.pivot(i, j);
          break;
        }
      }
    }
    // redundant rows keep an artificial at zero level; zero its column entries
    for (Eigen::Index i = 0; i < m; ++i) {
      if (tab.basis[i] >= ncols + nslack) tab.t.row(i).head(ncols + nslack).setZero();
    }
  }
  Vector full_cost = Vector::Zero(total);
  full_cost.head(ncols) = cost;
  tab.price(full_cost);
  if (tab.run(ncols + nslack) == Status::Unbounded) {
    throw Error(ErrorCode::Unbounded, "linear program is unbounded");
  }

  Vector y = Vector::Zero(total);
  for (Eigen::Index i = 0; i < m; ++i) y(tab.basis[i]) = tab.t(i, total);
  LpSolution sol;
  sol.x.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto& v = map[j];
    switch (v.kind) {
      case VarMap::Kind::Shift: sol.x(j) = v.anchor + y(v.col); break;
      case VarMap::Kind::Mirror: sol.x(j) = v.anchor - y(v.col); break;
      case VarMap::Kind::Split: sol.x(j) = y(v.col) - y(v.col + 1); break;
    }
  }
  sol.value = lp.c.dot(sol.x);
  sol.pivots = tab.pivots;
  (void)cost0;
  return sol;
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

void write_expr(std::ostringstream& os, const std::vector<std::string>& names, const Vector& coef) {
  bool first = true;
  for (Eigen::Index j = 0; j < coef.size(); ++j) {
    const double v = coef(j);
    if (v == 0.0) continue;
    os << ' ' << (std::signbit(v) ? '-' : '+') << ' ' << format_number(std::abs(v)) << ' '
       << names[static_cast<std::size_t>(j)];
    first = false;
  }
  (void)first;
}

[[noreturn]] void parse_error(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + what);
}

double parse_number(const std::string& tok, std::size_t line) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (tok.empty() || end != tok.c_str() + tok.size()) parse_error(line, "bad number '" + tok + "'");
  return v;
}

std::vector<std::string> tokens(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  for (std::string t; is >> t;) out.push_back(t);
  return out;
}

}  // namespace

std::string write_text(const LinearProgram& lp) {
  lp.validate();
  std::ostringstream os;
  os << "\\ variables:";
  for (const auto& name : lp.names) os << ' ' << name;
  os << "\nMinimize\n obj:";
  write_expr(os, lp.names, lp.c);
  os << "\nSubject To\n";
  for (std::size_t i = 0; i < lp.num_rows(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    os << ' ' << lp.row_names[i] << ':';
    write_expr(os, lp.names, lp.A.row(ii).transpose());
    const char* op = lp.sense[i] == Sense::LessEqual ? "<=" : lp.sense[i] == Sense::GreaterEqual ? ">=" : "=";
    os << ' ' << op << ' ' << format_number(lp.b(ii)) << '\n';
  }
  os << "Bounds\n";
  for (std::size_t j = 0; j < lp.num_vars(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    os << ' ' << format_number(lp.lower(jj)) << " <= " << lp.names[j] << " <= " << format_number(lp.upper(jj))
       << '\n';
  }
  os << "End\n";
  return os.str();
}

LinearProgram parse_text(std::string_view text) {
  std::istringstream is{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  LinearProgram lp;
  std::map<std::string, Eigen::Index> index;

  auto next = [&]() {
    while (std::getline(is, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return true;
    }
    return false;
  };
  if (!next() || line.rfind("\\ variables:", 0) != 0) parse_error(lineno, "missing variable header");
  for (const auto& t : tokens(line.substr(12))) {
    if (index.count(t)) parse_error(lineno, "duplicate variable " + t);
    index[t] = static_cast<Eigen::Index>(lp.names.size());
    lp.names.push_back(t);
  }
  const auto n = static_cast<Eigen::Index>(lp.names.size());

  auto parse_expr = [&](const std::vector<std::string>& tok, std::size_t from, std::size_t to) {
    Vector coef = Vector::Zero(n);
    if ((to - from) % 3 != 0) parse_error(lineno, "malformed linear expression");
    for (std::size_t k = from; k < to; k += 3) {
      if (tok[k] != "+" && tok[k] != "-") parse_error(lineno, "expected sign");
      double v = parse_number(tok[k + 1], lineno);
      if (tok[k] == "-") v = -v;
      auto it = index.find(tok[k + 2]);
      if (it == index.end()) parse_error(lineno, "unknown variable " + tok[k + 2]);
      coef(it->second) += v;
    }
    return coef;
  };

  if (!next() || line != "Minimize") parse_error(lineno, "expected Minimize");
  if (!next()) parse_error(lineno, "missing objective");
  {
    const auto tok = tokens(line);
    if (tok.empty() || tok[0] != "obj:") parse_error(lineno, "expected 'obj:'");
    lp.c = parse_expr(tok, 1, tok.size());
  }
  if (!next() || line != "Subject To") parse_error(lineno, "expected Subject To");
  std::vector<Vector> rows;
  std::vector<double> rhs;
  while (next() && line != "Bounds") {
    const auto tok = tokens(line);
    if (tok.size() < 3 || tok[0].back() != ':') parse_error(lineno, "malformed constraint");
    lp.row_names.push_back(tok[0].substr(0, tok[0].size() - 1));
    const std::string& op = tok[tok.size() - 2];
    if (op == "<=") lp.sense.push_back(Sense::LessEqual);
    else if (op == ">=") lp.sense.push_back(Sense::GreaterEqual);
    else if (op == "=") lp.sense.push_back(Sense::Equal);
    else parse_error(lineno, "expected <=, >= or =");
    rows.push_back(parse_expr(tok, 1, tok.size() - 2));
    rhs.push_back(parse_number(tok.back(), lineno));
  }
  if (line != "Bounds") parse_error(lineno, "expected Bounds");
  lp.A = Matrix::Zero(static_cast<Eigen::Index>(rows.size()), n);
  lp.b.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    lp.A.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
    lp.b(static_cast<Eigen::Index>(i)) = rhs[i];
  }
  lp.lower = Vector::Constant(n, -kInf);
  lp.upper = Vector::Constant(n, kInf);
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  while (next() && line != "End") {
    const auto tok = tokens(line);
    if (tok.size() != 5 || tok[1] != "<=" || tok[3] != "<=") parse_error(lineno, "malformed bound");
    auto it = index.find(tok[2]);
    if (it == index.end()) parse_error(lineno, "unknown variable " + tok[2]);
    lp.lower(it->second) = parse_number(tok[0], lineno);
    lp.upper(it->second) = parse_number(tok[4], lineno);
    seen[static_cast<std::size_t>(it->second)] = true;
  }
  if (line != "End") parse_error(lineno, "expected End");
  for (Eigen::Index j = 0; j < n; ++j) {
    if (!seen[static_cast<std::size_t>(j)]) parse_error(lineno, "no bounds for " + lp.names[j]);
  }
  return lp;
}

}  // namespace canondual::lp
