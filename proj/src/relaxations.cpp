#include "canondual/relaxations.hpp"

#include "canondual/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace canondual {

namespace {

constexpr std::size_t kMaxRltDim = 10;
constexpr std::size_t kMaxRltRows = 5000;

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::SchemaError, "cannot open " + path + " for writing");
  out << text;
  if (!out) throw Error(ErrorCode::SchemaError, "write to " + path + " failed");
}

[[noreturn]] void parse_error(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::ParseError, "sdpa line " + std::to_string(line) + ": " + what);
}

}  // namespace

Matrix SdpProblem::block(const Vector& sigma, double g) const {
  const auto n = static_cast<Eigen::Index>(this->n());
  Matrix b(n + 1, n + 1);
  b.topLeftCorner(n, n) = layout.assemble(sigma);
  b.topRightCorner(n, 1) = layout.f();
  b.bottomLeftCorner(1, n) = layout.f().transpose();
  b(n, n) = 2.0 * g;
  return b;
}

double SdpProblem::objective(const Vector& sigma, double g) const { return g + layout.conj_total(sigma); }

double SdpProblem::min_g(const Vector& sigma) const {
  const Recovery r = recover_x(layout, sigma);
  return 0.5 * layout.f().dot(r.x);
}

SdpProblem build_sdp(const Problem& p) { return SdpProblem{DualLayout::from_problem(p)}; }

SdpProblem build_sdp(const QipInstance& inst) {
  inst.validate();
  return SdpProblem{DualLayout::sign_quadratic(inst.Q, inst.f)};
}

SdpSolution solve_sdp_via_dual(const SdpProblem& sdp, const SolverConfig& cfg) {
  const SolveReport r = solve_dual(sdp.layout, cfg);
  SdpSolution s;
  s.sigma = r.sigma_bar;
  s.g = 0.5 * sdp.layout.f().dot(r.x_bar);
  s.value = sdp.objective(s.sigma, s.g);
  const Matrix g = sdp.layout.assemble(s.sigma);
  s.block_psd = schur_psd_check(g, sdp.layout.f(), s.g, boundary_tolerance(g));
  return s;
}

bool schur_psd_check(const Matrix& g_mat, const Vector& f, double g, double tol) {
  if (g_mat.rows() != f.size()) throw Error(ErrorCode::DimensionMismatch, "schur_psd_check: sizes");
  const auto dec = linalg::eigh(g_mat);
  if (dec.eigvals.size() && dec.eigvals(0) < -tol) return false;
  const Matrix gp = linalg::pinv_absolute(dec, tol);
  const Vector x = gp * f;
  if ((g_mat * x - f).norm() > tol) return false;
  return 2.0 * g >= f.dot(x) - tol;
}

bool block_psd_check(const Matrix& g_mat, const Vector& f, double g, double tol) {
  const auto n = g_mat.rows();
  if (n != f.size()) throw Error(ErrorCode::DimensionMismatch, "block_psd_check: sizes");
  Matrix b(n + 1, n + 1);
  b.topLeftCorner(n, n) = g_mat;
  b.topRightCorner(n, 1) = f;
  b.bottomLeftCorner(1, n) = f.transpose();
  b(n, n) = 2.0 * g;
  return linalg::eigh(b).eigvals(0) >= -tol;
}

bool SdpaData::operator==(const SdpaData& o) const {
  return comment == o.comment && num_vars == o.num_vars && block_sizes == o.block_sizes && c == o.c &&
         entries == o.entries && var_names == o.var_names;
}

SdpaData to_sdpa(const SdpProblem& sdp) {
  const auto& L = sdp.layout;
  const auto& coords = L.coords();
  const int n = static_cast<int>(L.primal_dim());
  const int m = static_cast<int>(coords.size());

  std::vector<int> quartic;
  for (int s = 0; s < m; ++s) {
    const auto& c = coords[static_cast<std::size_t>(s)];
    if (c.kind == DualKind::Exponential || c.kind == DualKind::XLogX) {
      throw Error(ErrorCode::UnsupportedTerm,
                  std::string(to_string(c.kind)) + " conjugate is not SDP-representable");
    }
    if (c.kind == DualKind::Quartic) {
      if (!(c.alpha > 0)) throw Error(ErrorCode::UnsupportedTerm, "quartic with alpha < 0 has a concave conjugate");
      quartic.push_back(s);
    }
  }

  SdpaData d;
  for (int s = 0; s < m; ++s) d.var_names.push_back("sigma_" + std::to_string(s));
  d.var_names.push_back("g");
  for (std::size_t j = 0; j < quartic.size(); ++j) d.var_names.push_back("t_" + std::to_string(j));
  d.num_vars = static_cast<int>(d.var_names.size());
  d.comment = "canondual sdp; objective constant " + lp::format_number(L.offset());
  const int g_var = m + 1;

  d.c = Vector::Zero(d.num_vars);
  d.c(g_var - 1) = 1.0;
  for (int s = 0; s < m; ++s) {
    const auto& c = coords[static_cast<std::size_t>(s)];
    if (c.kind == DualKind::SignRelaxation) d.c(s) = 1.0;
    if (c.kind == DualKind::Quartic) d.c(s) = -c.beta;
  }

  auto add = [&](int mat, int blk, int i, int j, double v) {
    if (v == 0.0) return;
    if (i > j) std::swap(i, j);
    d.entries.push_back({mat, blk, i, j, v});
  };

  // block 1: [[G(sigma), f], [f^T, 2g]]
  d.block_sizes.push_back(n + 1);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) add(0, 1, i + 1, j + 1, -L.base()(i, j));
    add(0, 1, i + 1, n + 1, -L.f()(i));
  }
  for (int s = 0; s < m; ++s) {
    const Matrix& q = coords[static_cast<std::size_t>(s)].q;
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) add(s + 1, 1, i + 1, j + 1, q(i, j));
    }
  }
  add(g_var, 1, n + 1, n + 1, 2.0);

  // epigraph blocks t_j >= sigma^2 / (2 alpha)
  for (std::size_t j = 0; j < quartic.size(); ++j) {
    const int blk = static_cast<int>(d.block_sizes.size()) + 1;
    d.block_sizes.push_back(2);
    const auto& c = coords[static_cast<std::size_t>(quartic[j])];
    add(0, blk, 1, 1, -2.0 * c.alpha);
    add(quartic[j] + 1, blk, 1, 2, 1.0);
    add(g_var + 1 + static_cast<int>(j), blk, 2, 2, 1.0);
  }

  // domain constraints as a diagonal block
  std::vector<SdpaEntry> diag;
  int rows = 0;
  const int dblk = static_cast<int>(d.block_sizes.size()) + 1;
  for (int s = 0; s < m; ++s) {
    const auto dom = coords[static_cast<std::size_t>(s)].domain();
    if (std::isfinite(dom.lower)) {
      ++rows;
      diag.push_back({s + 1, dblk, rows, rows, 1.0});
      if (dom.lower != 0.0) diag.push_back({0, dblk, rows, rows, dom.lower});
    }
    if (std::isfinite(dom.upper)) {
      ++rows;
      diag.push_back({s + 1, dblk, rows, rows, -1.0});
      if (dom.upper != 0.0) diag.push_back({0, dblk, rows, rows, -dom.upper});
    }
  }
  if (rows > 0) {
    d.block_sizes.push_back(-rows);
    d.entries.insert(d.entries.end(), diag.begin(), diag.end());
  }
  std::sort(d.entries.begin(), d.entries.end(), [](const SdpaEntry& a, const SdpaEntry& b) {
    return std::tie(a.matrix, a.block, a.i, a.j) < std::tie(b.matrix, b.block, b.i, b.j);
  });
  return d;
}

std::string write_sdpa(const SdpaData& d) {
  std::ostringstream os;
  os << "* " << d.comment << '\n';
  os << "* variables:";
  for (const auto& v : d.var_names) os << ' ' << v;
  os << '\n' << d.num_vars << '\n' << d.block_sizes.size() << '\n';
  for (std::size_t b = 0; b < d.block_sizes.size(); ++b) os << (b ? " " : "") << d.block_sizes[b];
  os << '\n';
  for (Eigen::Index i = 0; i < d.c.size(); ++i) os << (i ? " " : "") << lp::format_number(d.c(i));
  os << '\n';
  for (const auto& e : d.entries) {
    os << e.matrix << ' ' << e.block << ' ' << e.i << ' ' << e.j << ' ' << lp::format_number(e.value) << '\n';
  }
  return os.str();
}

SdpaData parse_sdpa(std::string_view text) {
  std::istringstream is{std::string(text)};
  SdpaData d;
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> data;
  std::vector<std::size_t> data_line;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty() && (line[0] == '*' || line[0] == '"')) {
      std::string body = line.substr(line.size() > 1 && line[1] == ' ' ? 2 : 1);
      if (body.rfind("variables:", 0) == 0) {
        std::istringstream vs(body.substr(10));
        for (std::string v; vs >> v;) d.var_names.push_back(v);
      } else if (d.comment.empty()) {
        d.comment = body;
      }
      continue;
    }
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    data.push_back(line);
    data_line.push_back(lineno);
  }
  if (data.size() < 4) parse_error(lineno, "truncated header");
  auto ints = [&](std::size_t k) {
    std::istringstream ls(data[k]);
    std::vector<long> out;
    for (std::string t; ls >> t;) {
      // SDPA allows punctuation between block sizes
      t.erase(std::remove_if(t.begin(), t.end(), [](char ch) { return ch == ',' || ch == '{' || ch == '}' || ch == '(' || ch == ')'; }), t.end());
      if (t.empty()) continue;
      char* end = nullptr;
      const long v = std::strtol(t.c_str(), &end, 10);
      if (*end != '\0') parse_error(data_line[k], "expected an integer, got '" + t + "'");
      out.push_back(v);
    }
    return out;
  };
  const auto mv = ints(0);
  const auto nb = ints(1);
  if (mv.size() != 1 || nb.size() != 1 || mv[0] < 0 || nb[0] < 0) parse_error(data_line[0], "bad counts");
  d.num_vars = static_cast<int>(mv[0]);
  for (long b : ints(2)) d.block_sizes.push_back(static_cast<int>(b));
  if (static_cast<long>(d.block_sizes.size()) != nb[0]) parse_error(data_line[2], "block count mismatch");
  {
    std::istringstream cs(data[3]);
    std::vector<double> c;
    for (std::string t; cs >> t;) {
      t.erase(std::remove_if(t.begin(), t.end(), [](char ch) { return ch == ',' || ch == '{' || ch == '}'; }), t.end());
      if (t.empty()) continue;
      char* end = nullptr;
      c.push_back(std::strtod(t.c_str(), &end));
      if (*end != '\0') parse_error(data_line[3], "bad number '" + t + "'");
    }
    if (static_cast<int>(c.size()) != d.num_vars) parse_error(data_line[3], "objective length mismatch");
    d.c = Eigen::Map<Vector>(c.data(), static_cast<Eigen::Index>(c.size()));
  }
  for (std::size_t k = 4; k < data.size(); ++k) {
    std::istringstream es(data[k]);
    SdpaEntry e{};
    std::string vs;
    if (!(es >> e.matrix >> e.block >> e.i >> e.j >> vs)) parse_error(data_line[k], "malformed entry");
    char* end = nullptr;
    e.value = std::strtod(vs.c_str(), &end);
    if (*end != '\0') parse_error(data_line[k], "bad number '" + vs + "'");
    if (e.matrix < 0 || e.matrix > d.num_vars || e.block < 1 ||
        e.block > static_cast<int>(d.block_sizes.size())) {
      parse_error(data_line[k], "entry index out of range");
    }
    const int size = std::abs(d.block_sizes[static_cast<std::size_t>(e.block - 1)]);
    if (e.i < 1 || e.j < 1 || e.i > size || e.j > size) parse_error(data_line[k], "entry outside its block");
    d.entries.push_back(e);
  }
  return d;
}

void export_sdp(const SdpProblem& sdp, const std::string& path) { write_file(path, write_sdpa(to_sdpa(sdp))); }

std::size_t RltProblem::xi_index(std::size_t k, std::size_t l) const {
  if (k > l) std::swap(k, l);
  // columns: x_0..x_{n-1}, then xi_kl for k <= l in row-major order
  return n + k * n - k * (k + 1) / 2 + l;
}

RltProblem build_rlt(const Matrix& q, const Vector& f, const Vector& lower, const Vector& upper,
                     const Matrix& extra_a, const Vector& extra_b) {
  linalg::require_symmetric(q);
  const auto n = static_cast<std::size_t>(f.size());
  const auto nn = static_cast<Eigen::Index>(n);
  if (q.rows() != nn || lower.size() != nn || upper.size() != nn) {
    throw Error(ErrorCode::DimensionMismatch, "build_rlt: sizes of Q, f and the box differ");
  }
  if (!lower.allFinite() || !upper.allFinite()) throw Error(ErrorCode::DomainViolation, "build_rlt needs a finite box");
  if (extra_a.rows() != extra_b.size() || (extra_a.rows() > 0 && extra_a.cols() != nn)) {
    throw Error(ErrorCode::DimensionMismatch, "build_rlt: extra rows have the wrong shape");
  }

  RltProblem r;
  r.n = n;
  r.Q = q;
  r.f = f;
  r.lower = lower;
  r.upper = upper;
  auto& lpp = r.lp;
  for (std::size_t k = 0; k < n; ++k) lpp.names.push_back("x_" + std::to_string(k));
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t l = k; l < n; ++l) {
      r.pairs.emplace_back(k, l);
      lpp.names.push_back("xi_" + std::to_string(k) + "_" + std::to_string(l));
    }
  }
  const auto nv = static_cast<Eigen::Index>(lpp.names.size());
  lpp.c = Vector::Zero(nv);
  lpp.lower.resize(nv);
  lpp.upper.resize(nv);
  for (std::size_t k = 0; k < n; ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    lpp.c(kk) = -f(kk);
    lpp.lower(kk) = lower(kk);
    lpp.upper(kk) = upper(kk);
  }
  for (const auto& [k, l] : r.pairs) {
    const auto kk = static_cast<Eigen::Index>(k), ll = static_cast<Eigen::Index>(l);
    const auto col = static_cast<Eigen::Index>(r.xi_index(k, l));
    lpp.c(col) = k == l ? 0.5 * q(kk, kk) : q(kk, ll);
    const double corners[4] = {lower(kk) * lower(ll), lower(kk) * upper(ll), upper(kk) * lower(ll),
                               upper(kk) * upper(ll)};
    double lo = *std::min_element(corners, corners + 4);
    const double hi = *std::max_element(corners, corners + 4);
    if (k == l && lower(kk) <= 0.0 && upper(kk) >= 0.0) lo = 0.0;
    lpp.lower(col) = lo;
    lpp.upper(col) = hi;
  }

  std::vector<Vector> rows;
  std::vector<double> rhs;
  std::vector<lp::Sense> sense;
  std::vector<std::string> names;
  auto push = [&](Vector a, double b, lp::Sense s, std::string name) {
    if (rows.size() >= kMaxRltRows) throw Error(ErrorCode::TooLarge, "build_rlt: more than 5000 rows");
    rows.push_back(std::move(a));
    rhs.push_back(b);
    sense.push_back(s);
    names.push_back(std::move(name));
  };
  auto unit = [&](Eigen::Index idx, double v, Vector& a) { a(idx) += v; };

  for (const auto& [k, l] : r.pairs) {
    const auto kk = static_cast<Eigen::Index>(k), ll = static_cast<Eigen::Index>(l);
    const auto xi = static_cast<Eigen::Index>(r.xi_index(k, l));
    const std::string tag = std::to_string(k) + "_" + std::to_string(l);
    const double lk = lower(kk), uk = upper(kk), lw = lower(ll), ul = upper(ll);
    {  // (x_k - l_k)(x_l - l_l) >= 0
      Vector a = Vector::Zero(nv);
      unit(xi, 1.0, a);
      unit(kk, -lw, a);
      unit(ll, -lk, a);
      push(std::move(a), -lk * lw, lp::Sense::GreaterEqual, "ll_" + tag);
    }
    {  // (u_k - x_k)(u_l - x_l) >= 0
      Vector a = Vector::Zero(nv);
      unit(xi, 1.0, a);
      unit(kk, -ul, a);
      unit(ll, -uk, a);
      push(std::move(a), -uk * ul, lp::Sense::GreaterEqual, "uu_" + tag);
    }
    {  // (x_k - l_k)(u_l - x_l) >= 0
      Vector a = Vector::Zero(nv);
      unit(xi, -1.0, a);
      unit(kk, ul, a);
      unit(ll, lk, a);
      push(std::move(a), lk * ul, lp::Sense::GreaterEqual, "lu_" + tag);
    }
    if (k != l) {  // (u_k - x_k)(x_l - l_l) >= 0
      Vector a = Vector::Zero(nv);
      unit(xi, -1.0, a);
      unit(kk, lw, a);
      unit(ll, uk, a);
      push(std::move(a), uk * lw, lp::Sense::GreaterEqual, "ul_" + tag);
    }
  }

  for (Eigen::Index e = 0; e < extra_a.rows(); ++e) {
    const Vector ar = extra_a.row(e).transpose();
    const double be = extra_b(e);
    const std::string tag = std::to_string(e);
    {
      Vector a = Vector::Zero(nv);
      a.head(nn) = ar;
      push(std::move(a), be, lp::Sense::LessEqual, "row_" + tag);
    }
    for (std::size_t k = 0; k < n; ++k) {
      const auto kk = static_cast<Eigen::Index>(k);
      {  // (b - a.x)(x_k - l_k) >= 0
        Vector a = Vector::Zero(nv);
        unit(kk, be, a);
        for (std::size_t j = 0; j < n; ++j) {
          const auto jj = static_cast<Eigen::Index>(j);
          unit(static_cast<Eigen::Index>(r.xi_index(j, k)), -ar(jj), a);
          unit(jj, lower(kk) * ar(jj), a);
        }
        push(std::move(a), be * lower(kk), lp::Sense::GreaterEqual, "rl_" + tag + "_" + std::to_string(k));
      }
      {  // (b - a.x)(u_k - x_k) >= 0
        Vector a = Vector::Zero(nv);
        unit(kk, -be, a);
        for (std::size_t j = 0; j < n; ++j) {
          const auto jj = static_cast<Eigen::Index>(j);
          unit(static_cast<Eigen::Index>(r.xi_index(j, k)), ar(jj), a);
          unit(jj, -upper(kk) * ar(jj), a);
        }
        push(std::move(a), -be * upper(kk), lp::Sense::GreaterEqual, "ru_" + tag + "_" + std::to_string(k));
      }
    }
  }

  lpp.A = Matrix::Zero(static_cast<Eigen::Index>(rows.size()), nv);
  lpp.b.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    lpp.A.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
    lpp.b(static_cast<Eigen::Index>(i)) = rhs[i];
  }
  lpp.sense = std::move(sense);
  lpp.row_names = std::move(names);
  return r;
}

RltSolution solve_lp_small(const RltProblem& rlt) {
  if (rlt.n > kMaxRltDim) {
    throw Error(ErrorCode::TooLarge, "solve_lp_small: n = " + std::to_string(rlt.n) + " exceeds 10");
  }
  const lp::LpSolution s = lp::solve(rlt.lp);
  const auto n = static_cast<Eigen::Index>(rlt.n);
  RltSolution out;
  out.x = s.x.head(n);
  out.xi = Matrix::Zero(n, n);
  for (const auto& [k, l] : rlt.pairs) {
    const double v = s.x(static_cast<Eigen::Index>(rlt.xi_index(k, l)));
    const auto kk = static_cast<Eigen::Index>(k), ll = static_cast<Eigen::Index>(l);
    out.xi(kk, ll) = out.xi(ll, kk) = v;
    out.product_gap = std::max(out.product_gap, std::abs(v - out.x(kk) * out.x(ll)));
  }
  out.value = s.value;
  return out;
}

void export_rlt_lp(const RltProblem& rlt, const std::string& path) { write_file(path, lp::write_text(rlt.lp)); }

}  // namespace canondual
