// canondual: command-line front end for the canonical dual solver.

#include "canondual/error.hpp"
#include "canondual/integer.hpp"
#include "canondual/json_util.hpp"
#include "canondual/lp.hpp"
#include "canondual/oracle.hpp"
#include "canondual/parallel.hpp"
#include "canondual/relaxations.hpp"
#include "canondual/solver.hpp"
#include "canondual/triality.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace canondual;
using Json = nlohmann::json;

constexpr const char* kVersion = "0.1.0";

enum Exit { kOk = 0, kUsage = 1, kHeuristic = 2, kFailure = 3 };

// Loaded problem document: either the model schema or the QIP extension.
struct Document {
  std::optional<Problem> problem;
  std::optional<QipInstance> qip;

  bool sign() const { return qip || problem->variables() == VariableKind::SignInteger; }
  std::size_t n() const { return qip ? qip->n() : problem->n(); }
  DualLayout layout() const {
    return qip ? DualLayout::sign_quadratic(qip->Q, qip->f) : DualLayout::from_problem(*problem);
  }
};

struct Options {
  std::string path;
  std::optional<double> tol;
  std::optional<int> max_iter;
  std::optional<std::uint64_t> seed;
  bool perturb = false;
  std::optional<double> delta0;
  bool pretty = false;
  unsigned threads = 0;
  std::string config_path;
  bool timing = false;
  // classify
  std::string x_csv, sigma_csv;
  // oracle
  std::string box = "-4:4";
  std::size_t points = 0;
  // export
  std::string format, out;
  std::string rlt_box = "-1:1";
  // sweep
  std::string direction, grid;
  // plotdata
  std::string range;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::SchemaError, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Document load_document(const std::string& path) {
  const std::string text = read_file(path);
  Document d;
  if (is_qip_document(text)) {
    d.qip = load_qip(text);
  } else {
    d.problem = load_problem(text);
  }
  return d;
}

std::vector<double> parse_list(const std::string& text, char sep, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  for (std::string tok; std::getline(ss, tok, sep);) {
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (tok.empty() || *end != '\0' || !std::isfinite(v)) {
      throw Error(ErrorCode::SchemaError, std::string(what) + ": bad number '" + tok + "'");
    }
    out.push_back(v);
  }
  if (out.empty()) throw Error(ErrorCode::SchemaError, std::string(what) + ": empty list");
  return out;
}

Vector parse_vector(const std::string& csv, const char* what) {
  const auto v = parse_list(csv, ',', what);
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

SolverConfig load_config(const Options& o) {
  SolverConfig cfg;
  if (!o.config_path.empty()) {
    using namespace json_util;
    const Json j = parse(read_file(o.config_path));
    require_object(j, "$");
    reject_unknown(j, "$",
                   {"barrier_weight", "barrier_shrink", "barrier_min", "max_outer", "max_inner", "grad_tol",
                    "step_tol", "perturb_delta0", "perturb_shrink", "perturb_delta_min", "max_perturb_rounds",
                    "perturb_starts", "sweep_starts", "seed", "threads"});
    auto real = [&](const char* k, double& dst) {
      if (j.contains(k)) dst = number(j[k], std::string("$.") + k);
    };
    auto count = [&](const char* k, auto& dst) {
      if (!j.contains(k)) return;
      const long long v = integer(j[k], std::string("$.") + k);
      if (v < 0) schema_error(std::string("$.") + k, "must be nonnegative");
      dst = static_cast<std::remove_reference_t<decltype(dst)>>(v);
    };
    real("barrier_weight", cfg.barrier_weight);
    real("barrier_shrink", cfg.barrier_shrink);
    real("barrier_min", cfg.barrier_min);
    count("max_outer", cfg.max_outer);
    count("max_inner", cfg.max_inner);
    real("grad_tol", cfg.grad_tol);
    real("step_tol", cfg.step_tol);
    real("perturb_delta0", cfg.perturb_delta0);
    real("perturb_shrink", cfg.perturb_shrink);
    real("perturb_delta_min", cfg.perturb_delta_min);
    count("max_perturb_rounds", cfg.max_perturb_rounds);
    count("perturb_starts", cfg.perturb_starts);
    count("sweep_starts", cfg.sweep_starts);
    count("seed", cfg.seed);
    count("threads", cfg.threads);
  }
  if (o.tol) cfg.grad_tol = *o.tol;
  if (o.max_iter) cfg.max_inner = *o.max_iter;
  if (o.seed) cfg.seed = *o.seed;
  if (o.delta0) cfg.perturb_delta0 = *o.delta0;
  if (o.threads) cfg.threads = o.threads;
  cfg.validate();
  return cfg;
}

Json config_json(const SolverConfig& c) {
  return Json{{"barrier_weight", c.barrier_weight},
              {"barrier_shrink", c.barrier_shrink},
              {"barrier_min", c.barrier_min},
              {"max_outer", c.max_outer},
              {"max_inner", c.max_inner},
              {"grad_tol", c.grad_tol},
              {"step_tol", c.step_tol},
              {"perturb_delta0", c.perturb_delta0},
              {"perturb_shrink", c.perturb_shrink},
              {"perturb_delta_min", c.perturb_delta_min},
              {"max_perturb_rounds", c.max_perturb_rounds},
              {"perturb_starts", c.perturb_starts},
              {"sweep_starts", c.sweep_starts},
              {"seed", c.seed}};
}

Json vec(const Vector& v) { return json_util::to_json(v); }

Json triality_json(const TrialityClass& t) {
  Json j{{"label", to_string(t.label)},
         {"g_class", linalg::to_string(t.g_class)},
         {"g_eigvals", vec(t.g_eigvals)},
         {"dims_equal", t.dims_equal},
         {"primal_residual", t.primal_residual},
         {"dual_residual", t.dual_residual},
         {"note", t.note}};
  j["primal_hessian_class"] = t.primal_hessian_class ? Json(linalg::to_string(*t.primal_hessian_class)) : Json();
  j["dual_hessian_class"] = t.dual_hessian_class ? Json(linalg::to_string(*t.dual_hessian_class)) : Json();
  return j;
}

Json solve_json(const SolveReport& r) {
  Json alts = Json::array();
  for (const auto& a : r.alternatives) alts.push_back(vec(a));
  return Json{{"outcome", to_string(r.outcome)},
              {"membership", to_string(r.membership)},
              {"x_bar", vec(r.x_bar)},
              {"sigma_bar", vec(r.sigma_bar)},
              {"primal_value", r.primal_value},
              {"dual_value", r.dual_value},
              {"duality_residual", r.duality_residual},
              {"xi_residual", r.xi_residual},
              {"triality", r.triality ? triality_json(*r.triality) : Json()},
              {"iterations", r.iterations},
              {"boundary_flag", r.boundary_flag},
              {"grad_norm", r.grad_norm},
              {"range_residual", r.range_residual},
              {"min_eig_G", r.min_eig_G},
              {"perturbation_rounds", r.perturbation_rounds},
              {"alternatives", alts},
              {"note", r.note}};
}

Json qip_json(const QipReport& r) {
  Json alts = Json::array();
  for (const auto& a : r.alternatives) alts.push_back(vec(a));
  return Json{{"certificate", to_string(r.certificate)},
              {"x_star", vec(r.x_star)},
              {"sigma_star", vec(r.sigma_star)},
              {"objective", r.objective},
              {"dual_value", r.dual_value},
              {"zero_flag", r.zero_flag},
              {"alternatives", alts},
              {"note", r.note}};
}

Json error_json(const Error& e) { return Json{{"code", to_string(e.code())}, {"message", e.what()}}; }

void render_pretty(const Json& j, std::ostream& os, int indent) {
  const std::string pad(static_cast<std::size_t>(indent), ' ');
  for (const auto& [key, val] : j.items()) {
    if (val.is_object()) {
      os << pad << key << ":\n";
      render_pretty(val, os, indent + 2);
    } else if (val.is_array() && !val.empty() && val[0].is_array()) {
      os << pad << key << ":\n";
      for (const auto& row : val) os << pad << "  - " << row.dump() << '\n';
    } else if (val.is_string()) {
      os << pad << key << ": " << val.get<std::string>() << '\n';
    } else {
      os << pad << key << ": " << val.dump() << '\n';
    }
  }
}

// RunReport: command echo, config echo, payload, version.
class Reporter {
 public:
  Reporter(std::string command, const Options& o)
      : o_(o), start_(std::chrono::steady_clock::now()) {
    doc_["version"] = kVersion;
    doc_["command"] = std::move(command);
    doc_["problem"] = o.path;
  }
  Json& doc() { return doc_; }
  int emit(int code) {
    if (o_.timing) {
      doc_["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }
    doc_["exit_code"] = code;
    if (o_.pretty) {
      render_pretty(doc_, std::cout, 0);
    } else {
      std::cout << doc_.dump() << '\n';
    }
    return code;
  }

 private:
  const Options& o_;
  std::chrono::steady_clock::time_point start_;
  Json doc_;
};

int cmd_solve(const Options& o) {
  const Document d = load_document(o.path);
  SolverConfig cfg = load_config(o);
  if (!o.perturb) cfg.perturb_delta0 = 0.0;
  Reporter rep("solve", o);
  rep.doc()["config"] = config_json(cfg);
  rep.doc()["perturb"] = o.perturb;
  const DualLayout layout = d.layout();

  if (d.sign()) {
    const QipReport r = qip_dual_solve(layout, cfg);
    rep.doc()["kind"] = "qip";
    rep.doc()["result"] = qip_json(r);
    switch (r.certificate) {
      case Certificate::DualCertified: return rep.emit(kOk);
      case Certificate::PerturbationOnly: return rep.emit(kHeuristic);
      case Certificate::Failed: return rep.emit(kFailure);
    }
  }

  rep.doc()["kind"] = "continuous";
  std::optional<SolveReport> r;
  std::optional<Error> failure;
  try {
    r = solve_dual(layout, cfg);
  } catch (const Error& e) {
    failure = e;
  }
  if (o.perturb && (!r || r->outcome != SolveOutcome::Interior)) {
    try {
      r = perturbed_solve(layout, cfg);
      failure.reset();
    } catch (const Error& e) {
      if (!failure) failure = e;
    }
  }
  if (!r) {
    rep.doc()["status"] = "failed";
    rep.doc()["error"] = error_json(*failure);
    return rep.emit(kFailure);
  }
  rep.doc()["status"] = "ok";
  rep.doc()["result"] = solve_json(*r);
  const bool global = r->outcome == SolveOutcome::Interior && r->triality &&
                      r->triality->label == TrialityLabel::GlobalMin;
  return rep.emit(global ? kOk : kHeuristic);
}

int cmd_classify(const Options& o) {
  const Document d = load_document(o.path);
  const Vector x = parse_vector(o.x_csv, "--x");
  const Vector s = parse_vector(o.sigma_csv, "--sigma");
  const DualLayout layout = d.layout();
  if (static_cast<std::size_t>(x.size()) != layout.primal_dim() ||
      static_cast<std::size_t>(s.size()) != layout.dual_dim()) {
    throw Error(ErrorCode::DimensionMismatch, "--x needs " + std::to_string(layout.primal_dim()) +
                                                  " values and --sigma " + std::to_string(layout.dual_dim()));
  }
  const TrialityClass t = classify(layout, x, s, o.tol ? std::optional<double>(*o.tol) : std::nullopt);
  Reporter rep("classify", o);
  rep.doc()["x"] = vec(x);
  rep.doc()["sigma"] = vec(s);
  rep.doc()["membership"] = to_string(in_S_plus(layout, s));
  rep.doc()["result"] = triality_json(t);
  return rep.emit(kOk);
}

Json oracle_json(const oracle::OracleResult& r) {
  Json minima = Json::array();
  for (const auto& m : r.minima) minima.push_back(vec(m));
  return Json{{"method", r.method},
              {"best_x", vec(r.best_x)},
              {"best_value", r.best_value},
              {"samples", r.samples},
              {"minima", minima}};
}

// Q with 1/2 x^T Q x equal to the quadratic part of a layout without dual coordinates
// other than sign relaxations.
Matrix quadratic_part(const DualLayout& layout, const char* what) {
  for (const auto& c : layout.coords()) {
    if (c.kind != DualKind::SignRelaxation) {
      throw Error(ErrorCode::UnsupportedTerm, std::string(what) + " needs a problem made of plain quadratic terms");
    }
  }
  return layout.base();
}

std::pair<double, double> parse_interval(const std::string& text, const char* what) {
  const auto v = parse_list(text, ':', what);
  if (v.size() != 2 || !(v[0] < v[1])) throw Error(ErrorCode::SchemaError, std::string(what) + ": expected a:b with a < b");
  return {v[0], v[1]};
}

int cmd_oracle(const Options& o) {
  const Document d = load_document(o.path);
  const SolverConfig cfg = load_config(o);
  Reporter rep("oracle", o);
  if (d.sign()) {
    const DualLayout layout = d.layout();
    const QipInstance inst{quadratic_part(layout, "oracle"), layout.f()};
    rep.doc()["result"] = oracle_json(oracle::enumerate_signs(inst, cfg.threads));
    return rep.emit(kOk);
  }
  const auto [lo, hi] = parse_interval(o.box, "--box");
  const auto n = static_cast<Eigen::Index>(d.n());
  oracle::Box box{Vector::Constant(n, lo), Vector::Constant(n, hi)};
  std::size_t points = o.points;
  if (points == 0) points = n == 1 ? 4001 : n == 2 ? 401 : n == 3 ? 61 : n <= 6 ? 11 : 20000;
  rep.doc()["box"] = o.box;
  rep.doc()["points"] = points;
  rep.doc()["result"] = oracle_json(oracle::grid_multistart(*d.problem, box, points, true, cfg.seed, cfg.threads));
  return rep.emit(kOk);
}

int cmd_export(const Options& o) {
  const Document d = load_document(o.path);
  Reporter rep("export", o);
  rep.doc()["format"] = o.format;
  rep.doc()["out"] = o.out;
  if (o.format == "sdpa") {
    const SdpProblem sdp = d.qip ? build_sdp(*d.qip) : build_sdp(*d.problem);
    export_sdp(sdp, o.out);
    const SdpaData back = parse_sdpa(read_file(o.out));
    rep.doc()["round_trip"] = back == to_sdpa(sdp);
    rep.doc()["blocks"] = back.block_sizes;
    rep.doc()["variables"] = back.var_names;
  } else {
    const DualLayout layout = d.layout();
    const Matrix q = quadratic_part(layout, "export --format lp");
    const auto n = static_cast<Eigen::Index>(layout.primal_dim());
    const auto [lo, hi] = d.sign() ? std::pair{-1.0, 1.0} : parse_interval(o.rlt_box, "--box");
    const RltProblem rlt = build_rlt(q, layout.f(), Vector::Constant(n, lo), Vector::Constant(n, hi));
    export_rlt_lp(rlt, o.out);
    rep.doc()["round_trip"] = lp::parse_text(read_file(o.out)) == rlt.lp;
    rep.doc()["rows"] = rlt.lp.num_rows();
    rep.doc()["columns"] = rlt.lp.num_vars();
  }
  return rep.emit(kOk);
}

int cmd_sweep(const Options& o) {
  const Document d = load_document(o.path);
  if (!d.problem || d.sign()) throw Error(ErrorCode::SchemaError, "sweep needs a continuous problem");
  const SolverConfig cfg = load_config(o);
  const Vector dir = parse_vector(o.direction, "--direction");
  const auto grid = parse_list(o.grid, ',', "--grid");
  const SweepResult s = fc_sweep(*d.problem, dir, grid, cfg);
  Reporter rep("sweep", o);
  rep.doc()["config"] = config_json(cfg);
  Json rows = Json::array();
  for (const auto& r : s.rows) {
    rows.push_back(Json{{"magnitude", r.magnitude},
                        {"outcome", r.outcome},
                        {"critical_points", r.critical_points},
                        {"unique", r.unique},
                        {"sigma_bar", vec(r.sigma_bar)}});
  }
  rep.doc()["rows"] = rows;
  rep.doc()["threshold"] = s.threshold ? Json(*s.threshold) : Json();
  return rep.emit(kOk);
}

std::string tsv_number(double v) { return std::isfinite(v) ? lp::format_number(v) : "nan"; }

int cmd_plotdata(const Options& o) {
  const Document d = load_document(o.path);
  if (!d.problem || d.n() != 1) throw Error(ErrorCode::SchemaError, "plotdata needs a one-dimensional continuous problem");
  const auto v = parse_list(o.range, ':', "--range");
  if (v.size() != 3 || !(v[0] < v[1]) || v[2] < 2 || v[2] != std::floor(v[2]) || v[2] > 1e7) {
    throw Error(ErrorCode::SchemaError, "--range: expected a:b:steps with a < b and an integer steps >= 2");
  }
  const auto steps = static_cast<long>(v[2]);
  const DualLayout layout = d.layout();
  const bool dual_cols = layout.dual_dim() == 1;

  std::ostringstream os;
  os << "x\tpi" << (dual_cols ? "\tsigma\tpi_dual" : "") << '\n';
  for (long k = 0; k < steps; ++k) {
    const double t = v[0] + (v[1] - v[0]) * static_cast<double>(k) / static_cast<double>(steps - 1);
    const Vector x = Vector::Constant(1, t);
    double pi = NAN;
    try {
      pi = eval_primal(*d.problem, x);
    } catch (const Error&) {
    }
    os << tsv_number(t) << '\t' << tsv_number(pi);
    if (dual_cols) {
      double pd = NAN;
      try {
        pd = eval_dual(layout, x);
      } catch (const Error&) {
      }
      os << '\t' << tsv_number(t) << '\t' << tsv_number(pd);
    }
    os << '\n';
  }
  if (o.out.empty()) {
    std::cout << os.str();
  } else {
    std::ofstream out(o.out, std::ios::binary);
    if (!out) throw Error(ErrorCode::SchemaError, "cannot open " + o.out + " for writing");
    out << os.str();
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Canonical duality-triality solver"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("problem", o.path, "Problem JSON file")->required();
    sub->add_option("--tol", o.tol, "Gradient tolerance (classify: criticality tolerance)");
    sub->add_option("--max-iter", o.max_iter, "Newton iterations per barrier level");
    sub->add_option("--seed", o.seed, "Random seed");
    auto* json = sub->add_flag("--json", "JSON output (default)");
    sub->add_flag("--pretty", o.pretty, "Human-readable output")->excludes(json);
    sub->add_option("--threads", o.threads, "Worker threads (default: CANON_DUAL_THREADS or all cores)");
    sub->add_option("--config", o.config_path, "Solver configuration JSON");
    sub->add_flag("--timing", o.timing, "Add wall time to the report");
  };

  auto* solve = app.add_subcommand("solve", "Solve a problem through its canonical dual");
  common(solve);
  solve->add_flag("--perturb", o.perturb, "Fall back to the quadratic perturbation method");
  solve->add_option("--delta0", o.delta0, "Initial perturbation weight");

  auto* cls = app.add_subcommand("classify", "Triality class of a critical pair");
  common(cls);
  cls->add_option("--x", o.x_csv, "Primal point, comma separated")->required();
  cls->add_option("--sigma", o.sigma_csv, "Dual point, comma separated")->required();

  auto* orc = app.add_subcommand("oracle", "Brute-force ground truth (enumeration or grid)");
  common(orc);
  orc->add_option("--box", o.box, "Search interval a:b for every coordinate");
  orc->add_option("--points", o.points, "Grid points per axis (n <= 6) or random samples");

  auto* exp = app.add_subcommand("export", "Write the SDP (SDPA sparse) or RLT (LP text) relaxation");
  common(exp);
  exp->add_option("--format", o.format, "sdpa or lp")->required()->check(CLI::IsMember({"sdpa", "lp"}));
  exp->add_option("--out", o.out, "Output path")->required();
  exp->add_option("--box", o.rlt_box, "Box a:b for the RLT of a continuous problem (default -1:1)");

  auto* swp = app.add_subcommand("sweep", "Uniqueness sweep along an input direction");
  common(swp);
  swp->add_option("--direction", o.direction, "Direction, comma separated")->required();
  swp->add_option("--grid", o.grid, "Magnitudes, comma separated, ascending")->required();

  auto* plot = app.add_subcommand("plotdata", "TSV of Pi(x) and Pi^d(sigma) on a grid");
  common(plot);
  plot->add_option("--range", o.range, "a:b:steps")->required();
  plot->add_option("--out", o.out, "Output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*solve) return cmd_solve(o);
    if (*cls) return cmd_classify(o);
    if (*orc) return cmd_oracle(o);
    if (*exp) return cmd_export(o);
    if (*swp) return cmd_sweep(o);
    if (*plot) return cmd_plotdata(o);
  } catch (const Error& e) {
    std::cerr << "canondual: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "canondual: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
