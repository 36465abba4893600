#include "canondual/json_util.hpp"
#include "canondual/model.hpp"

#include <iostream>

namespace canondual {

namespace {

using json_util::Json;

TermKind parse_kind(const Json& j, const std::string& path) {
  if (!j.is_string()) json_util::schema_error(path, "expected a string");
  const auto s = j.get<std::string>();
  if (s == "plain_quadratic") return TermKind::PlainQuadratic;
  if (s == "quartic") return TermKind::Quartic;
  if (s == "exponential") return TermKind::Exponential;
  if (s == "xlogx") return TermKind::XLogX;
  json_util::schema_error(path, "unknown term kind '" + s + "'");
}

}  // namespace

Problem load_problem(std::string_view json_text) {
  const Json doc = json_util::parse(json_text);
  json_util::require_object(doc, "$");
  json_util::reject_unknown(doc, "$", {"n", "variables", "f", "terms"});

  const long long n = json_util::integer(json_util::field(doc, "$", "n"), "$.n");
  if (n < 1) json_util::schema_error("$.n", "must be positive");

  const Json& vars = json_util::field(doc, "$", "variables");
  if (!vars.is_string()) json_util::schema_error("$.variables", "expected a string");
  VariableKind variables;
  if (vars == "continuous") {
    variables = VariableKind::Continuous;
  } else if (vars == "sign_integer") {
    variables = VariableKind::SignInteger;
  } else {
    json_util::schema_error("$.variables", "expected 'continuous' or 'sign_integer'");
  }

  Vector f = json_util::vector(json_util::field(doc, "$", "f"), "$.f");
  if (f.size() != n) throw Error(ErrorCode::DimensionMismatch, "$.f: length differs from n");

  const Json& terms_json = json_util::field(doc, "$", "terms");
  if (!terms_json.is_array() || terms_json.empty()) {
    json_util::schema_error("$.terms", "expected a non-empty array");
  }
  std::vector<CanonicalTerm> terms;
  for (std::size_t s = 0; s < terms_json.size(); ++s) {
    const std::string path = "$.terms[" + std::to_string(s) + "]";
    const Json& t = terms_json[s];
    json_util::require_object(t, path);
    json_util::reject_unknown(t, path, {"kind", "alpha", "beta", "factor"});
    const TermKind kind = parse_kind(json_util::field(t, path, "kind"), path + ".kind");
    const double alpha = json_util::number(json_util::field(t, path, "alpha"), path + ".alpha");
    const double beta = t.contains("beta") ? json_util::number(t["beta"], path + ".beta") : 0.0;
    Matrix factor = json_util::matrix(json_util::field(t, path, "factor"), path + ".factor");
    if (factor.cols() != n) {
      throw Error(ErrorCode::DimensionMismatch, path + ".factor: has " +
                                                    std::to_string(factor.cols()) +
                                                    " columns but n = " + std::to_string(n));
    }
    if (kind == TermKind::Exponential && alpha < 0) {
      std::cerr << "warning: " << path
                << ": exponential term with negative alpha; dual domain taken as sigma/alpha > 0\n";
    }
    try {
      terms.emplace_back(kind, alpha, std::move(factor), beta);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::DimensionMismatch) throw;
      json_util::schema_error(path, e.what());
    }
  }
  return Problem(std::move(terms), std::move(f), variables);
}

}  // namespace canondual
