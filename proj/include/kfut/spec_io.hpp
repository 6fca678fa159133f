#pragma once

// JSON documents describing a manifold (potentials per affine chart, optional
// bump deformation) and holomorphic fields on it, plus the JSON form of
// invariant reports.
//
//   {
//     "name": "cp1_round",
//     "complex_dim": 1,
//     "compactification": "fubini_study",
//     "potential": "log(1 + x1^2 + x2^2)",
//     "charts": ["log(1 + x1^2 + x2^2)"],            // charts 1..k, optional
//     "chart_domain": {"kind": "box", "lower": [..], "upper": [..]},  // optional
//     "deformation": {"amplitude": 0.05, "support": {"center": [..], "radius": 1},
//                     "phi": "..."},                 // optional; phi defaults to the bump
//     "fields": [{"name": "rot", "Z": ["-x1", "-x2"], "F": "0",
//                 "H": "-2*(x1^2+x2^2)/(1+x1^2+x2^2)",
//                 "charts": [{"Z": [..], "F": "..", "H": ".."}]}]
//   }
//
// Syntax errors report line and column; everything else names the offending
// key path, e.g. fields[0].charts[1].H.

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "kfut/error.hpp"
#include "kfut/expression.hpp"
#include "kfut/fields.hpp"
#include "kfut/invariants.hpp"
#include "kfut/kahler_chart.hpp"
#include "kfut/manifolds.hpp"

namespace kfut {

using json = nlohmann::json;

struct LoadedSpec {
  KahlerChartSpec manifold;
  std::vector<HolomorphicFieldSpec> fields;
};

namespace detail {

class SpecReader {
 public:
  explicit SpecReader(std::string origin) : origin_(std::move(origin)) {}

  [[noreturn]] void fail(const std::string& path, const std::string& msg) const {
    throw Error(ErrorKind::parse, origin_ + ": field '" + path + "': " + msg);
  }

  const json& require(const json& obj, const std::string& path, const char* key) const {
    if (!obj.is_object()) fail(path, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) fail(join(path, key), "missing");
    return *it;
  }

  std::string string_at(const json& v, const std::string& path) const {
    if (!v.is_string()) fail(path, "expected a string");
    return v.get<std::string>();
  }

  double number_at(const json& v, const std::string& path) const {
    if (!v.is_number()) fail(path, "expected a number");
    return v.get<double>();
  }

  std::vector<double> numbers_at(const json& v, const std::string& path, std::size_t size) const {
    if (!v.is_array() || v.size() != size) fail(path, "expected an array of " + std::to_string(size) + " numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number_at(v[i], path + "[" + std::to_string(i) + "]"));
    return out;
  }

  Expression expression_at(const json& v, const std::string& path, int num_vars) const {
    const std::string src = string_at(v, path);
    try {
      return Expression::parse(src, num_vars);
    } catch (const Error& e) {
      fail(path, e.what());
    }
  }

  static std::string join(const std::string& path, const char* key) { return path.empty() ? key : path + "." + key; }

 private:
  std::string origin_;
};

inline FieldChart read_field_chart(const SpecReader& r, const json& v, const std::string& path, int m) {
  const json& Z = r.require(v, path, "Z");
  if (!Z.is_array() || static_cast<int>(Z.size()) != m)
    r.fail(SpecReader::join(path, "Z"), "expected " + std::to_string(m) + " component expressions");
  std::vector<Expression> comps;
  for (int a = 0; a < m; ++a)
    comps.push_back(r.expression_at(Z[static_cast<std::size_t>(a)], SpecReader::join(path, "Z") + "[" + std::to_string(a) + "]", m));
  FieldChart fc;
  fc.Z = [comps](std::span<const Jet> x) {
    std::vector<Jet> out;
    for (const auto& c : comps) out.push_back(c(x));
    return out;
  };
  fc.F = scalar_field(r.expression_at(r.require(v, path, "F"), SpecReader::join(path, "F"), m));
  fc.H = scalar_field(r.expression_at(r.require(v, path, "H"), SpecReader::join(path, "H"), m));
  return fc;
}

}  // namespace detail

inline LoadedSpec parse_spec(const std::string& text, const std::string& origin = "<spec>") {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw Error(ErrorKind::parse, origin + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + e.what());
  }
  const detail::SpecReader r(origin);
  if (!doc.is_object()) r.fail("", "the document must be a JSON object");

  const std::string name = r.string_at(r.require(doc, "", "name"), "name");
  const json& dim_v = r.require(doc, "", "complex_dim");
  if (!dim_v.is_number_integer() || dim_v.get<int>() < 1 || dim_v.get<int>() > 4)
    r.fail("complex_dim", "expected an integer between 1 and 4");
  const int n = dim_v.get<int>(), m = 2 * n;

  std::string compactification = "fubini_study";
  if (doc.contains("compactification")) compactification = r.string_at(doc["compactification"], "compactification");

  ChartDomain domain;
  if (doc.contains("chart_domain")) {
    const json& d = doc["chart_domain"];
    const std::string kind = r.string_at(r.require(d, "chart_domain", "kind"), "chart_domain.kind");
    if (kind == "box") {
      domain.kind = ChartDomain::Kind::box;
      domain.lower = r.numbers_at(r.require(d, "chart_domain", "lower"), "chart_domain.lower", static_cast<std::size_t>(m));
      domain.upper = r.numbers_at(r.require(d, "chart_domain", "upper"), "chart_domain.upper", static_cast<std::size_t>(m));
    } else if (kind == "ball") {
      domain.kind = ChartDomain::Kind::ball;
      domain.ball.center = r.numbers_at(r.require(d, "chart_domain", "center"), "chart_domain.center", static_cast<std::size_t>(m));
      domain.ball.radius = r.number_at(r.require(d, "chart_domain", "radius"), "chart_domain.radius");
    } else if (kind != "whole") {
      r.fail("chart_domain.kind", "expected box, ball or whole");
    }
  }

  LoadedSpec out;
  const Expression pot = r.expression_at(r.require(doc, "", "potential"), "potential", m);
  KahlerChartSpec chart0;
  chart0.name = name;
  chart0.complex_dim = n;
  chart0.potential = scalar_field(pot);
  chart0.potential_source = pot.source();
  chart0.compactification = compactification;
  chart0.domain = domain;
  if (doc.contains("charts")) {
    const json& cs = doc["charts"];
    if (!cs.is_array()) r.fail("charts", "expected an array of potential expressions");
    for (std::size_t k = 0; k < cs.size(); ++k) {
      const std::string path = "charts[" + std::to_string(k) + "]";
      const Expression e = r.expression_at(cs[k], path, m);
      KahlerChartSpec c = chart0;
      c.potential = scalar_field(e);
      c.potential_source = e.source();
      c.chart_index = static_cast<int>(k + 1);
      chart0.other_charts.push_back(std::make_shared<const KahlerChartSpec>(std::move(c)));
    }
  }
  out.manifold = chart0;

  if (doc.contains("deformation")) {
    const json& d = doc["deformation"];
    const double amplitude = r.number_at(r.require(d, "deformation", "amplitude"), "deformation.amplitude");
    std::optional<Ball> support;
    if (d.contains("support")) {
      const json& s = d["support"];
      Ball b;
      b.center = r.numbers_at(r.require(s, "deformation.support", "center"), "deformation.support.center", static_cast<std::size_t>(m));
      b.radius = r.number_at(r.require(s, "deformation.support", "radius"), "deformation.support.radius");
      if (!(b.radius > 0.0)) r.fail("deformation.support.radius", "must be positive");
      support = b;
    } else if (chart0.num_charts() > 1) {
      r.fail("deformation.support", "required when the manifold has several charts");
    }
    ScalarField phi;
    if (d.contains("phi")) {
      phi = scalar_field(r.expression_at(d["phi"], "deformation.phi", m));
    } else {
      if (!support) r.fail("deformation.phi", "missing (the default bump needs a support ball)");
      phi = bump_function(*support, kPotentialBumpPower);
    }
    out.manifold = deform(chart0, phi, amplitude, support);
    out.manifold.name = name;
  }

  if (doc.contains("fields")) {
    const json& fs = doc["fields"];
    if (!fs.is_array()) r.fail("fields", "expected an array");
    for (std::size_t i = 0; i < fs.size(); ++i) {
      const std::string path = "fields[" + std::to_string(i) + "]";
      HolomorphicFieldSpec f;
      f.name = r.string_at(r.require(fs[i], path, "name"), path + ".name");
      f.charts.push_back(detail::read_field_chart(r, fs[i], path, m));
      if (fs[i].contains("charts")) {
        const json& cs = fs[i]["charts"];
        if (!cs.is_array()) r.fail(path + ".charts", "expected an array");
        for (std::size_t k = 0; k < cs.size(); ++k)
          f.charts.push_back(detail::read_field_chart(r, cs[k], path + ".charts[" + std::to_string(k) + "]", m));
      }
      if (static_cast<int>(f.charts.size()) != chart0.num_charts())
        r.fail(path + ".charts", "manifold has " + std::to_string(chart0.num_charts()) + " charts, field gives " +
                                     std::to_string(f.charts.size()));
      out.fields.push_back(std::move(f));
    }
  }
  if (doc.contains("builtin_fields")) {
    const std::string from = r.string_at(doc["builtin_fields"], "builtin_fields");
    auto builtins = builtin_fields(from);
    if (builtins.empty()) r.fail("builtin_fields", "no built-in fields for '" + from + "'");
    if (static_cast<int>(builtins.front().charts.size()) != chart0.num_charts() ||
        builtin_manifold(from).complex_dim != n)
      r.fail("builtin_fields", "fields of '" + from + "' do not fit this manifold's charts");
    for (auto& f : builtins) out.fields.push_back(std::move(f));
  }
  return out;
}

inline LoadedSpec load_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::usage, "cannot open spec file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_spec(ss.str(), path);
}

// ---------------------------------------------------------------------------
// Reports

inline json to_json(const Estimate& e) { return json{{"value", e.value}, {"error", e.error}}; }

inline json to_json(const ComplexEstimate& e) {
  return json{{"re", e.value.real()}, {"im", e.value.imag()}, {"error", e.error}};
}

inline json to_json(const InvariantReport& r) {
  json j;
  j["manifold"] = r.manifold;
  j["field"] = r.field;
  j["vol"] = to_json(r.vol);
  j["mu0"] = to_json(r.mu0);
  j["F_omega"] = to_json(r.F_omega);
  json ck = json::object();
  for (const auto& [k, v] : r.F_ck) ck[std::to_string(k)] = to_json(v);
  j["F_ck"] = ck;
  json fq = json::object();
  for (const auto& [q, v] : r.F_q)
    fq[q] = json{{"term1", to_json(v.term1)}, {"term2", to_json(v.term2)}, {"total", to_json(v.total)}};
  j["F_q"] = fq;
  j["quad_error_estimate"] = r.quad_error_estimate;
  j["max_field_residual"] = r.max_field_residual;
  return j;
}

}  // namespace kfut
