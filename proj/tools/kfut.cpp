// kfut: compute Futaki-type invariants and run verification suites.
//
//   kfut list [manifolds|fields|suites] [--manifold cp2]
//   kfut compute --manifold cp1 --field rot [--json] [--out report.json]
//   kfut compute --spec data/cp2_bumped.json --field all --nodes 8
//   kfut verify --suite bianchi --manifold cp2
//
// Exit codes: 0 ok, 1 verification failed, 2 usage or parse error,
// 3 a field failed its residual checks.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kfut/invariants.hpp"
#include "kfut/spec_io.hpp"
#include "kfut/suites.hpp"

namespace {

using namespace kfut;

constexpr int kExitOk = 0, kExitVerifyFail = 1, kExitUsage = 2, kExitResidual = 3;

struct RunConfig {
  std::string manifold;
  std::string spec_path;
  std::vector<std::string> fields;
  double bump = 0.0;  // deform a built-in manifold by the standard bump
  int jet_order = 6;
  int nodes = 0;
  int patch_nodes = 0;
  double tol = 0.0;
  std::string out;
  bool json = false;
  // verify
  std::string suite;
  int points = 100;
  int trials = 3;
  std::uint64_t seed = 1;
  // list
  std::string what = "manifolds";
};

struct Problem {
  KahlerChartSpec spec;
  std::vector<HolomorphicFieldSpec> available;
};

Problem load_problem(const RunConfig& cfg) {
  if (cfg.manifold.empty() == cfg.spec_path.empty())
    throw Error(ErrorKind::usage, "give exactly one of --manifold or --spec");
  Problem p;
  if (!cfg.spec_path.empty()) {
    LoadedSpec loaded = load_spec_file(cfg.spec_path);
    p.spec = std::move(loaded.manifold);
    p.available = std::move(loaded.fields);
  } else {
    p.spec = builtin_manifold(cfg.manifold);
    p.available = builtin_fields(cfg.manifold);
  }
  if (cfg.bump != 0.0) {
    const std::string name = p.spec.name;
    p.spec = deform_with_bump(p.spec, default_support(p.spec), cfg.bump);
    p.spec.name = name + "+bump(" + std::to_string(cfg.bump) + ")";
  }
  return p;
}

std::vector<HolomorphicFieldSpec> select_fields(const Problem& p, const std::vector<std::string>& names) {
  if (names.empty() || (names.size() == 1 && names[0] == "all")) return p.available;
  std::vector<HolomorphicFieldSpec> out;
  for (const auto& n : names) {
    auto it = std::find_if(p.available.begin(), p.available.end(), [&](const HolomorphicFieldSpec& f) { return f.name == n; });
    if (it == p.available.end()) {
      std::string known;
      for (const auto& f : p.available) known += (known.empty() ? "" : ", ") + f.name;
      throw Error(ErrorKind::usage, "unknown field '" + n + "' on '" + p.spec.name + "' (available: " +
                                        (known.empty() ? "none" : known) + ")");
    }
    out.push_back(*it);
  }
  return out;
}

QuadratureOptions quadrature(const RunConfig& cfg) {
  QuadratureOptions q;
  q.nodes_per_axis = cfg.nodes;
  q.patch_nodes = cfg.patch_nodes;
  return q;
}

void require_jet_order(const RunConfig& cfg) {
  if (cfg.jet_order < 6) throw Error(ErrorKind::usage, "--jet-order must be >= 6 for mu (got " + std::to_string(cfg.jet_order) + ")");
}

void emit(const RunConfig& cfg, const json& doc, const std::string& text) {
  const std::string dumped = doc.dump(2) + "\n";
  if (!cfg.out.empty()) {
    std::ofstream f(cfg.out, std::ios::binary);
    if (!f) throw Error(ErrorKind::usage, "cannot write '" + cfg.out + "'");
    f << dumped;
  }
  std::cout << (cfg.json ? dumped : text);
}

std::string format_estimate(double v, double e) {
  std::ostringstream s;
  s.precision(6);
  s << std::scientific << v << " +- " << e;
  return s.str();
}

std::string format_complex(cplx v, double e) {
  std::ostringstream s;
  s.precision(6);
  s << std::scientific << "(" << v.real() << ", " << v.imag() << ") +- " << e;
  return s.str();
}

int cmd_compute(const RunConfig& cfg) {
  require_jet_order(cfg);
  if (cfg.tol < 0.0) throw Error(ErrorKind::usage, "--tol must be positive");
  const Problem p = load_problem(cfg);
  const auto fields = select_fields(p, cfg.fields);
  if (fields.empty()) throw Error(ErrorKind::usage, "no fields to compute on '" + p.spec.name + "'");
  const QuadratureOptions q = quadrature(cfg);

  json doc;
  doc["manifold"] = p.spec.name;
  doc["complex_dim"] = p.spec.complex_dim;
  doc["nodes_per_axis"] = q.nodes_for(p.spec.real_dim());
  doc["reports"] = json::array();
  std::ostringstream text;
  bool residual_violation = false;
  for (const auto& f : fields) {
    const InvariantReport r = compute_invariants(p.spec, f, {}, q);
    doc["reports"].push_back(to_json(r));
    text << p.spec.name << " / " << f.name << "\n";
    text << "  vol       " << format_estimate(r.vol.value, r.vol.error) << "\n";
    text << "  mu0       " << format_estimate(r.mu0.value, r.mu0.error) << "\n";
    text << "  F_omega   " << format_estimate(r.F_omega.value, r.F_omega.error) << "\n";
    for (const auto& [k, c] : r.F_ck) text << "  F_c" << k << "      " << format_complex(c.value, c.error) << "\n";
    for (const auto& [name, g] : r.F_q) text << "  F_q " << name << "  " << format_complex(g.total.value, g.total.error) << "\n";
    text << "  max field residual " << r.max_field_residual << "\n";
    if (cfg.tol > 0.0 && r.max_field_residual > cfg.tol) {
      residual_violation = true;
      std::cerr << "kfut: field '" << f.name << "' residual " << r.max_field_residual << " exceeds --tol " << cfg.tol << "\n";
    }
  }
  emit(cfg, doc, text.str());
  return residual_violation ? kExitResidual : kExitOk;
}

int cmd_verify(const RunConfig& cfg) {
  const auto names = suite_names();
  if (std::find(names.begin(), names.end(), cfg.suite) == names.end())
    throw Error(ErrorKind::usage, "unknown suite '" + cfg.suite + "'");
  require_jet_order(cfg);
  if (cfg.tol < 0.0) throw Error(ErrorKind::usage, "--tol must be positive");
  const Problem p = load_problem(cfg);
  SuiteOptions opt;
  opt.quad = quadrature(cfg);
  opt.jet_order = cfg.jet_order;
  opt.points = cfg.points;
  opt.trials = cfg.trials;
  opt.seed = cfg.seed;
  opt.tol = cfg.tol;
  const SuiteResult r = run_suite(cfg.suite, p.spec, select_fields(p, cfg.fields), opt);

  json doc;
  doc["suite"] = r.suite;
  doc["manifold"] = p.spec.name;
  doc["pass"] = r.pass();
  doc["checks"] = json::array();
  std::ostringstream text;
  for (const auto& c : r.checks) {
    doc["checks"].push_back({{"name", c.name}, {"residual", c.residual}, {"tolerance", c.tolerance}, {"pass", c.pass()}, {"note", c.note}});
    text << (c.pass() ? "PASS " : "FAIL ") << c.name << ": " << c.residual << " (tol " << c.tolerance << ")";
    if (!c.note.empty()) text << " [" << c.note << "]";
    text << "\n";
  }
  text << r.suite << ": " << (r.pass() ? "PASS" : "FAIL") << "\n";
  emit(cfg, doc, text.str());
  return r.pass() ? kExitOk : kExitVerifyFail;
}

int cmd_list(const RunConfig& cfg) {
  json doc;
  std::ostringstream text;
  if (cfg.what == "manifolds") {
    doc = manifold_names();
    for (const auto& n : manifold_names()) text << n << "\n";
  } else if (cfg.what == "suites") {
    doc = suite_names();
    for (const auto& n : suite_names()) text << n << "\n";
  } else if (cfg.what == "fields") {
    doc = json::object();
    const auto mans = cfg.manifold.empty() ? manifold_names() : std::vector<std::string>{cfg.manifold};
    for (const auto& m : mans) {
      builtin_manifold(m);  // unknown names are usage errors
      doc[m] = builtin_field_names(m);
      text << m << ":";
      for (const auto& f : builtin_field_names(m)) text << " " << f;
      text << "\n";
    }
  } else {
    throw Error(ErrorKind::usage, "list what? expected manifolds, fields or suites");
  }
  if (cfg.json)
    std::cout << doc.dump(2) << "\n";
  else
    std::cout << text.str();
  return kExitOk;
}

void add_problem_options(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--manifold", cfg.manifold, "built-in manifold (see `kfut list manifolds`)");
  cmd->add_option("--spec", cfg.spec_path, "JSON manifold/field spec");
  cmd->add_option("--field", cfg.fields, "field name(s), or 'all'");
  cmd->add_option("--bump", cfg.bump, "deform the potential by this multiple of the standard bump");
  cmd->add_option("--jet-order", cfg.jet_order, "potential jet order for mu (>= 6)");
  cmd->add_option("--nodes", cfg.nodes, "quadrature nodes per axis (0: default)")->check(CLI::NonNegativeNumber);
  cmd->add_option("--patch-nodes", cfg.patch_nodes, "angular nodes on deformation patches (0: default)")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--tol", cfg.tol, "tolerance (compute: field residual; verify: overrides the suite's)");
  cmd->add_option("--out", cfg.out, "also write the JSON report here");
  cmd->add_flag("--json", cfg.json, "print JSON instead of text");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Futaki-type invariants of Kähler manifolds given by chart potentials"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto* compute = app.add_subcommand("compute", "compute all invariants for the chosen fields");
  add_problem_options(compute, cfg);
  auto* verify = app.add_subcommand("verify", "run a verification suite");
  add_problem_options(verify, cfg);
  verify->add_option("--suite", cfg.suite, "suite name (see `kfut list suites`)")->required();
  verify->add_option("--points", cfg.points, "random points for pointwise suites")->check(CLI::PositiveNumber);
  verify->add_option("--trials", cfg.trials, "random (F, A) pairs for moment_property")->check(CLI::PositiveNumber);
  verify->add_option("--seed", cfg.seed, "random seed");
  auto* list = app.add_subcommand("list", "list manifolds, fields or suites");
  list->add_option("what", cfg.what, "manifolds | fields | suites");
  list->add_option("--manifold", cfg.manifold, "restrict `list fields` to one manifold");
  list->add_flag("--json", cfg.json, "print JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*compute) return cmd_compute(cfg);
    if (*verify) return cmd_verify(cfg);
    return cmd_list(cfg);
  } catch (const Error& e) {
    std::cerr << "kfut: " << e.what() << "\n";
    return e.kind() == ErrorKind::invalid_field ? kExitResidual : kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "kfut: " << e.what() << "\n";
    return kExitUsage;
  }
}
