#pragma once

// Verification suites: each runs one structural identity on a manifold and
// reports residuals against tolerances. Shared by `kfut verify` and the
// acceptance runner.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <mutex>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "kfut/chern_weil.hpp"
#include "kfut/fields.hpp"
#include "kfut/invariants.hpp"
#include "kfut/manifolds.hpp"
#include "kfut/moment_map.hpp"
#include "kfut/quadrature.hpp"

namespace kfut {

struct Check {
  std::string name;
  double residual = 0.0;
  double tolerance = 0.0;
  std::string note;

  bool pass() const { return residual <= tolerance; }  // false for NaN
};

struct SuiteResult {
  std::string suite;
  std::vector<Check> checks;

  bool pass() const {
    return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass(); });
  }
};

struct SuiteOptions {
  QuadratureOptions quad;
  int jet_order = 6;  // potential order for pointwise mu evaluations
  int points = 100;   // random points for pointwise identities
  int trials = 3;     // (F, A) pairs for the moment property
  std::uint64_t seed = 1;
  double tol = 0.0;   // 0: the suite's own tolerance
  std::vector<double> amplitudes{0.0, 1e-2, 5e-2};

  double tol_or(double fallback) const { return tol > 0.0 ? tol : fallback; }
};

inline std::vector<std::string> suite_names() {
  return {"bianchi", "moment_property", "chern_identity", "trace_identity", "class_invariance", "character", "prop41"};
}

/// Uniform point of the unit polydisc, one complex coordinate at a time.
inline std::vector<double> random_polydisc_point(int m, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> r(0.0, 1.0), t(0.0, 2.0 * std::numbers::pi);
  std::vector<double> p(static_cast<std::size_t>(m));
  for (int k = 0; k + 1 < m; k += 2) {
    const double rad = std::sqrt(r(rng)), th = t(rng);
    p[static_cast<std::size_t>(k)] = rad * std::cos(th);
    p[static_cast<std::size_t>(k + 1)] = rad * std::sin(th);
  }
  return p;
}

/// Support ball for suites that deform or perturb: it overlaps the chart
/// origin without being centred on a symmetry point.
inline Ball default_support(const KahlerChartSpec& spec, double radius = 1.0) {
  return Ball{std::vector<double>(static_cast<std::size_t>(spec.real_dim()), 0.15), radius};
}

namespace detail {

inline std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

// Sample point i: chart i mod (number of charts), so every chart gets points.
template <class F>
double max_over_points(const KahlerChartSpec& spec, const SuiteOptions& opt, F&& residual_at) {
  std::mt19937_64 rng(opt.seed);
  double worst = 0.0;
  for (int i = 0; i < opt.points; ++i) {
    const KahlerChartSpec& chart = chart_of(spec, i % spec.num_charts());
    const double r = residual_at(chart, random_polydisc_point(spec.real_dim(), rng));
    worst = std::isnan(r) ? r : std::max(worst, r);
    if (std::isnan(worst)) break;
  }
  return worst;
}

inline const std::vector<HolomorphicFieldSpec>& require_fields(const std::vector<HolomorphicFieldSpec>& fields,
                                                               const std::string& suite, std::size_t count = 1) {
  if (fields.size() < count)
    throw Error(ErrorKind::usage, "suite '" + suite + "' needs at least " + std::to_string(count) + " field(s)");
  return fields;
}

}  // namespace detail

/// Direct mu (divergences of Ric plus P) against -1/2 Delta Scal + P for the Levi-Civita connection.
inline SuiteResult verify_bianchi(const KahlerChartSpec& spec, const SuiteOptions& opt = {}) {
  const double worst = detail::max_over_points(spec, opt, [&](const KahlerChartSpec& s, const std::vector<double>& x) {
    const PointGeometry g = point_geometry(s, x, opt.jet_order);
    return std::abs(moment_map_direct(g, levi_civita(g), 0.0).mu_raw - moment_map_kahler(g, 0.0).mu_raw);
  });
  return {"bianchi", {{spec.name + ": max |mu_direct - mu_kahler|", worst, opt.tol_or(1e-7),
                       std::to_string(opt.points) + " points"}}};
}

/// d/dt int mu(nabla + tA) F against Omega^E(L_{X_F} nabla, A) for random pairs.
inline SuiteResult verify_moment_property(const KahlerChartSpec& spec, const SuiteOptions& opt = {}) {
  std::mt19937_64 rng(opt.seed);
  const int m = spec.real_dim();
  Ball ball{std::vector<double>(static_cast<std::size_t>(m), 0.0), 0.6};
  for (int i = 0; i < m; ++i) ball.center[static_cast<std::size_t>(i)] = (i % 2 ? -0.1 : 0.2);
  const int nodes = opt.quad.nodes_per_axis > 0 ? opt.quad.nodes_per_axis : (m <= 2 ? 24 : 8);
  SuiteResult out{"moment_property", {}};
  for (int t = 0; t < opt.trials; ++t) {
    const MomentPropertyTrial tr = moment_property_trial(spec, ball, rng, 1e-4, nodes);
    out.checks.push_back({spec.name + ": trial " + std::to_string(t + 1) + " relative error", tr.rel_error, opt.tol_or(1e-3),
                          "lhs " + detail::sci(tr.lhs) + ", rhs " + detail::sci(tr.rhs)});
  }
  return out;
}

/// tr(R ^ R) = 16 pi^2 (c2 - c1 c1 / 2), componentwise.
inline SuiteResult verify_chern_identity(const KahlerChartSpec& spec, const SuiteOptions& opt = {}) {
  const double worst = detail::max_over_points(spec, opt, [](const KahlerChartSpec& s, const std::vector<double>& x) {
    const PointGeometry g = point_geometry(s, x, 4);
    return pontryagin_identity_residual(curvature(g, levi_civita(g), 0));
  });
  return {"chern_identity",
          {{spec.name + ": max tr(R^R) - 16 pi^2 (c2 - c1^2/2)", worst, opt.tol_or(1e-8), std::to_string(opt.points) + " points"}}};
}

/// tr L(Z^{1,0}) = -(i/2)(Delta F + i Delta H) with the analyst's Laplacian.
inline SuiteResult verify_trace_identity(const KahlerChartSpec& spec, const std::vector<HolomorphicFieldSpec>& fields,
                                         const SuiteOptions& opt = {}) {
  SuiteResult out{"trace_identity", {}};
  for (const auto& f : detail::require_fields(fields, "trace_identity")) {
    const double worst = detail::max_over_points(spec, opt, [&](const KahlerChartSpec& s, const std::vector<double>& x) {
      const PointGeometry g = point_geometry(s, x, 4);
      const FieldChart fc = field_on(f, s);
      const EndoL L = endo_L(g, jet_of(g, fc.Z, 1));
      const double dF = laplacian_sign * laplacian(g, jet_of(g, fc.F, 2));
      const double dH = laplacian_sign * laplacian(g, jet_of(g, fc.H, 2));
      return std::abs(L.trace() - cplx(0.0, -0.5) * cplx(dF, dH));
    });
    out.checks.push_back({spec.name + " / " + f.name + ": max |tr L + (i/2)(Delta F + i Delta H)|", worst, opt.tol_or(1e-7),
                          std::to_string(opt.points) + " points"});
  }
  return out;
}

/// F^{omega + dd^c(a phi)}(Z) across amplitudes, phi the standard bump.
inline SuiteResult verify_class_invariance(const KahlerChartSpec& spec, const std::vector<HolomorphicFieldSpec>& fields,
                                           const SuiteOptions& opt = {}) {
  SuiteResult out{"class_invariance", {}};
  const Ball support = default_support(spec);
  for (const auto& f : detail::require_fields(fields, "class_invariance")) {
    const auto r = class_invariance_check(spec, f, bump_function(support, kPotentialBumpPower), support, opt.amplitudes, opt.quad);
    std::string note;
    int accepted = 0;
    for (const auto& row : r.rows) {
      note += (note.empty() ? "" : "; ") + std::string("a=") + detail::sci(row.amplitude) + ": ";
      if (row.rejected) {
        note += "rejected (" + row.reason + ")";
      } else {
        ++accepted;
        note += detail::sci(row.F_omega.value) + " +- " + detail::sci(row.F_omega.error);
      }
    }
    // Fewer than two usable amplitudes leaves nothing to compare.
    const double residual = accepted >= 2 ? r.max_ratio : INFINITY;
    out.checks.push_back({spec.name + " / " + f.name + ": max |F(a) - F(0)| / (err(a) + err(0))", residual, opt.tol_or(10.0), note});
  }
  return out;
}

/// F^omega([Y, Z]) = 0 for each pair of the given fields.
inline SuiteResult verify_character(const KahlerChartSpec& spec, const std::vector<HolomorphicFieldSpec>& fields,
                                    const SuiteOptions& opt = {}) {
  SuiteResult out{"character", {}};
  detail::require_fields(fields, "character", 2);
  for (std::size_t i = 0; i < fields.size(); ++i)
    for (std::size_t j = i + 1; j < fields.size(); ++j) {
      const auto c = character_check(spec, fields[i], fields[j], opt.quad);
      const double residual = c.F_bracket.error > 0.0 ? std::abs(c.F_bracket.value) / c.F_bracket.error
                                                      : (c.F_bracket.value == 0.0 ? 0.0 : INFINITY);
      out.checks.push_back({spec.name + ": |F([" + fields[i].name + "," + fields[j].name + "])| / err", residual,
                            opt.tol_or(10.0),
                            detail::sci(c.F_bracket.value) + " +- " + detail::sci(c.F_bracket.error)});
    }
  return out;
}

/// F^omega(Z) = Im F_q(Z), q = (8 pi^2 / (n-1)!)(c2 - c1 c1 / 2), within the combined error.
inline SuiteResult verify_identification(const KahlerChartSpec& spec, const std::vector<HolomorphicFieldSpec>& fields,
                                 const SuiteOptions& opt = {}) {
  if (spec.complex_dim < 2) throw Error(ErrorKind::unsupported, "prop41 needs complex dimension >= 2");
  SuiteResult out{"prop41", {}};
  const double scale = identification_scale(spec.complex_dim);
  for (const auto& f : detail::require_fields(fields, "prop41")) {
    const InvariantReport r = compute_invariants(spec, f, {true, false, true}, opt.quad);
    const GeneralizedValue& q = r.F_q.at(to_string(ChernPolynomial::c2_minus_half_c1c1));
    const double diff = std::abs(r.F_omega.value - scale * q.total.value.imag());
    const double combined = r.F_omega.error + scale * q.total.error;
    // Relative to the combined error; tol scales it (1: within the error).
    const double residual = combined > 0.0 ? diff / combined : (diff == 0.0 ? 0.0 : INFINITY);
    out.checks.push_back({spec.name + " / " + f.name + ": |F^omega - Im F_q| / combined error", residual, opt.tol_or(1.0),
                          "F^omega " + detail::sci(r.F_omega.value) + ", scaled Im F_q " +
                              detail::sci(scale * q.total.value.imag()) + ", diff " + detail::sci(diff)});
  }
  return out;
}

inline SuiteResult run_suite(const std::string& suite, const KahlerChartSpec& spec,
                             const std::vector<HolomorphicFieldSpec>& fields, const SuiteOptions& opt = {}) {
  if (suite == "bianchi") return verify_bianchi(spec, opt);
  if (suite == "moment_property") return verify_moment_property(spec, opt);
  if (suite == "chern_identity") return verify_chern_identity(spec, opt);
  if (suite == "trace_identity") return verify_trace_identity(spec, fields, opt);
  if (suite == "class_invariance") return verify_class_invariance(spec, fields, opt);
  if (suite == "character") return verify_character(spec, fields, opt);
  if (suite == "prop41") return verify_identification(spec, fields, opt);
  throw Error(ErrorKind::usage, "unknown suite '" + suite + "'");
}

/// max |mu - mu0| over every node of the manifold's quadrature atlas.
inline double max_mu_over_nodes(const KahlerChartSpec& spec, const QuadratureOptions& opt = {}) {
  const double mu0 = mu_zero(spec, opt).value;
  std::mutex lock;
  double worst = 0.0;
  const QuadratureAtlas atlas = atlas_for(spec, opt.nodes_for(spec.real_dim()));
  integrate_once(atlas, NodeDensity([&](const QuadratureNode& n) {
    const PointGeometry g = point_geometry(chart_of(spec, n.chart), n.x, 6);
    const double v = std::abs(moment_map_direct(g, levi_civita(g), mu0).value());
    const std::lock_guard<std::mutex> guard(lock);
    worst = std::max(worst, v);
    return std::vector<double>{v};
  }));
  return worst;
}

}  // namespace kfut
