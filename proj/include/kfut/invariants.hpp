#pragma once

// F^omega(Z) = int H mu omega^n/n!, the Chern-form invariants F_{c_k}, the
// generalized invariants F_q, and the harnesses that test class invariance,
// the character property and the moment-map property.
//
// Everything is integrated in one pass over the atlas: the mean-zero
// normalizations of F, H and mu are applied afterwards from the same
// integrals (int (H - h) mu = int H mu - h int mu, etc.).

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "kfut/chern_weil.hpp"
#include "kfut/fields.hpp"
#include "kfut/kahler_chart.hpp"
#include "kfut/manifolds.hpp"
#include "kfut/moment_map.hpp"
#include "kfut/quadrature.hpp"

namespace kfut {

struct Estimate {
  double value = 0.0;
  double error = 0.0;
};

struct ComplexEstimate {
  cplx value = 0.0;
  double error = 0.0;
};

struct GeneralizedValue {
  ComplexEstimate term1, term2, total;
};

struct InvariantReport {
  std::string manifold;
  std::string field;
  Estimate F_omega;
  std::map<int, ComplexEstimate> F_ck;
  std::map<std::string, GeneralizedValue> F_q;
  Estimate vol;
  Estimate mu0;
  double quad_error_estimate = 0.0;  // largest error estimate among the reported invariants
  double max_field_residual = 0.0;   // relative, over all nodes
};

struct InvariantRequest {
  bool moment = true;       // F^omega (needs order-6 geometry)
  bool chern = true;        // F_{c_k}
  bool generalized = true;  // F_q for every supported q
};

inline constexpr std::array<ChernPolynomial, 4> kAllPolynomials{ChernPolynomial::c1c1, ChernPolynomial::c2,
                                                                ChernPolynomial::c2_minus_half_c1c1, ChernPolynomial::td2};

namespace detail {

// Component layout of the one-pass density.
struct Layout {
  int n = 0;
  InvariantRequest want;
  static constexpr int vol = 0, F = 1, H = 2;
  static constexpr int mu = 3, Hmu = 4, P = 5;  // mu without mu0, i.e. div div Ric + P
  int chern_base() const { return 6; }
  int chern(int k, int part) const { return chern_base() + 4 * (k - 1) + part; }  // part: u ck re/im, ck re/im
  int q_base() const { return chern_base() + 4 * n; }
  int q(int index, int part) const { return q_base() + 6 * index + part; }  // u t1 re/im, t1 re/im, t2 re/im
  int size() const { return q_base() + 6 * static_cast<int>(kAllPolynomials.size()); }
};

inline std::vector<double> invariant_density(const Layout& lay, const HolomorphicFieldSpec& field, const KahlerChartSpec& s,
                                             std::span<const double> x, std::atomic<double>& worst_residual) {
  std::vector<double> out(static_cast<std::size_t>(lay.size()), 0.0);
  const int order = lay.want.moment ? 6 : 4;
  const PointGeometry geom = point_geometry(s, x, order);
  const FieldChart fc = field_on(field, s);
  const FieldResiduals res = holomorphic_residuals(fc, geom);
  const double rel = res.max() / std::max(1.0, res.field_norm);
  for (double prev = worst_residual.load(); rel > prev && !worst_residual.compare_exchange_weak(prev, rel);) {
  }
  require_valid_field(field.name, res, x);

  const double vol = geom.volume_density;
  const double F = jet_of(geom, fc.F, 0).value();
  const double H = jet_of(geom, fc.H, 0).value();
  const cplx u(F, H);
  auto put = [&](int i, double v) { out[static_cast<std::size_t>(i)] = v * vol; };
  put(Layout::vol, 1.0);
  put(Layout::F, F);
  put(Layout::H, H);

  const CurvatureBundle curv = curvature(geom, levi_civita(geom), lay.want.moment ? 2 : 0);
  if (lay.want.moment) {
    const MomentDensity m = moment_map_direct(geom, curv, 0.0);
    put(Layout::mu, m.mu_raw);
    put(Layout::Hmu, H * m.mu_raw);
    put(Layout::P, m.p_density);
  }
  if (lay.want.chern)
    for (int k = 1; k <= lay.n; ++k) {
      const cplx ck = futaki_chern_integrand(k, geom, curv, 1.0);
      put(lay.chern(k, 0), (u * ck).real());
      put(lay.chern(k, 1), (u * ck).imag());
      put(lay.chern(k, 2), ck.real());
      put(lay.chern(k, 3), ck.imag());
    }
  if (lay.want.generalized) {
    const EndoL L = endo_L(geom, jet_of(geom, fc.Z, 1));
    for (std::size_t i = 0; i < kAllPolynomials.size(); ++i) {
      const FutakiIntegrand t = generalized_futaki_integrand(kAllPolynomials[i], geom, curv, L, 1.0);
      const int qi = static_cast<int>(i);
      put(lay.q(qi, 0), (u * t.term1).real());
      put(lay.q(qi, 1), (u * t.term1).imag());
      put(lay.q(qi, 2), t.term1.real());
      put(lay.q(qi, 3), t.term1.imag());
      put(lay.q(qi, 4), t.term2.real());
      put(lay.q(qi, 5), t.term2.imag());
    }
  }
  return out;
}

}  // namespace detail

/// Raw one-pass integrals; assemble_report turns them into invariants.
struct InvariantIntegrals {
  detail::Layout layout;
  IntegralResult sums;
  double max_field_residual = 0.0;
};

inline ChartDensity invariant_chart_density(const detail::Layout& lay, const HolomorphicFieldSpec& field,
                                            std::atomic<double>& worst) {
  return [&lay, &field, &worst](const KahlerChartSpec& s, std::span<const double> x) {
    return detail::invariant_density(lay, field, s, x, worst);
  };
}

inline InvariantIntegrals integrate_invariants(const KahlerChartSpec& spec, const HolomorphicFieldSpec& field,
                                               const InvariantRequest& want = {}, const QuadratureOptions& opt = {}) {
  InvariantIntegrals out;
  out.layout = detail::Layout{spec.complex_dim, want};
  std::atomic<double> worst{0.0};
  out.sums = integrate_manifold(spec, invariant_chart_density(out.layout, field, worst), opt);
  out.max_field_residual = worst.load();
  return out;
}

/// Base integrals plus the patch of one deformation (the base pass is reused across amplitudes).
inline InvariantIntegrals add_deformation_patch(const InvariantIntegrals& base_pass, const KahlerChartSpec& deformed,
                                                const HolomorphicFieldSpec& field, const QuadratureOptions& opt = {}) {
  InvariantIntegrals out = base_pass;
  std::atomic<double> worst{base_pass.max_field_residual};
  out.sums += integrate_deformation_patch(deformed, invariant_chart_density(out.layout, field, worst), opt);
  out.max_field_residual = worst.load();
  return out;
}

inline InvariantReport assemble_report(const InvariantIntegrals& in, std::string manifold, std::string field) {
  const auto& lay = in.layout;
  const auto& v = in.sums.value;
  const auto& e = in.sums.error;
  auto at = [&](int i) { return v[static_cast<std::size_t>(i)]; };
  auto err = [&](int i) { return e[static_cast<std::size_t>(i)]; };
  auto cat = [&](int re, int im) { return cplx(at(re), at(im)); };
  auto cerr = [&](int re, int im) { return std::hypot(err(re), err(im)); };

  InvariantReport r;
  r.manifold = std::move(manifold);
  r.field = std::move(field);
  r.max_field_residual = in.max_field_residual;
  const double V = at(detail::Layout::vol), eV = err(detail::Layout::vol);
  r.vol = {V, eV};
  const cplx ubar = cplx(at(detail::Layout::F), at(detail::Layout::H)) / V;
  const double eu = (cerr(detail::Layout::F, detail::Layout::H) + std::abs(ubar) * eV) / V;
  double worst = 0.0;

  if (lay.want.moment) {
    const double P = at(detail::Layout::P), mu = at(detail::Layout::mu), Hmu = at(detail::Layout::Hmu);
    const double Hs = at(detail::Layout::H);
    r.mu0 = {P / V, (err(detail::Layout::P) + std::abs(P / V) * eV) / V};
    // int (H - h)(mu_raw - mu0) = int H mu_raw - (int H)(int mu_raw) / V
    r.F_omega.value = Hmu - Hs * mu / V;
    r.F_omega.error = err(detail::Layout::Hmu) + std::abs(mu / V) * err(detail::Layout::H) +
                      std::abs(Hs / V) * err(detail::Layout::mu) + std::abs(Hs * mu / (V * V)) * eV;
    worst = std::max(worst, r.F_omega.error);
  }
  if (lay.want.chern)
    for (int k = 1; k <= lay.n; ++k) {
      const cplx uck = cat(lay.chern(k, 0), lay.chern(k, 1)), ck = cat(lay.chern(k, 2), lay.chern(k, 3));
      ComplexEstimate c{uck - ubar * ck, cerr(lay.chern(k, 0), lay.chern(k, 1)) + std::abs(ubar) * cerr(lay.chern(k, 2), lay.chern(k, 3)) +
                                              eu * std::abs(ck)};
      r.F_ck[k] = c;
      worst = std::max(worst, c.error);
    }
  if (lay.want.generalized)
    for (std::size_t i = 0; i < kAllPolynomials.size(); ++i) {
      const int qi = static_cast<int>(i);
      GeneralizedValue g;
      const cplx ut1 = cat(lay.q(qi, 0), lay.q(qi, 1)), t1 = cat(lay.q(qi, 2), lay.q(qi, 3));
      g.term1 = {ut1 - ubar * t1, cerr(lay.q(qi, 0), lay.q(qi, 1)) + std::abs(ubar) * cerr(lay.q(qi, 2), lay.q(qi, 3)) + eu * std::abs(t1)};
      g.term2 = {cat(lay.q(qi, 4), lay.q(qi, 5)), cerr(lay.q(qi, 4), lay.q(qi, 5))};
      g.total = {g.term1.value + g.term2.value, g.term1.error + g.term2.error};
      r.F_q[to_string(kAllPolynomials[i])] = g;
      worst = std::max(worst, g.total.error);
    }
  r.quad_error_estimate = worst;
  return r;
}

inline InvariantReport compute_invariants(const KahlerChartSpec& spec, const HolomorphicFieldSpec& field,
                                          const InvariantRequest& want = {}, const QuadratureOptions& opt = {}) {
  return assemble_report(integrate_invariants(spec, field, want, opt), spec.name, field.name);
}

inline Estimate futaki_moment(const KahlerChartSpec& spec, const HolomorphicFieldSpec& field, const QuadratureOptions& opt = {}) {
  return compute_invariants(spec, field, {true, false, false}, opt).F_omega;
}

inline ComplexEstimate futaki_chern(const KahlerChartSpec& spec, const HolomorphicFieldSpec& field, int k,
                                    const QuadratureOptions& opt = {}) {
  if (k < 1 || k > spec.complex_dim)
    throw Error(ErrorKind::shape, "F_{c_" + std::to_string(k) + "} needs 1 <= k <= complex dimension");
  return compute_invariants(spec, field, {false, true, false}, opt).F_ck.at(k);
}

inline GeneralizedValue futaki_generalized(const KahlerChartSpec& spec, const HolomorphicFieldSpec& field, ChernPolynomial q,
                                           const QuadratureOptions& opt = {}) {
  return compute_invariants(spec, field, {false, false, true}, opt).F_q.at(to_string(q));
}

/// mu0 = int P omega^n/n! / vol, the mean of P.
inline Estimate mu_zero(const KahlerChartSpec& spec, const QuadratureOptions& opt = {}) {
  const IntegralResult r = integrate_manifold(
      spec,
      [](const KahlerChartSpec& s, std::span<const double> x) {
        const PointGeometry g = point_geometry(s, x, 4);
        const double P = pontryagin_density(g, curvature(g, levi_civita(g), 0));
        return std::vector<double>{g.volume_density, P * g.volume_density};
      },
      opt);
  const double V = r.value[0];
  return {r.value[1] / V, (r.error[1] + std::abs(r.value[1] / V) * r.error[0]) / V};
}

/// The Chern-Weil normalization of the identity F^omega = Im F_q:
/// q = (8 pi^2 / (n-1)!) (c2 - c1 c1 / 2).
inline double identification_scale(int n) { return 8.0 * std::numbers::pi * std::numbers::pi / factorial(n - 1); }

// ---------------------------------------------------------------------------
// Harnesses

struct ClassInvarianceRow {
  double amplitude = 0.0;
  bool rejected = false;
  std::string reason;
  Estimate F_omega;
};

struct ClassInvarianceResult {
  std::vector<ClassInvarianceRow> rows;
  double max_deviation = 0.0;     // max |F(a) - F(0)| over accepted amplitudes
  double max_ratio = 0.0;         // max |F(a) - F(0)| / (err(a) + err(0))
  bool pass(double factor = 10.0) const { return max_ratio <= factor; }
};

/// F^{omega_phi}(Z) for omega_phi = omega + dd^c(a phi), phi supported in `support`.
/// Amplitudes whose metric fails positivity at a node are rejected, not used.
inline ClassInvarianceResult class_invariance_check(const KahlerChartSpec& base, const HolomorphicFieldSpec& field,
                                                    const ScalarField& phi, const Ball& support,
                                                    const std::vector<double>& amplitudes, const QuadratureOptions& opt = {}) {
  const InvariantRequest want{true, false, false};
  const InvariantIntegrals base_pass = integrate_invariants(base, field, want, opt);
  ClassInvarianceResult out;
  std::optional<Estimate> reference;
  for (double a : amplitudes) {
    ClassInvarianceRow row;
    row.amplitude = a;
    try {
      InvariantIntegrals pass = base_pass;
      if (a != 0.0) pass = add_deformation_patch(base_pass, deform(base, phi, a, support), field, opt);
      row.F_omega = assemble_report(pass, base.name, field.name).F_omega;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::not_kahler && e.kind() != ErrorKind::degenerate) throw;
      row.rejected = true;
      row.reason = e.what();
    }
    if (!row.rejected) {
      if (!reference) reference = row.F_omega;
      const double dev = std::abs(row.F_omega.value - reference->value);
      const double tol = row.F_omega.error + reference->error;
      out.max_deviation = std::max(out.max_deviation, dev);
      out.max_ratio = std::max(out.max_ratio, tol > 0.0 ? dev / tol : (dev > 0.0 ? INFINITY : 0.0));
    }
    out.rows.push_back(std::move(row));
  }
  return out;
}

struct CharacterResult {
  Estimate F_bracket;
  double ratio = 0.0;  // |F| / err
  bool pass(double factor = 10.0) const { return std::abs(F_bracket.value) <= factor * F_bracket.error; }
};

/// F^omega([Y, Z]); Y and Z are given on the undeformed atlas and adapted to
/// the deformation carried by `spec` like any other field.
inline CharacterResult character_check(const KahlerChartSpec& spec, const HolomorphicFieldSpec& Y,
                                       const HolomorphicFieldSpec& Z, const QuadratureOptions& opt = {}) {
  const HolomorphicFieldSpec b = bracket_field(Y, Z, "[" + Y.name + "," + Z.name + "]");
  CharacterResult r;
  r.F_bracket = futaki_moment(spec, b, opt);
  r.ratio = r.F_bracket.error > 0.0 ? std::abs(r.F_bracket.value) / r.F_bracket.error : 0.0;
  return r;
}

struct MomentPropertyTrial {
  double lhs = 0.0;          // Richardson-extrapolated d/dt int mu(nabla + tA) F
  double rhs = 0.0;          // Omega^E(L_{X_F} nabla, A) via the Lambda-triple density
  double rhs_wedge = 0.0;    // the same pairing via tr(A ^ B) ^ omega^{n-1}
  double rel_error = 0.0;
};

/// One (F, A) pair: F a random polynomial plus exp term, A a random symmetric
/// bump supported in `support` (chart 0). Integrals run over the support ball,
/// outside of which both sides vanish identically.
inline MomentPropertyTrial moment_property_trial(const KahlerChartSpec& spec, const Ball& support, std::mt19937_64& rng,
                                                 double t_step = 1e-4, int nodes = 24) {
  const int m = spec.real_dim();
  const ConnectionBump bump = ConnectionBump::random(m, support, rng);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> lin(static_cast<std::size_t>(m)), quad(static_cast<std::size_t>(m * m));
  for (auto& c : lin) c = u(rng);
  for (auto& c : quad) c = u(rng);
  const double ce = u(rng);
  const ScalarField F = [lin, quad, ce, m](std::span<const Jet> x) {
    Jet s = ce * exp(x[0]);
    for (int i = 0; i < m; ++i) {
      s.add_scaled(lin[static_cast<std::size_t>(i)], x[static_cast<std::size_t>(i)]);
      for (int j = 0; j < m; ++j) s.add_scaled(quad[static_cast<std::size_t>(i * m + j)], x[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(j)] * x[static_cast<std::size_t>(j)]);
    }
    return s;
  };
  const QuadratureAtlas atlas = ball_atlas(support, nodes);
  auto I = [&](double t) {
    return integrate_once(atlas, Density([&](std::span<const double> x) {
             const PointGeometry g = point_geometry(spec, x, 6);
             const MomentDensity d = moment_map_direct(g, perturb(g, bump.lowered(x, 6), t), 0.0);
             return std::vector<double>{d.mu_raw * jet_of(g, F, 0).value() * g.volume_density};
           }))
        .value[0];
  };
  auto D = [&](double h) { return (I(h) - I(-h)) / (2.0 * h); };
  MomentPropertyTrial tr;
  tr.lhs = (4.0 * D(0.5 * t_step) - D(t_step)) / 3.0;
  const IntegralResult rhs = integrate_once(atlas, Density([&](std::span<const double> x) {
    const PointGeometry g = point_geometry(spec, x, 4);
    const Tensor L = lie_derivative_connection(g, levi_civita(g), jet_of(g, F, 3));
    const Tensor A = raise_endomorphism_field(g, values(bump.lowered(x, 0)));
    const OmegaEDensity o = omega_e_density(g, L, A);
    return std::vector<double>{o.lambda_triple * g.volume_density, o.endo_wedge * g.volume_density};
  }));
  tr.rhs = rhs.value[0];
  tr.rhs_wedge = rhs.value[1];
  tr.rel_error = std::abs(tr.lhs - tr.rhs) / std::max(std::abs(tr.rhs), 1e-300);
  return tr;
}

}  // namespace kfut
