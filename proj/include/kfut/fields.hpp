#pragma once

// Holomorphic vector fields Z = X_F + J X_H given chart by chart, the checks
// that certify them, and the built-in fields induced by matrices acting on
// homogeneous coordinates.
//
// Conventions: Z^{1,0} has components Z^{x_j} + i Z^{y_j}; u_Z = F + iH solves
// i(Z^{1,0}) omega = dbar u_Z; J X_H = grad H.

#include <cmath>
#include <complex>
#include <span>
#include <string>
#include <vector>

#include "kfut/error.hpp"
#include "kfut/kahler_chart.hpp"

namespace kfut {

struct FieldChart {
  VectorField Z;  // real components (Z^{x_1}, Z^{y_1}, ...)
  ScalarField F;
  ScalarField H;
};

struct HolomorphicFieldSpec {
  std::string name;
  std::vector<FieldChart> charts;  // one per affine chart of the manifold

  const FieldChart& on(int chart) const {
    if (chart < 0 || chart >= static_cast<int>(charts.size()))
      throw Error(ErrorKind::usage, "field '" + name + "' has no expression in chart " + std::to_string(chart));
    return charts[static_cast<std::size_t>(chart)];
  }
};

/// Complex-valued jet as a pair of real jets.
struct CJet {
  Jet re, im;

  friend CJet operator+(const CJet& a, const CJet& b) { return {a.re + b.re, a.im + b.im}; }
  friend CJet operator-(const CJet& a, const CJet& b) { return {a.re - b.re, a.im - b.im}; }
  friend CJet operator*(const CJet& a, const CJet& b) { return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re}; }
  friend CJet operator*(std::complex<double> s, const CJet& a) {
    return {s.real() * a.re - s.imag() * a.im, s.real() * a.im + s.imag() * a.re};
  }
  CJet conj() const { return {re, -1.0 * im}; }
  Jet norm2() const { return re * re + im * im; }
};

namespace detail {

inline void require_coordinate_jets(std::span<const Jet> x) {
  for (std::size_t v = 0; v < x.size(); ++v) {
    const auto c = x[v].coeffs();
    for (std::size_t i = 1; i < std::min(c.size(), x.size() + 1); ++i)
      if (c[i] != (i == v + 1 ? 1.0 : 0.0))
        throw Error(ErrorKind::unsupported, "adapted field potentials must be evaluated on coordinate jets");
  }
}

// Z^{1,0} and u_Z for the field induced by M on CP^n in affine chart k, where
// the chart's coordinates are Z_j / Z_k for j != k in increasing order.
struct ProjectiveValues {
  std::vector<CJet> z10;
  CJet u;
};

inline ProjectiveValues projective_values(const std::vector<std::complex<double>>& M, int n, int k, std::span<const Jet> x) {
  const Jet zero = x[0].lift(0.0), one = x[0].lift(1.0);
  std::vector<CJet> W(static_cast<std::size_t>(n + 1), CJet{zero, zero});
  std::vector<int> pos;
  int i = 0;
  for (int j = 0; j <= n; ++j) {
    if (j == k) {
      W[static_cast<std::size_t>(j)] = CJet{one, zero};
      continue;
    }
    W[static_cast<std::size_t>(j)] = CJet{x[static_cast<std::size_t>(2 * i)], x[static_cast<std::size_t>(2 * i + 1)]};
    pos.push_back(j);
    ++i;
  }
  std::vector<CJet> V(static_cast<std::size_t>(n + 1), CJet{zero, zero});
  for (int a = 0; a <= n; ++a)
    for (int b = 0; b <= n; ++b) {
      const auto mab = M[static_cast<std::size_t>(a * (n + 1) + b)];
      if (mab != 0.0) V[static_cast<std::size_t>(a)] = V[static_cast<std::size_t>(a)] + mab * W[static_cast<std::size_t>(b)];
    }
  ProjectiveValues out;
  for (int c = 0; c < n; ++c) {
    const auto& w = W[static_cast<std::size_t>(pos[static_cast<std::size_t>(c)])];
    out.z10.push_back(V[static_cast<std::size_t>(pos[static_cast<std::size_t>(c)])] - w * V[static_cast<std::size_t>(k)]);
  }
  CJet num{zero, zero};
  Jet den = zero;
  for (int a = 0; a <= n; ++a) {
    num = num + W[static_cast<std::size_t>(a)].conj() * V[static_cast<std::size_t>(a)];
    den += W[static_cast<std::size_t>(a)].norm2();
  }
  const Jet inv = 1.0 / den;
  out.u = std::complex<double>(0.0, 2.0) * CJet{num.re * inv, num.im * inv};
  return out;
}

inline std::vector<Jet> real_components(const std::vector<CJet>& z10) {
  std::vector<Jet> out;
  for (const auto& c : z10) {
    out.push_back(c.re);
    out.push_back(c.im);
  }
  return out;
}

}  // namespace detail

/// Field on CP^n induced by the linear flow W -> exp(tM) W on homogeneous
/// coordinates, with u_Z = 2i <W, MW> / |W|^2; M is (n+1) x (n+1), row-major.
inline HolomorphicFieldSpec projective_field(std::string name, int n, std::vector<std::complex<double>> M) {
  if (M.size() != static_cast<std::size_t>((n + 1) * (n + 1))) throw Error(ErrorKind::shape, "matrix size does not match CP^n");
  HolomorphicFieldSpec f{std::move(name), {}};
  for (int k = 0; k <= n; ++k) {
    FieldChart c;
    c.Z = [M, n, k](std::span<const Jet> x) { return detail::real_components(detail::projective_values(M, n, k, x).z10); };
    c.F = [M, n, k](std::span<const Jet> x) { return detail::projective_values(M, n, k, x).u.re; };
    c.H = [M, n, k](std::span<const Jet> x) { return detail::projective_values(M, n, k, x).u.im; };
    f.charts.push_back(std::move(c));
  }
  return f;
}

/// Field M1 + M2 on CP^1 x CP^1; chart k uses chart k % 2 of the first factor
/// and chart k / 2 of the second.
inline HolomorphicFieldSpec product_field(std::string name, std::vector<std::complex<double>> M1,
                                          std::vector<std::complex<double>> M2) {
  HolomorphicFieldSpec f{std::move(name), {}};
  for (int k = 0; k < 4; ++k) {
    auto eval = [M1, M2, k](std::span<const Jet> x) {
      auto a = detail::projective_values(M1, 1, k % 2, x.subspan(0, 2));
      auto b = detail::projective_values(M2, 1, k / 2, x.subspan(2, 2));
      std::vector<CJet> z{a.z10[0], b.z10[0]};
      return std::make_pair(z, a.u + b.u);
    };
    FieldChart c;
    c.Z = [eval](std::span<const Jet> x) { return detail::real_components(eval(x).first); };
    c.F = [eval](std::span<const Jet> x) { return eval(x).second.re; };
    c.H = [eval](std::span<const Jet> x) { return eval(x).second.im; };
    f.charts.push_back(std::move(c));
  }
  return f;
}

/// s Z, with F and H scaled alike.
inline HolomorphicFieldSpec scaled_field(const HolomorphicFieldSpec& f, double s, std::string name) {
  HolomorphicFieldSpec out{std::move(name), {}};
  for (const auto& c : f.charts) {
    FieldChart d;
    d.Z = [z = c.Z, s](std::span<const Jet> x) {
      auto v = z(x);
      for (auto& j : v) j *= s;
      return v;
    };
    d.F = [F = c.F, s](std::span<const Jet> x) { return s * F(x); };
    d.H = [H = c.H, s](std::span<const Jet> x) { return s * H(x); };
    out.charts.push_back(std::move(d));
  }
  return out;
}

/// a Y + b Z.
inline HolomorphicFieldSpec combine_fields(const HolomorphicFieldSpec& Y, double a, const HolomorphicFieldSpec& Z, double b,
                                           std::string name) {
  if (Y.charts.size() != Z.charts.size()) throw Error(ErrorKind::shape, "fields live on different atlases");
  HolomorphicFieldSpec out{std::move(name), {}};
  for (std::size_t k = 0; k < Y.charts.size(); ++k) {
    const FieldChart y = Y.charts[k], z = Z.charts[k];
    FieldChart d;
    d.Z = [y, z, a, b](std::span<const Jet> x) {
      auto v = y.Z(x);
      auto w = z.Z(x);
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = a * v[i] + b * w[i];
      return v;
    };
    d.F = [y, z, a, b](std::span<const Jet> x) { return a * y.F(x) + b * z.F(x); };
    d.H = [y, z, a, b](std::span<const Jet> x) { return a * y.H(x) + b * z.H(x); };
    out.charts.push_back(std::move(d));
  }
  return out;
}

namespace detail {

// V(f) = V^a d_a f with f differentiated one order above the input jets.
inline Jet directional(std::span<const Jet> x, const std::vector<Jet>& V, const ScalarField& f) {
  require_coordinate_jets(x);
  std::vector<double> p;
  for (const auto& xi : x) p.push_back(xi.value());
  const int order = x[0].order();
  const Jet fj = f(coordinate_jets(p, order + 1));
  Jet s = x[0].lift(0.0);
  for (std::size_t a = 0; a < V.size(); ++a) s += V[a] * fj.partial(static_cast<int>(a));
  return s;
}

inline std::vector<Jet> rotate(const std::vector<Jet>& Z) {
  std::vector<Jet> JZ = Z;
  for (std::size_t k = 0; k + 1 < Z.size(); k += 2) {
    JZ[k] = -1.0 * Z[k + 1];
    JZ[k + 1] = Z[k];
  }
  return JZ;
}

}  // namespace detail

/// Potentials of the same Z for omega + dd^c phi: F + (JZ)(phi), H + Z(phi).
inline FieldChart adapt_to_deformation(const FieldChart& c, const ScalarField& phi) {
  FieldChart out;
  out.Z = c.Z;
  out.F = [c, phi](std::span<const Jet> x) { return c.F(x) + detail::directional(x, detail::rotate(c.Z(x)), phi); };
  out.H = [c, phi](std::span<const Jet> x) { return c.H(x) + detail::directional(x, c.Z(x), phi); };
  return out;
}

/// The field's potentials with respect to the Kähler form of `chart`,
/// following the chain of deformations back to the base manifold.
inline FieldChart field_on(const HolomorphicFieldSpec& f, const KahlerChartSpec& chart) {
  if (chart.base && chart.deformation) return adapt_to_deformation(field_on(f, *chart.base), chart.deformation);
  return f.on(chart.chart_index);
}

/// [Y, Z] with u_{[Y,Z]} = Y^{1,0}(u_Z) - Z^{1,0}(u_Y) (up to a constant,
/// removed later by the mean-zero projection). Undeformed charts only.
inline HolomorphicFieldSpec bracket_field(const HolomorphicFieldSpec& Y, const HolomorphicFieldSpec& Z, std::string name) {
  if (Y.charts.size() != Z.charts.size()) throw Error(ErrorKind::shape, "fields live on different atlases");
  HolomorphicFieldSpec out{std::move(name), {}};
  for (std::size_t k = 0; k < Y.charts.size(); ++k) {
    const FieldChart y = Y.charts[k], z = Z.charts[k];
    // Z values and first derivatives one order above the requested jets.
    auto up = [](const VectorField& V, std::span<const Jet> x) {
      detail::require_coordinate_jets(x);
      std::vector<double> p;
      for (const auto& xi : x) p.push_back(xi.value());
      return V(coordinate_jets(p, x[0].order() + 1));
    };
    FieldChart d;
    d.Z = [y, z, up](std::span<const Jet> x) {
      const auto Yv = up(y.Z, x), Zv = up(z.Z, x);
      const std::size_t m = x.size();
      const int order = x[0].order();
      std::vector<Jet> out(m, x[0].lift(0.0));
      for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b) {
          out[a] += mul(Yv[b].truncated(order), Zv[a].partial(static_cast<int>(b)), order);
          out[a] -= mul(Zv[b].truncated(order), Yv[a].partial(static_cast<int>(b)), order);
        }
      return out;
    };
    // Y^{1,0} u = (Y u - i (JY) u) / 2 for complex u.
    auto u = [y, z](std::span<const Jet> x) {
      auto half = [&](const FieldChart& A, const FieldChart& B) {
        const auto Av = A.Z(x);
        const auto JA = detail::rotate(Av);
        const Jet aF = detail::directional(x, Av, B.F), aH = detail::directional(x, Av, B.H);
        const Jet jF = detail::directional(x, JA, B.F), jH = detail::directional(x, JA, B.H);
        // (aF + i aH - i (jF + i jH)) / 2
        return CJet{0.5 * (aF + jH), 0.5 * (aH - jF)};
      };
      return half(y, z) - half(z, y);
    };
    d.F = [u](std::span<const Jet> x) { return u(x).re; };
    d.H = [u](std::span<const Jet> x) { return u(x).im; };
    out.charts.push_back(std::move(d));
  }
  return out;
}

/// Pointwise residuals of the defining relations, with the field's size for scale.
struct FieldResiduals {
  double decomposition = 0.0;  // |i(Z) omega - (dF + i(J X_H) omega)|
  double holomorphic = 0.0;    // |L_Z J|
  double u_equation = 0.0;     // |i(Z^{1,0}) omega - dbar u_Z|
  double field_norm = 0.0;     // max |Z^a|, |dZ|
  double max() const { return std::max({decomposition, holomorphic, u_equation}); }
};

inline FieldResiduals holomorphic_residuals(const FieldChart& f, const PointGeometry& geom) {
  const int m = geom.dim;
  const auto Z = jet_of(geom, f.Z, 1);
  const Jet F = jet_of(geom, f.F, 1), H = jet_of(geom, f.H, 1);
  const auto XH = hamiltonian_field(geom, H);
  FieldResiduals r;
  for (int a = 0; a < m; ++a) {
    r.field_norm = std::max(r.field_norm, std::abs(Z[static_cast<std::size_t>(a)].value()));
    for (int b = 0; b < m; ++b) r.field_norm = std::max(r.field_norm, std::abs(Z[static_cast<std::size_t>(a)].partial(b).value()));
  }
  std::vector<double> Zv(static_cast<std::size_t>(m)), JZ(static_cast<std::size_t>(m)), JXH(static_cast<std::size_t>(m));
  for (int k = 0; k + 1 < m; k += 2) {
    Zv[static_cast<std::size_t>(k)] = Z[static_cast<std::size_t>(k)].value();
    Zv[static_cast<std::size_t>(k + 1)] = Z[static_cast<std::size_t>(k + 1)].value();
    JZ[static_cast<std::size_t>(k)] = -Zv[static_cast<std::size_t>(k + 1)];
    JZ[static_cast<std::size_t>(k + 1)] = Zv[static_cast<std::size_t>(k)];
    JXH[static_cast<std::size_t>(k)] = -XH[static_cast<std::size_t>(k + 1)].value();
    JXH[static_cast<std::size_t>(k + 1)] = XH[static_cast<std::size_t>(k)].value();
  }
  auto contract = [&](const std::vector<double>& V, int b) {
    double s = 0.0;
    for (int a = 0; a < m; ++a) s += V[static_cast<std::size_t>(a)] * geom.omega(a, b).value();
    return s;
  };
  for (int b = 0; b < m; ++b) {
    const double dF = F.partial(b).value(), dH = H.partial(b).value();
    r.decomposition = std::max(r.decomposition, std::abs(contract(Zv, b) - dF - contract(JXH, b)));
    // dbar u (d_b) = (du(d_b) + i du(J d_b)) / 2, J d_{x_k} = d_{y_k}, J d_{y_k} = -d_{x_k}
    const int partner = b % 2 == 0 ? b + 1 : b - 1;
    const double sign = b % 2 == 0 ? 1.0 : -1.0;
    const std::complex<double> du_b(dF, dH);
    const std::complex<double> du_Jb = sign * std::complex<double>(F.partial(partner).value(), H.partial(partner).value());
    const std::complex<double> dbar = 0.5 * (du_b + std::complex<double>(0.0, 1.0) * du_Jb);
    const std::complex<double> iz = 0.5 * std::complex<double>(contract(Zv, b), -contract(JZ, b));
    r.u_equation = std::max(r.u_equation, std::abs(iz - dbar));
  }
  // (L_Z J)^a_b = J^a_c d_b Z^c - J^c_b d_c Z^a for the constant J
  const Tensor J = standard_complex_structure(m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      double s = 0.0;
      for (int c = 0; c < m; ++c)
        s += J(a, c) * Z[static_cast<std::size_t>(c)].partial(b).value() - J(c, b) * Z[static_cast<std::size_t>(a)].partial(c).value();
      r.holomorphic = std::max(r.holomorphic, std::abs(s));
    }
  return r;
}

/// Residual level, relative to max(1, field norm), above which a field is rejected.
inline constexpr double kFieldResidualTolerance = 1e-8;

inline void require_valid_field(const std::string& name, const FieldResiduals& r, std::span<const double> point) {
  if (r.max() > kFieldResidualTolerance * std::max(1.0, r.field_norm)) {
    std::string where;
    for (double x : point) where += (where.empty() ? "" : ", ") + std::to_string(x);
    throw Error(ErrorKind::invalid_field, "field '" + name + "' fails its residual checks at (" + where +
                                              "): decomposition " + std::to_string(r.decomposition) + ", holomorphic " +
                                              std::to_string(r.holomorphic) + ", u " + std::to_string(r.u_equation));
  }
}

/// Built-in fields of the built-in manifolds. Matrix fields act on homogeneous
/// coordinates (Z_0 : ... : Z_n); "rot" fields are J times a circle action, so
/// their H is the circle's moment map and F = 0, and "spin" is the circle
/// action itself.
inline std::vector<HolomorphicFieldSpec> builtin_fields(const std::string& manifold) {
  using c = std::complex<double>;
  const c I(0.0, 1.0);
  std::vector<HolomorphicFieldSpec> out;
  if (manifold == "cp1") {
    out.push_back(projective_field("rot", 1, {0, 0, 0, -1.0}));
    out.push_back(projective_field("spin", 1, {0, 0, 0, I}));
    out.push_back(projective_field("boost_x", 1, {0, 1.0, 1.0, 0}));
  } else if (manifold == "cp2") {
    auto e = [](int a, int b, c v) {
      std::vector<c> M(9, 0.0);
      M[static_cast<std::size_t>(a * 3 + b)] = v;
      return M;
    };
    out.push_back(projective_field("rot1", 2, e(1, 1, -1.0)));
    out.push_back(projective_field("rot2", 2, e(2, 2, -1.0)));
    auto mix = e(1, 2, -1.0);
    mix[7] = -1.0;
    out.push_back(projective_field("mix", 2, mix));
    out.push_back(projective_field("shear12", 2, e(1, 2, 1.0)));
    auto boost = e(0, 1, 1.0);
    boost[3] = 1.0;
    out.push_back(projective_field("boost1", 2, boost));
  } else if (manifold == "cp1xcp1") {
    const std::vector<c> zero(4, 0.0), rot{0, 0, 0, -1.0}, boost{0, 1.0, 1.0, 0};
    out.push_back(product_field("rot1", rot, zero));
    out.push_back(product_field("rot2", zero, rot));
    out.push_back(product_field("boost1", boost, zero));
  } else if (manifold == "flat1" || manifold == "flat2") {
    // Translation d_x of the flat chart: omega = dx ^ dy, so F = y, H = 0. F is
    // a chart function only; flat charts are local models, not closed manifolds.
    HolomorphicFieldSpec t{"translate_x", {}};
    FieldChart fc;
    fc.Z = [](std::span<const Jet> x) {
      std::vector<Jet> z(x.size(), x[0].lift(0.0));
      z[0] = x[0].lift(1.0);
      return z;
    };
    fc.F = [](std::span<const Jet> x) { return x[1]; };
    fc.H = [](std::span<const Jet> x) { return x[0].lift(0.0); };
    t.charts.push_back(fc);
    out.push_back(std::move(t));
  }
  return out;
}

inline std::vector<std::string> builtin_field_names(const std::string& manifold) {
  std::vector<std::string> names;
  for (const auto& f : builtin_fields(manifold)) names.push_back(f.name);
  return names;
}

inline HolomorphicFieldSpec builtin_field(const std::string& manifold, const std::string& name) {
  for (auto& f : builtin_fields(manifold))
    if (f.name == name) return f;
  throw Error(ErrorKind::usage, "manifold '" + manifold + "' has no built-in field '" + name + "'");
}

}  // namespace kfut
