#pragma once

// Chern-Weil forms of T^{1,0}M for the Levi-Civita connection of a Kähler
// metric, the endomorphism L(Z^{1,0}) = nabla_Z - L_Z, and the integrands of
// the generalized Futaki invariants for degree-2 invariant polynomials.
//
// A real endomorphism A commuting with J acts on d/dz_k = (d_{x_k} - i d_{y_k}) / 2
// through the complex matrix M_jk = A(x_j, x_k) + i A(y_j, x_k).

#include <complex>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "kfut/error.hpp"
#include "kfut/forms.hpp"
#include "kfut/kahler_chart.hpp"
#include "kfut/moment_map.hpp"

namespace kfut {

using cplx = std::complex<double>;

/// (1,0) curvature as an n x n matrix of complex 2-forms, row-major.
inline std::vector<ComplexForm> holomorphic_curvature(const CurvatureBundle& curv) {
  const int m = curv.R.dim();
  const int n = m / 2;
  std::vector<ComplexForm> M;
  M.reserve(static_cast<std::size_t>(n * n));
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      M.push_back(ComplexForm::two_form(m, [&](int a, int b) {
        return cplx(curv.R(2 * j, 2 * k, a, b).value(), curv.R(2 * j + 1, 2 * k, a, b).value());
      }));
  return M;
}

struct ChernForms {
  ComplexForm c1;  // (i / 2 pi) tr M
  ComplexForm c2;  // ((tr A)^2 - tr(A ^ A)) / 2, A = (i / 2 pi) M
};

inline ChernForms chern_forms(const CurvatureBundle& curv) {
  const int m = curv.R.dim();
  const int n = m / 2;
  const auto M = holomorphic_curvature(curv);
  const cplx s(0.0, 0.5 / std::numbers::pi);
  auto at = [&](int j, int k) -> const ComplexForm& { return M[static_cast<std::size_t>(j * n + k)]; };
  ComplexForm tr(m, 2);
  for (int j = 0; j < n; ++j) tr += at(j, j);
  ComplexForm trAA(m, 4);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) trAA += at(j, k).wedge(at(k, j));
  ChernForms c;
  c.c1 = s * tr;
  c.c2 = (s * s * 0.5) * (tr.wedge(tr) - trAA);
  return c;
}

/// Ricci form rho(X, Y) = Ric(JX, Y).
inline RealForm ricci_form(const CurvatureBundle& curv) {
  const int m = curv.R.dim();
  const Tensor J = standard_complex_structure(m);
  return RealForm::two_form(m, [&](int a, int b) {
    double s = 0.0;
    for (int c = 0; c < m; ++c) s += J(c, a) * curv.ric(c, b).value();
    return s;
  });
}

/// max over components of |tr(R o^ R) - 16 pi^2 (c2 - c1 ^ c1 / 2)|, imaginary parts included.
inline double pontryagin_identity_residual(const CurvatureBundle& curv) {
  const ChernForms c = chern_forms(curv);
  const ComplexForm rhs = (16.0 * std::numbers::pi * std::numbers::pi) * (c.c2 - cplx(0.5) * c.c1.wedge(c.c1));
  return (complexify(trace_curvature_squared(curv)) - rhs).max_abs();
}

/// L(Z^{1,0}) at a point: W -> nabla_W Z, as a complex n x n matrix.
struct EndoL {
  int n = 0;
  std::vector<cplx> matrix;  // row-major
  double holomorphic_defect = 0.0;  // |[nabla Z, J]| / max(1, |nabla Z|)

  cplx operator()(int j, int k) const { return matrix[static_cast<std::size_t>(j * n + k)]; }
  cplx trace() const {
    cplx t = 0.0;
    for (int j = 0; j < n; ++j) t += (*this)(j, j);
    return t;
  }
};

/// Holomorphic defect above which endo_L rejects a field.
inline constexpr double kHolomorphicTolerance = 1e-6;

/// Z given as real component jets of order >= 1 at the geometry's point.
inline EndoL endo_L(const PointGeometry& geom, std::span<const Jet> Z) {
  const int m = geom.dim;
  if (static_cast<int>(Z.size()) != m) throw Error(ErrorKind::shape, "vector field has the wrong number of components");
  if (geom.gamma.empty()) throw Error(ErrorKind::order, "L(Z) needs Christoffel symbols");
  // A(a, b) = (nabla_b Z)^a
  Tensor A(m, 2, 0.0);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      if (Z[static_cast<std::size_t>(a)].order() < 1) throw Error(ErrorKind::order, "L(Z) needs first derivatives of Z");
      double s = Z[static_cast<std::size_t>(a)].partial(b).value();
      for (int c = 0; c < m; ++c) s += geom.gamma(a, b, c).value() * Z[static_cast<std::size_t>(c)].value();
      A(a, b) = s;
    }
  const Tensor J = standard_complex_structure(m);
  double defect = 0.0, scale = 1.0;
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      double c = 0.0;
      for (int k = 0; k < m; ++k) c += A(a, k) * J(k, b) - J(a, k) * A(k, b);
      defect = std::max(defect, std::abs(c));
      scale = std::max(scale, std::abs(A(a, b)));
    }
  EndoL L;
  L.n = m / 2;
  L.holomorphic_defect = defect / scale;
  if (L.holomorphic_defect > kHolomorphicTolerance)
    throw Error(ErrorKind::invalid_field,
                "field is not holomorphic at this point: |[nabla Z, J]| / |nabla Z| = " + std::to_string(L.holomorphic_defect));
  for (int j = 0; j < L.n; ++j)
    for (int k = 0; k < L.n; ++k) L.matrix.emplace_back(A(2 * j, 2 * k), A(2 * j + 1, 2 * k));
  return L;
}

/// Degree-2 invariant polynomials. Td2 follows the c2 + c1 c1 normalization.
enum class ChernPolynomial { c1c1, c2, c2_minus_half_c1c1, td2 };

inline const char* to_string(ChernPolynomial q) {
  switch (q) {
    case ChernPolynomial::c1c1: return "c1c1";
    case ChernPolynomial::c2: return "c2";
    case ChernPolynomial::c2_minus_half_c1c1: return "c2_minus_half_c1c1";
    case ChernPolynomial::td2: return "td2";
  }
  return "?";
}

inline ChernPolynomial parse_chern_polynomial(const std::string& s) {
  for (auto q : {ChernPolynomial::c1c1, ChernPolynomial::c2, ChernPolynomial::c2_minus_half_c1c1, ChernPolynomial::td2})
    if (s == to_string(q)) return q;
  throw Error(ErrorKind::unsupported, "invariant polynomial '" + s + "' (supported: c1c1, c2, c2_minus_half_c1c1, td2)");
}

// (weight of c1 c1, weight of c2)
inline std::pair<double, double> polynomial_weights(ChernPolynomial q) {
  switch (q) {
    case ChernPolynomial::c1c1: return {1.0, 0.0};
    case ChernPolynomial::c2: return {0.0, 1.0};
    case ChernPolynomial::c2_minus_half_c1c1: return {-0.5, 1.0};
    case ChernPolynomial::td2: return {1.0, 1.0};
  }
  return {0.0, 0.0};
}

/// Densities against omega^n / n! of
///   term1 = (n - 1) u_Z q(R) ^ omega^{n-2} / (n-2)!
///   term2 = [q(R - L)]_2 ^ omega^{n-1} / (n-1)!
/// where [.]_2 keeps the part linear in L: -2 tr L tr R for c1 c1 and
/// -(tr L tr R - tr(L R)) for c2, both after the (i / 2 pi) normalization.
///
/// L enters with a minus sign. With L = nabla Z (identity on z d/dz) and
/// u_Z = F + iH, only this sign makes F_q vanish on commutators; with +L the
/// two terms of F_{c1c1} for [E11, E12] on a deformed CP^2 are equal instead of
/// opposite. The same sign gives Im F_{8 pi^2 (c2 - c1c1/2)} = F^omega.
struct FutakiIntegrand {
  cplx term1 = 0.0;
  cplx term2 = 0.0;
};

inline FutakiIntegrand generalized_futaki_integrand(ChernPolynomial q, const PointGeometry& geom, const CurvatureBundle& curv,
                                                    const EndoL& L, cplx u) {
  const int m = geom.dim;
  const int n = m / 2;
  const auto [w11, w2] = polynomial_weights(q);
  const ComplexForm omega = complexify(omega_form(geom));
  const double vol = volume_top(geom);
  FutakiIntegrand out;

  if (n >= 2) {
    const ChernForms c = chern_forms(curv);
    const ComplexForm qR = cplx(w11) * c.c1.wedge(c.c1) + cplx(w2) * c.c2;
    out.term1 = cplx(n - 1) * u * qR.wedge(omega.power(n - 2)).top() / factorial(n - 2) / vol;
  }

  const auto M = holomorphic_curvature(curv);
  const cplx s(0.0, 0.5 / std::numbers::pi);
  ComplexForm trR(m, 2), trLR(m, 2);
  for (int j = 0; j < n; ++j) {
    trR += M[static_cast<std::size_t>(j * n + j)];
    for (int k = 0; k < n; ++k) trLR += L(j, k) * M[static_cast<std::size_t>(k * n + j)];
  }
  const cplx trL = L.trace();
  const ComplexForm lin = (-s * s) * (cplx(2.0 * w11) * (trL * trR) + cplx(w2) * (trL * trR - trLR));
  out.term2 = lin.wedge(omega.power(n - 1)).top() / factorial(n - 1) / vol;
  return out;
}

/// Density against omega^n / n! of (n - k + 1) u_Z c_k ^ omega^{n-k} / (n-k)!.
inline cplx futaki_chern_integrand(int k, const PointGeometry& geom, const CurvatureBundle& curv, cplx u) {
  const int n = geom.dim / 2;
  if (k < 1 || k > 2) throw Error(ErrorKind::unsupported, "Chern forms beyond c2 are not implemented");
  if (k > n) throw Error(ErrorKind::shape, "c_" + std::to_string(k) + " needs complex dimension >= " + std::to_string(k));
  const ChernForms c = chern_forms(curv);
  const ComplexForm& ck = k == 1 ? c.c1 : c.c2;
  const ComplexForm omega = complexify(omega_form(geom));
  return cplx(n - k + 1) * u * ck.wedge(omega.power(n - k)).top() / factorial(n - k) / volume_top(geom);
}

}  // namespace kfut
