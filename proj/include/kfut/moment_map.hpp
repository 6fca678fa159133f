#pragma once

// The moment map mu(nabla) of a symplectic connection, its Kähler form, the
// pairing Omega^E on connection perturbations, and the fundamental vector
// field L_{X_F} nabla of the Hamiltonian action.

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "kfut/error.hpp"
#include "kfut/forms.hpp"
#include "kfut/kahler_chart.hpp"

namespace kfut {

struct MomentDensity {
  std::vector<double> point;
  double mu_raw = 0.0;     // first term + P, before subtracting mu0
  double p_density = 0.0;  // P(nabla)
  double div_div_ric = 0.0;
  double pontryagin = 0.0;  // same as p_density; kept beside div_div_ric as the second component
  double mu0 = 0.0;

  double value() const { return mu_raw - mu0; }
};

/// A symplectic frame choice for the dual contraction: columns of `frame`
/// are e_1..e_m; the dual frame e^l is rebuilt from omega^{-1}.
struct Frame {
  std::vector<double> e;  // row-major m x m, column k is e_k
};

inline Frame coordinate_frame(int m) {
  Frame f;
  f.e.assign(static_cast<std::size_t>(m * m), 0.0);
  for (int i = 0; i < m; ++i) f.e[static_cast<std::size_t>(i * m + i)] = 1.0;
  return f;
}

/// A Darboux frame at the point: omega(e_{2k}, e_{2k+1}) = 1, other pairs 0
/// (symplectic Gram-Schmidt on the coordinate basis).
inline Frame darboux_frame(const PointGeometry& geom) {
  const int m = geom.dim;
  const Tensor w = values(geom.omega);
  auto om = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) s += a[static_cast<std::size_t>(i)] * w(i, j) * b[static_cast<std::size_t>(j)];
    return s;
  };
  std::vector<std::vector<double>> pool;
  for (int i = 0; i < m; ++i) {
    std::vector<double> v(static_cast<std::size_t>(m), 0.0);
    v[static_cast<std::size_t>(i)] = 1.0;
    pool.push_back(v);
  }
  std::vector<std::vector<double>> basis;
  while (!pool.empty()) {
    std::vector<double> a = pool.front();
    pool.erase(pool.begin());
    std::size_t partner = 0;
    double best = 0.0;
    for (std::size_t j = 0; j < pool.size(); ++j)
      if (std::abs(om(a, pool[j])) > std::abs(best)) {
        best = om(a, pool[j]);
        partner = j;
      }
    if (best == 0.0) throw Error(ErrorKind::degenerate, "omega is degenerate on the remaining frame vectors");
    std::vector<double> b = pool[partner];
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(partner));
    for (double& x : b) x /= best;
    for (auto& v : pool) {
      // v -= omega(v, b) a - omega(v, a) b keeps v omega-orthogonal to span(a, b)
      const double vb = om(v, b), va = om(v, a);
      for (int i = 0; i < m; ++i)
        v[static_cast<std::size_t>(i)] += -vb * a[static_cast<std::size_t>(i)] + va * b[static_cast<std::size_t>(i)];
    }
    basis.push_back(a);
    basis.push_back(b);
  }
  Frame f;
  f.e.assign(static_cast<std::size_t>(m * m), 0.0);
  for (int k = 0; k < m; ++k)
    for (int i = 0; i < m; ++i) f.e[static_cast<std::size_t>(i * m + k)] = basis[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)];
  return f;
}

/// (nabla^2_{(e_p, e_q)} Ric)(e^p, e^q) with omega(e_k, e^l) = delta_k^l.
inline double div_div_ricci(const PointGeometry& geom, const CurvatureBundle& curv, const Frame& frame) {
  const int m = geom.dim;
  if (curv.nabla2_ric.empty()) throw Error(ErrorKind::order, "second covariant derivative of Ricci not computed");
  // Dual frame E* = Lambda E^{-T}: omega(e_k, e*^l) = (E^T omega E*)_{kl} = delta.
  const Tensor lam = values(geom.lambda);
  const auto e_inv_t = dense::transpose(dense::inverse(frame.e, m), m);
  const auto dual = dense::matmul(lam.data(), e_inv_t, m);
  const Tensor T = values(curv.nabla2_ric);
  double s = 0.0;
  for (int p = 0; p < m; ++p)
    for (int q = 0; q < m; ++q)
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
          const double ep_a = frame.e[static_cast<std::size_t>(a * m + p)];
          const double eq_b = frame.e[static_cast<std::size_t>(b * m + q)];
          if (ep_a == 0.0 || eq_b == 0.0) continue;
          for (int c = 0; c < m; ++c)
            for (int d = 0; d < m; ++d)
              s += ep_a * eq_b * dual[static_cast<std::size_t>(c * m + p)] * dual[static_cast<std::size_t>(d * m + q)] * T(a, b, c, d);
        }
  return s;
}

/// End(TM)-valued curvature 2-forms: entry (i, j) is sum_{k<l} R^i_{jkl} dx^k ^ dx^l.
inline std::vector<RealForm> curvature_forms(const CurvatureBundle& curv) {
  const int m = curv.R.dim();
  std::vector<RealForm> out;
  out.reserve(static_cast<std::size_t>(m * m));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      out.push_back(RealForm::two_form(m, [&](int k, int l) { return curv.R(i, j, k, l).value(); }));
  return out;
}

inline RealForm omega_form(const PointGeometry& geom) {
  return RealForm::two_form(geom.dim, [&](int k, int l) { return geom.omega(k, l).value(); });
}

/// tr(R o^ R) = sum_{ij} R^i_j ^ R^j_i as a 4-form.
inline RealForm trace_curvature_squared(const CurvatureBundle& curv) {
  const int m = curv.R.dim();
  const auto Rf = curvature_forms(curv);
  RealForm tr(m, 4);
  if (m < 4) return tr;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      tr += Rf[static_cast<std::size_t>(i * m + j)].wedge(Rf[static_cast<std::size_t>(j * m + i)]);
  return tr;
}

/// Top coefficient of omega^n / n! against dx_1 ^ ... ^ dx_2n.
inline double volume_top(const PointGeometry& geom) {
  const int n = geom.dim / 2;
  return omega_form(geom).power(n).top() / factorial(n);
}

/// P(nabla): 1/2 tr(R o^ R) ^ omega^{n-2}/(n-2)! divided by omega^n/n!; zero for n = 1.
inline double pontryagin_density(const PointGeometry& geom, const CurvatureBundle& curv) {
  const int n = geom.dim / 2;
  if (n < 2) return 0.0;
  const RealForm top = trace_curvature_squared(curv).wedge(omega_form(geom).power(n - 2));
  return 0.5 * top.top() / factorial(n - 2) / volume_top(geom);
}

/// mu from an already computed curvature bundle (second Ricci derivatives required).
inline MomentDensity moment_map_direct(const PointGeometry& geom, const CurvatureBundle& curv, double mu0,
                                       const std::optional<Frame>& frame = std::nullopt) {
  if (curv.nabla2_ric.empty()) throw Error(ErrorKind::order, "mu needs second covariant derivatives of Ric");
  MomentDensity d;
  d.point = geom.point;
  d.div_div_ric = div_div_ricci(geom, curv, frame ? *frame : coordinate_frame(geom.dim));
  d.p_density = pontryagin_density(geom, curv);
  d.pontryagin = d.p_density;
  d.mu_raw = d.div_div_ric + d.p_density;
  d.mu0 = mu0;
  return d;
}

/// mu(nabla) at the geometry's point for an arbitrary symplectic connection.
inline MomentDensity moment_map_direct(const PointGeometry& geom, const ConnectionField& conn, double mu0,
                                       const std::optional<Frame>& frame = std::nullopt) {
  return moment_map_direct(geom, curvature(geom, conn, 2), mu0, frame);
}

/// -1/2 Delta Scal + P - mu0 for the Levi-Civita connection of Kähler data.
inline MomentDensity moment_map_kahler(const PointGeometry& geom, const ConnectionField& conn, double mu0) {
  if (!conn.is_levi_civita())
    throw Error(ErrorKind::unsupported, "the Kähler form of mu applies to the Levi-Civita connection only");
  const CurvatureBundle curv = curvature(geom, conn, 0);
  MomentDensity d;
  d.point = geom.point;
  d.div_div_ric = -0.5 * laplacian(geom, curv.scal);
  d.p_density = pontryagin_density(geom, curv);
  d.pontryagin = d.p_density;
  d.mu_raw = d.div_div_ric + d.p_density;
  d.mu0 = mu0;
  return d;
}

inline MomentDensity moment_map_kahler(const PointGeometry& geom, double mu0) {
  return moment_map_kahler(geom, levi_civita(geom), mu0);
}

/// (L_{X_F} nabla)(Y)Z = nabla^2_{(Y,Z)} X_F + R(X_F, Y) Z as L(a, y, z) = L^a_{yz},
/// values at the point. F needs jets of order >= 3.
inline Tensor lie_derivative_connection(const PointGeometry& geom, const ConnectionField& conn, const Jet& F) {
  const int m = geom.dim;
  if (F.order() < 3) throw Error(ErrorKind::order, "L_{X_F} nabla needs three derivatives of F");
  const auto X = hamiltonian_field(geom, F);
  JetTensor Xt(m, 1);
  for (int a = 0; a < m; ++a) Xt(a) = X[static_cast<std::size_t>(a)];
  const JetTensor& G = conn.coefficients;
  const JetTensor dX = covariant_derivative(Xt, {true}, G);          // (c, a) = (nabla_c X)^a
  const JetTensor ddX = covariant_derivative(dX, {false, true}, G);  // (y, z, a)
  const CurvatureBundle curv = curvature(geom, conn, 0);
  Tensor L(m, 3, 0.0);
  for (int a = 0; a < m; ++a)
    for (int y = 0; y < m; ++y)
      for (int z = 0; z < m; ++z) {
        double s = ddX(y, z, a).value();
        for (int x = 0; x < m; ++x) s += curv.R(a, z, x, y).value() * X[static_cast<std::size_t>(x)].value();
        L(a, y, z) = s;
      }
  return L;
}

/// A_(y, z, w) = omega(A(d_y) d_z, d_w) from A(a, y, z) = A^a_{yz}.
inline Tensor lower_endomorphism_field(const PointGeometry& geom, const Tensor& A) {
  const int m = geom.dim;
  Tensor out(m, 3, 0.0);
  for (int y = 0; y < m; ++y)
    for (int z = 0; z < m; ++z)
      for (int w = 0; w < m; ++w) {
        double s = 0.0;
        for (int a = 0; a < m; ++a) s += A(a, y, z) * geom.omega(a, w).value();
        out(y, z, w) = s;
      }
  return out;
}

/// A^a_{yz} = Lambda^{wa} A_(y, z, w).
inline Tensor raise_endomorphism_field(const PointGeometry& geom, const Tensor& lowered) {
  const int m = geom.dim;
  Tensor out(m, 3, 0.0);
  for (int a = 0; a < m; ++a)
    for (int y = 0; y < m; ++y)
      for (int z = 0; z < m; ++z) {
        double s = 0.0;
        for (int w = 0; w < m; ++w) s += geom.lambda(w, a).value() * lowered(y, z, w);
        out(a, y, z) = s;
      }
  return out;
}

/// Max deviation of a rank-3 tensor from complete symmetry.
inline double symmetry_defect(const Tensor& t) {
  const int m = t.dim();
  double d = 0.0;
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int c = 0; c < m; ++c) {
        d = std::max(d, std::abs(t(a, b, c) - t(b, a, c)));
        d = std::max(d, std::abs(t(a, b, c) - t(a, c, b)));
      }
  return d;
}

/// Pointwise Omega^E integrands against omega^n/n!, i.e. the densities whose
/// integrals over the volume form give the pairing.
struct OmegaEDensity {
  double endo_wedge = 0.0;     // tr(A ^ B) ^ omega^{n-1}/(n-1)! over omega^n/n!
  double lambda_triple = 0.0;  // Lambda Lambda Lambda A_ B_
};

inline OmegaEDensity omega_e_density(const PointGeometry& geom, const Tensor& A, const Tensor& B) {
  const int m = geom.dim;
  const int n = m / 2;
  // tr(A ^ B)(d_k, d_l) = tr(A_k B_l) - tr(A_l B_k), (A_k)^a_b = A^a_{kb}.
  auto tr = [&](int k, int l) {
    double s = 0.0;
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) s += A(a, k, b) * B(b, l, a);
    return s;
  };
  const RealForm trAB = RealForm::two_form(m, [&](int k, int l) { return tr(k, l) - tr(l, k); });
  OmegaEDensity d;
  d.endo_wedge = trAB.wedge(omega_form(geom).power(n - 1)).top() / factorial(n - 1) / volume_top(geom);

  const Tensor Al = lower_endomorphism_field(geom, A);
  const Tensor Bl = lower_endomorphism_field(geom, B);
  const Tensor lam = values(geom.lambda);
  // Contract one slot at a time: C(i1, i2, j3) = sum_{i3} Lambda^{i3 j3} A_(i1 i2 i3), etc.
  Tensor c1(m, 3, 0.0), c2(m, 3, 0.0), c3(m, 3, 0.0);
  for (int i1 = 0; i1 < m; ++i1)
    for (int i2 = 0; i2 < m; ++i2)
      for (int j3 = 0; j3 < m; ++j3) {
        double s = 0.0;
        for (int i3 = 0; i3 < m; ++i3) s += lam(i3, j3) * Al(i1, i2, i3);
        c1(i1, i2, j3) = s;
      }
  for (int i1 = 0; i1 < m; ++i1)
    for (int j2 = 0; j2 < m; ++j2)
      for (int j3 = 0; j3 < m; ++j3) {
        double s = 0.0;
        for (int i2 = 0; i2 < m; ++i2) s += lam(i2, j2) * c1(i1, i2, j3);
        c2(i1, j2, j3) = s;
      }
  for (int j1 = 0; j1 < m; ++j1)
    for (int j2 = 0; j2 < m; ++j2)
      for (int j3 = 0; j3 < m; ++j3) {
        double s = 0.0;
        for (int i1 = 0; i1 < m; ++i1) s += lam(i1, j1) * c2(i1, j2, j3);
        c3(j1, j2, j3) = s;
      }
  double s = 0.0;
  for (std::size_t i = 0; i < c3.size(); ++i) s += c3[i] * Bl[i];
  d.lambda_triple = s;
  return d;
}

}  // namespace kfut
