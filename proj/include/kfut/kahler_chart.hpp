#pragma once

// Pointwise Kähler geometry on a holomorphic chart.
//
// Real coordinates are ordered (x_1, y_1, ..., x_n, y_n) with z_k = x_k + i y_k,
// and J is the constant complex structure J d/dx_k = d/dy_k. From a Kähler
// potential u the symplectic form is omega = dd^c u with d^c f = -df o J, and
// g(X, Y) = omega(X, JY).
//
// Index conventions used throughout:
//   gamma(a, b, c) = Gamma^a_{bc},  nabla_{d_b} d_c = Gamma^a_{bc} d_a
//   R(i, j, k, l)  = R^i_{jkl},     R(d_k, d_l) d_j = R^i_{jkl} d_i
//   ric(a, b)      = Ric(d_a, d_b) = tr[V -> R(V, d_a) d_b]
//   covariant derivatives prepend the derivative slot: (nabla T)(c, ...) = (nabla_{d_c} T)(...)

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kfut/error.hpp"
#include "kfut/jet.hpp"
#include "kfut/tensor.hpp"

namespace kfut {

/// Sign of the Laplacian relative to g^{ij} nabla_i nabla_j. The value -1 makes
/// Delta the non-negative (geometer's) Laplacian, which is the convention under
/// which (nabla^2 Ric)(e^p, e^q) = -1/2 Delta Scal holds on Kähler data.
inline constexpr double laplacian_sign = -1.0;

using ScalarField = std::function<Jet(std::span<const Jet>)>;
using VectorField = std::function<std::vector<Jet>(std::span<const Jet>)>;

struct Ball {
  std::vector<double> center;
  double radius = 1.0;

  double normalized_r2(std::span<const double> p) const {
    double s = 0.0;
    for (std::size_t i = 0; i < center.size(); ++i) s += (p[i] - center[i]) * (p[i] - center[i]);
    return s / (radius * radius);
  }
};

struct ChartDomain {
  enum class Kind { whole, box, ball };
  Kind kind = Kind::whole;
  std::vector<double> lower, upper;
  Ball ball;

  bool contains(std::span<const double> p) const {
    switch (kind) {
      case Kind::whole: return true;
      case Kind::box:
        for (std::size_t i = 0; i < p.size(); ++i)
          if (p[i] < lower[i] || p[i] > upper[i]) return false;
        return true;
      case Kind::ball: return ball.normalized_r2(p) <= 1.0;
    }
    return false;
  }
};

/// A holomorphic chart carrying a Kähler potential. A deformed chart keeps a
/// pointer to its undeformed base together with the deformation's support,
/// which lets integrals be split into a base part and a local correction.
struct KahlerChartSpec {
  std::string name;
  int complex_dim = 1;
  ScalarField potential;
  std::string potential_source;
  ChartDomain domain;
  std::string compactification = "fubini_study";

  std::shared_ptr<const KahlerChartSpec> base;
  std::optional<Ball> deformation_support;
  ScalarField deformation;  // amplitude included; potential == base potential + deformation

  // Multi-chart compactifications: this spec is chart `chart_index`; the other
  // affine charts of the same manifold (index k - 1 holds chart k, for chart 0).
  int chart_index = 0;
  std::vector<std::shared_ptr<const KahlerChartSpec>> other_charts;

  int real_dim() const { return 2 * complex_dim; }
  int num_charts() const { return 1 + static_cast<int>(other_charts.size()); }
};

/// omega_phi = omega + dd^c(amplitude * phi): the potential shifts by amplitude * phi.
inline KahlerChartSpec deform(const KahlerChartSpec& base, ScalarField phi, double amplitude,
                              std::optional<Ball> support = std::nullopt) {
  KahlerChartSpec out = base;
  auto base_ptr = std::make_shared<const KahlerChartSpec>(base);
  out.base = base_ptr;
  out.deformation_support = std::move(support);
  ScalarField scaled = [phi = std::move(phi), amplitude](std::span<const Jet> x) { return amplitude * phi(x); };
  out.deformation = scaled;
  out.potential = [base_potential = base.potential, scaled](std::span<const Jet> x) {
    return base_potential(x) + scaled(x);
  };
  out.name = base.name + "+deformation";
  // Without a support ball there is no way to carry the deformation into the
  // other affine charts, so the deformed spec is a single-chart object.
  if (!out.deformation_support) out.other_charts.clear();
  return out;
}

/// Chart k of a (possibly multi-chart) spec; chart 0 is `spec` itself.
inline const KahlerChartSpec& chart_of(const KahlerChartSpec& spec, int k) {
  if (k == 0) return spec;
  if (k < 0 || k >= spec.num_charts()) throw Error(ErrorKind::usage, "chart index out of range");
  return *spec.other_charts[static_cast<std::size_t>(k - 1)];
}

/// J(a, b) = J^a_b for the standard complex structure.
inline Tensor standard_complex_structure(int dim) {
  Tensor J(dim, 2, 0.0);
  for (int k = 0; k + 1 < dim; k += 2) {
    J(k + 1, k) = 1.0;
    J(k, k + 1) = -1.0;
  }
  return J;
}

/// Inverse of a square jet matrix at the matrix's own order (pivoting on constant terms).
inline JetTensor invert(const JetTensor& a) {
  const int m = a.dim();
  const int order = jet_order(a);
  const int nv = a[0].num_vars();
  JetTensor work = a;
  JetTensor inv = zero_jet_tensor(m, 2, nv, order);
  for (int i = 0; i < m; ++i) inv(i, i) = Jet::constant(nv, order, 1.0);
  double scale = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) scale = std::max(scale, std::abs(a[i].value()));
  for (int col = 0; col < m; ++col) {
    int piv = col;
    for (int r = col + 1; r < m; ++r)
      if (std::abs(work(r, col).value()) > std::abs(work(piv, col).value())) piv = r;
    if (!(std::abs(work(piv, col).value()) > 1e-14 * scale))
      throw Error(ErrorKind::degenerate, "singular jet matrix");
    if (piv != col)
      for (int j = 0; j < m; ++j) {
        std::swap(work(piv, j), work(col, j));
        std::swap(inv(piv, j), inv(col, j));
      }
    const Jet pinv = reciprocal(work(col, col));
    for (int j = 0; j < m; ++j) {
      work(col, j) = work(col, j) * pinv;
      inv(col, j) = inv(col, j) * pinv;
    }
    for (int r = 0; r < m; ++r) {
      if (r == col) continue;
      const Jet f = work(r, col);
      for (int j = 0; j < m; ++j) {
        work(r, j) -= f * work(col, j);
        inv(r, j) -= f * inv(col, j);
      }
    }
  }
  return inv;
}

struct PointGeometry {
  std::vector<double> point;
  int dim = 0;
  int order = 0;  // order of the potential jet
  Tensor J;
  Jet potential;
  JetTensor omega;   // omega_{ab}, order - 2
  JetTensor g;       // g_{ab}, order - 2
  JetTensor g_inv;   // g^{ab}, order - 2
  JetTensor lambda;  // Lambda^{ab} with Lambda^{kl} omega_{lt} = delta^k_t, order - 2
  JetTensor gamma;   // Levi-Civita Gamma^a_{bc}, order - 3 (empty when order < 3)
  double volume_density = 0.0;  // omega^n / n! against dx_1 ... dx_2n

  int num_vars() const { return dim; }
};

namespace detail {

inline double determinant(std::span<const double> a_in, int m) {
  std::vector<double> a(a_in.begin(), a_in.end());
  double det = 1.0;
  for (int col = 0; col < m; ++col) {
    int piv = col;
    for (int r = col + 1; r < m; ++r)
      if (std::abs(a[static_cast<std::size_t>(r * m + col)]) > std::abs(a[static_cast<std::size_t>(piv * m + col)])) piv = r;
    const double p = a[static_cast<std::size_t>(piv * m + col)];
    if (p == 0.0) return 0.0;
    if (piv != col) {
      det = -det;
      for (int j = 0; j < m; ++j) std::swap(a[static_cast<std::size_t>(piv * m + j)], a[static_cast<std::size_t>(col * m + j)]);
    }
    det *= p;
    for (int r = col + 1; r < m; ++r) {
      const double f = a[static_cast<std::size_t>(r * m + col)] / p;
      for (int j = col; j < m; ++j) a[static_cast<std::size_t>(r * m + j)] -= f * a[static_cast<std::size_t>(col * m + j)];
    }
  }
  return det;
}

}  // namespace detail

/// omega, g, Lambda, g^{-1} and the Levi-Civita symbols at p from jets of the potential.
inline PointGeometry point_geometry(const KahlerChartSpec& spec, std::span<const double> p,
                                   int order = kDefaultJetOrder) {
  const int m = spec.real_dim();
  if (static_cast<int>(p.size()) != m)
    throw Error(ErrorKind::shape, "point has " + std::to_string(p.size()) + " coordinates, chart needs " +
                                      std::to_string(m));
  if (order < 2) throw Error(ErrorKind::order, "Kähler geometry needs at least two potential derivatives");

  PointGeometry geom;
  geom.point.assign(p.begin(), p.end());
  geom.dim = m;
  geom.order = order;
  geom.J = standard_complex_structure(m);

  auto xs = coordinate_jets(p, order);
  geom.potential = spec.potential(xs);
  if (geom.potential.order() != order || geom.potential.num_vars() != m)
    throw Error(ErrorKind::shape, "potential returned a jet of the wrong shape");
  if (!geom.potential.is_finite()) throw Error(ErrorKind::evaluation, "potential is not finite at the point");

  const Tensor& J = geom.J;
  JetTensor hess(m, 2);
  {
    std::vector<Jet> grad;
    grad.reserve(static_cast<std::size_t>(m));
    for (int a = 0; a < m; ++a) grad.push_back(geom.potential.partial(a));
    for (int a = 0; a < m; ++a)
      for (int b = a; b < m; ++b) {
        hess(a, b) = grad[static_cast<std::size_t>(a)].partial(b);
        if (b != a) hess(b, a) = hess(a, b);
      }
  }

  // omega_{ab} = -J^c_b H_{ac} + J^c_a H_{bc};  g_{ab} = omega_{ac} J^c_b.
  geom.omega = zero_jet_tensor(m, 2, m, order - 2);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int c = 0; c < m; ++c) {
        if (J(c, b) != 0.0) geom.omega(a, b).add_scaled(-J(c, b), hess(a, c));
        if (J(c, a) != 0.0) geom.omega(a, b).add_scaled(J(c, a), hess(b, c));
      }
  geom.g = zero_jet_tensor(m, 2, m, order - 2);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int c = 0; c < m; ++c)
        if (J(c, b) != 0.0) geom.g(a, b).add_scaled(J(c, b), geom.omega(a, c));

  const Tensor omega0 = values(geom.omega);
  const Tensor g0 = values(geom.g);
  // Degeneracy relative to Hadamard's bound, so anisotropic but regular forms pass.
  double hadamard = 1.0;
  for (int a = 0; a < m; ++a) {
    double row = 0.0;
    for (int b = 0; b < m; ++b) row += omega0(a, b) * omega0(a, b);
    hadamard *= std::sqrt(row);
  }
  const double det_omega = detail::determinant(omega0.data(), m);
  if (!(hadamard > 0.0) || !(std::abs(det_omega) > 1e-12 * hadamard))
    throw Error(ErrorKind::degenerate, "omega is degenerate at the point");
  if (!dense::positive_definite(g0.data(), m))
    throw Error(ErrorKind::not_kahler, "g = omega(., J.) is not positive definite at the point");
  geom.volume_density = std::sqrt(detail::determinant(g0.data(), m));

  geom.g_inv = invert(geom.g);
  geom.lambda = zero_jet_tensor(m, 2, m, order - 2);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int c = 0; c < m; ++c)
        if (J(a, c) != 0.0) geom.lambda(a, b).add_scaled(J(a, c), geom.g_inv(c, b));

  if (order >= 3) {
    const int k = order - 3;
    JetTensor dg(m, 3);  // dg(c, a, b) = d_c g_{ab}
    for (int c = 0; c < m; ++c)
      for (int a = 0; a < m; ++a)
        for (int b = a; b < m; ++b) {
          dg(c, a, b) = geom.g(a, b).partial(c);
          if (b != a) dg(c, b, a) = dg(c, a, b);
        }
    const JetTensor ginv = truncated(geom.g_inv, k);
    geom.gamma = zero_jet_tensor(m, 3, m, k);
    Jet christoffel_first(m, k);
    for (int b = 0; b < m; ++b)
      for (int c = b; c < m; ++c) {
        for (int d = 0; d < m; ++d) {
          // [bc, d] = 1/2 (d_b g_dc + d_c g_db - d_d g_bc)
          christoffel_first = dg(b, d, c);
          christoffel_first += dg(c, d, b);
          christoffel_first -= dg(d, b, c);
          christoffel_first *= 0.5;
          for (int a = 0; a < m; ++a) geom.gamma(a, b, c).add_product(ginv(a, d), christoffel_first);
        }
        if (c != b)
          for (int a = 0; a < m; ++a) geom.gamma(a, c, b) = geom.gamma(a, b, c);
      }
  }
  return geom;
}

/// A symplectic connection nabla + t A, with A given through its lowered form
/// A_(b, c, d) = omega(A(d_b) d_c, d_d), completely symmetric.
struct ConnectionField {
  JetTensor coefficients;  // Gamma^a_{bc} of the full connection
  JetTensor perturbation;  // lowered A, empty for the Levi-Civita connection
  double t = 0.0;

  bool is_levi_civita() const { return perturbation.empty() || t == 0.0; }
  int order() const { return jet_order(coefficients); }
};

inline ConnectionField levi_civita(const PointGeometry& geom) {
  if (geom.gamma.empty()) throw Error(ErrorKind::order, "geometry carries no Christoffel symbols (order < 3)");
  return ConnectionField{geom.gamma, {}, 0.0};
}

/// A^a_{bc} = Lambda^{da} A_(b, c, d).
inline JetTensor raise_symmetric(const PointGeometry& geom, const JetTensor& lowered) {
  const int m = geom.dim;
  const int k = std::min(jet_order(lowered), jet_order(geom.lambda));
  JetTensor raised = zero_jet_tensor(m, 3, m, k);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int c = 0; c < m; ++c)
        for (int d = 0; d < m; ++d) raised(a, b, c).add_product(geom.lambda(d, a), lowered(b, c, d));
  return raised;
}

inline ConnectionField perturb(const PointGeometry& geom, const JetTensor& lowered, double t) {
  ConnectionField conn = levi_civita(geom);
  if (lowered.dim() != geom.dim || lowered.rank() != 3)
    throw Error(ErrorKind::shape, "connection perturbation must be a rank-3 tensor on the chart");
  conn.perturbation = lowered;
  conn.t = t;
  const JetTensor raised = raise_symmetric(geom, lowered);
  const int k = std::min(conn.order(), jet_order(raised));
  for (std::size_t i = 0; i < conn.coefficients.size(); ++i) {
    Jet c = conn.coefficients[i].truncated(k);
    c.add_scaled(t, raised[i].truncated(k));
    conn.coefficients[i] = std::move(c);
  }
  return conn;
}

/// Covariant derivative of a jet tensor; upper[s] marks contravariant slots.
/// The result prepends the derivative slot and is one jet order lower than T
/// (or the connection's order, whichever is smaller).
inline JetTensor covariant_derivative(const JetTensor& T, const std::vector<bool>& upper, const JetTensor& gamma) {
  const int m = T.dim();
  const int r = T.rank();
  const int kt = jet_order(T);
  if (kt < 1) throw Error(ErrorKind::order, "covariant derivative needs a tensor jet of order >= 1");
  const int k = std::min(kt - 1, jet_order(gamma));
  if (k < 0) throw Error(ErrorKind::order, "connection jets too short for a covariant derivative");
  const int nv = T[0].num_vars();
  JetTensor out = zero_jet_tensor(m, r + 1, nv, k);
  std::vector<int> idx(static_cast<std::size_t>(r + 1));
  std::vector<int> sub(static_cast<std::size_t>(r));
  for (std::size_t f = 0; f < out.size(); ++f) {
    out.unflatten(f, idx);
    const int c = idx[0];
    for (int s = 0; s < r; ++s) sub[static_cast<std::size_t>(s)] = idx[static_cast<std::size_t>(s + 1)];
    Jet& acc = out[f];
    acc = T[T.flat_of(sub)].partial(c).truncated(k);
    for (int s = 0; s < r; ++s) {
      const int a_s = sub[static_cast<std::size_t>(s)];
      for (int e = 0; e < m; ++e) {
        sub[static_cast<std::size_t>(s)] = e;
        const Jet& te = T[T.flat_of(sub)];
        if (upper[static_cast<std::size_t>(s)]) {
          acc.add_product(gamma(a_s, c, e), te);
        } else {
          Jet tmp(nv, k);
          tmp.add_product(gamma(e, c, a_s), te);
          acc -= tmp;
        }
      }
      sub[static_cast<std::size_t>(s)] = a_s;
    }
  }
  return out;
}

struct CurvatureBundle {
  JetTensor R;           // R^i_{jkl}
  JetTensor ric;         // Ric_{ab}
  Jet scal;              // g^{ab} Ric_{ab}
  JetTensor nabla_ric;   // (nabla_c Ric)_{ab} at (c, a, b)
  JetTensor nabla2_ric;  // (nabla^2_{(p,q)} Ric)_{ab} at (p, q, a, b)
};

/// Curvature of a connection; `ric_derivatives` covariant derivatives of Ric are
/// taken (0, 1 or 2), each consuming one more jet order of the connection.
inline CurvatureBundle curvature(const PointGeometry& geom, const ConnectionField& conn, int ric_derivatives = 2) {
  const int m = geom.dim;
  const JetTensor& G = conn.coefficients;
  const int kg = conn.order();
  if (kg < 1 + ric_derivatives)
    throw Error(ErrorKind::order, "connection jets of order " + std::to_string(kg) + " cannot supply " +
                                      std::to_string(ric_derivatives) + " derivatives of Ricci");
  const int k = kg - 1;
  CurvatureBundle cb;
  cb.R = zero_jet_tensor(m, 4, m, k);
  // R^i_{jkl} = d_k G^i_{lj} - d_l G^i_{kj} + G^i_{kq} G^q_{lj} - G^i_{lq} G^q_{kj}
  Jet neg(m, k);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int kk = 0; kk < m; ++kk)
        for (int l = kk + 1; l < m; ++l) {
          Jet& r = cb.R(i, j, kk, l);
          r = G(i, l, j).partial(kk);
          r -= G(i, kk, j).partial(l);
          std::fill(neg.coeffs().begin(), neg.coeffs().end(), 0.0);
          for (int q = 0; q < m; ++q) {
            r.add_product(G(i, kk, q), G(q, l, j));
            neg.add_product(G(i, l, q), G(q, kk, j));
          }
          r -= neg;
          cb.R(i, j, l, kk) = -r;
        }

  cb.ric = zero_jet_tensor(m, 2, m, k);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int i = 0; i < m; ++i) cb.ric(a, b) += cb.R(i, b, i, a);

  const JetTensor ginv = truncated(geom.g_inv, std::min(k, jet_order(geom.g_inv)));
  const int ks = jet_order(ginv);
  cb.scal = Jet(m, ks);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) cb.scal.add_product(ginv(a, b), cb.ric(a, b));

  if (ric_derivatives >= 1) cb.nabla_ric = covariant_derivative(cb.ric, {false, false}, G);
  if (ric_derivatives >= 2) cb.nabla2_ric = covariant_derivative(cb.nabla_ric, {false, false, false}, G);
  return cb;
}

/// Delta f = laplacian_sign * g^{ij} (d_i d_j f - Gamma^k_{ij} d_k f) at the base point.
inline double laplacian(const PointGeometry& geom, const Jet& f) {
  if (f.order() < 2) throw Error(ErrorKind::order, "Laplacian needs a jet of order >= 2");
  if (geom.gamma.empty()) throw Error(ErrorKind::order, "Laplacian needs Christoffel symbols");
  const int m = geom.dim;
  std::vector<double> df(static_cast<std::size_t>(m));
  std::vector<Jet> d1;
  for (int i = 0; i < m; ++i) {
    d1.push_back(f.partial(i));
    df[static_cast<std::size_t>(i)] = d1.back().value();
  }
  double s = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      double h = d1[static_cast<std::size_t>(i)].partial(j).value();
      for (int k = 0; k < m; ++k) h -= geom.gamma(k, i, j).value() * df[static_cast<std::size_t>(k)];
      s += geom.g_inv(i, j).value() * h;
    }
  return laplacian_sign * s;
}

/// X_K with i(X_K) omega = dK, i.e. X^a = -Lambda^{ab} d_b K, as jets one order below K.
inline std::vector<Jet> hamiltonian_field(const PointGeometry& geom, const Jet& K) {
  const int m = geom.dim;
  if (K.order() < 1) throw Error(ErrorKind::order, "Hamiltonian field needs dK");
  const int k = std::min(K.order() - 1, jet_order(geom.lambda));
  std::vector<Jet> X(static_cast<std::size_t>(m), Jet(m, k));
  std::vector<Jet> dK;
  for (int b = 0; b < m; ++b) dK.push_back(K.partial(b));
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) X[static_cast<std::size_t>(a)].add_product(geom.lambda(a, b), dK[static_cast<std::size_t>(b)]);
    X[static_cast<std::size_t>(a)] *= -1.0;
  }
  return X;
}

/// Evaluate a chart function as a jet at the geometry's base point.
inline Jet jet_of(const PointGeometry& geom, const ScalarField& f, int order) {
  auto xs = coordinate_jets(geom.point, order);
  return f(xs);
}

inline std::vector<Jet> jet_of(const PointGeometry& geom, const VectorField& f, int order) {
  auto xs = coordinate_jets(geom.point, order);
  return f(xs);
}

}  // namespace kfut
