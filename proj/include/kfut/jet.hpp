#pragma once

// Truncated multivariate Taylor series ("jets").
//
// A Jet of order K in m variables stores the coefficients c_a = (d^a f)(p) / a!
// of every monomial x^a with |a| <= K, in graded-lexicographic order. The
// ordering is shared by all orders of the same m, so lowering the order of a
// jet is a prefix truncation.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <mutex>
#include <numeric>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "kfut/error.hpp"

namespace kfut {

inline constexpr int kMaxJetOrder = 8;
inline constexpr int kDefaultJetOrder = 6;
inline constexpr int kMaxJetVars = 8;

inline std::size_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::size_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::size_t>(n - k + i) / static_cast<std::size_t>(i);
  return r;
}

/// Monomial bookkeeping for jets in a fixed number of variables, built once up
/// to kMaxJetOrder and shared by every jet in that many variables.
class JetLayout {
 public:
  struct ProductTerm {
    std::uint32_t lhs;
    std::uint32_t rhs;
    std::uint32_t out;
  };

  static const JetLayout& get(int num_vars) {
    if (num_vars < 1 || num_vars > kMaxJetVars)
      throw Error(ErrorKind::shape, "jets support 1.." + std::to_string(kMaxJetVars) + " variables, got " +
                                        std::to_string(num_vars));
    static std::array<std::once_flag, kMaxJetVars + 1> flags;
    static std::array<std::unique_ptr<JetLayout>, kMaxJetVars + 1> layouts;
    std::call_once(flags[num_vars], [num_vars] { layouts[num_vars].reset(new JetLayout(num_vars)); });
    return *layouts[num_vars];
  }

  int num_vars() const { return m_; }

  /// Number of coefficients of a jet of the given order: C(m + K, K).
  std::size_t size(int order) const { return sizes_[order]; }

  int degree(std::size_t i) const { return degree_[i]; }

  std::span<const int> exponents(std::size_t i) const {
    return {exponents_.data() + i * static_cast<std::size_t>(m_), static_cast<std::size_t>(m_)};
  }

  /// Index of a multi-index; throws if |alpha| exceeds kMaxJetOrder.
  std::size_t index(std::span<const int> alpha) const {
    if (static_cast<int>(alpha.size()) != m_)
      throw Error(ErrorKind::shape, "multi-index has " + std::to_string(alpha.size()) + " entries, expected " +
                                        std::to_string(m_));
    int deg = 0;
    for (int a : alpha) {
      if (a < 0) throw Error(ErrorKind::shape, "negative exponent in multi-index");
      deg += a;
    }
    if (deg > kMaxJetOrder) throw Error(ErrorKind::out_of_order, "multi-index degree beyond kMaxJetOrder");
    return lookup_.at(encode(alpha));
  }

  /// Index of alpha_i + e_var (valid when degree(i) < kMaxJetOrder).
  std::size_t raised(int var, std::size_t i) const { return raise_[static_cast<std::size_t>(var) * sizes_[kMaxJetOrder] + i]; }

  /// Product terms whose output index lies inside a jet of the given order.
  std::span<const ProductTerm> product_terms(int order) const { return {terms_.data(), term_bounds_[order]}; }

 private:
  explicit JetLayout(int m) : m_(m) {
    for (int k = 0; k <= kMaxJetOrder; ++k) sizes_[k] = binomial(m + k, k);
    const std::size_t total = sizes_[kMaxJetOrder];
    exponents_.reserve(total * static_cast<std::size_t>(m));
    degree_.reserve(total);

    // Graded order; within a degree, lexicographically decreasing exponents.
    std::vector<int> alpha(static_cast<std::size_t>(m), 0);
    for (int d = 0; d <= kMaxJetOrder; ++d) emit_degree(alpha, 0, d, d);

    for (std::size_t i = 0; i < total; ++i) lookup_.emplace(encode(exponents(i)), static_cast<std::uint32_t>(i));

    raise_.assign(static_cast<std::size_t>(m) * total, 0);
    std::vector<int> beta(static_cast<std::size_t>(m));
    for (int v = 0; v < m; ++v) {
      for (std::size_t i = 0; i < sizes_[kMaxJetOrder - 1]; ++i) {
        auto e = exponents(i);
        std::copy(e.begin(), e.end(), beta.begin());
        ++beta[static_cast<std::size_t>(v)];
        raise_[static_cast<std::size_t>(v) * total + i] = static_cast<std::uint32_t>(lookup_.at(encode(beta)));
      }
    }

    for (std::size_t a = 0; a < total; ++a) {
      for (std::size_t b = 0; b < sizes_[kMaxJetOrder - degree_[a]]; ++b) {
        auto ea = exponents(a);
        auto eb = exponents(b);
        for (int v = 0; v < m; ++v) beta[static_cast<std::size_t>(v)] = ea[static_cast<std::size_t>(v)] + eb[static_cast<std::size_t>(v)];
        terms_.push_back({static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(b),
                          static_cast<std::uint32_t>(lookup_.at(encode(beta)))});
      }
    }
    std::stable_sort(terms_.begin(), terms_.end(),
                     [](const ProductTerm& x, const ProductTerm& y) { return x.out < y.out; });
    for (int k = 0; k <= kMaxJetOrder; ++k) {
      auto bound = std::lower_bound(terms_.begin(), terms_.end(), sizes_[k],
                                    [](const ProductTerm& t, std::size_t s) { return t.out < s; });
      term_bounds_[k] = static_cast<std::size_t>(bound - terms_.begin());
    }
  }

  void emit_degree(std::vector<int>& alpha, int var, int remaining, int deg) {
    if (var == m_ - 1) {
      alpha[static_cast<std::size_t>(var)] = remaining;
      exponents_.insert(exponents_.end(), alpha.begin(), alpha.end());
      degree_.push_back(deg);
      return;
    }
    for (int a = remaining; a >= 0; --a) {
      alpha[static_cast<std::size_t>(var)] = a;
      emit_degree(alpha, var + 1, remaining - a, deg);
    }
  }

  static std::uint64_t encode(std::span<const int> alpha) {
    std::uint64_t key = 0;
    for (int a : alpha) key = key * (kMaxJetOrder + 1) + static_cast<std::uint64_t>(a);
    return key;
  }

  int m_;
  std::array<std::size_t, kMaxJetOrder + 1> sizes_{};
  std::vector<int> exponents_;
  std::vector<int> degree_;
  std::unordered_map<std::uint64_t, std::uint32_t> lookup_;
  std::vector<std::uint32_t> raise_;
  std::vector<ProductTerm> terms_;
  std::array<std::size_t, kMaxJetOrder + 1> term_bounds_{};
};

class Jet {
 public:
  Jet() = default;

  Jet(int num_vars, int order) : layout_(&JetLayout::get(num_vars)), order_(order) {
    if (order < 0 || order > kMaxJetOrder)
      throw Error(ErrorKind::shape, "jet order must lie in 0.." + std::to_string(kMaxJetOrder));
    coeffs_.assign(layout_->size(order), 0.0);
  }

  static Jet constant(int num_vars, int order, double c) {
    Jet j(num_vars, order);
    j.coeffs_[0] = c;
    return j;
  }

  /// The coordinate function x_var expanded at a base point whose var-th coordinate is base.
  static Jet variable(int num_vars, int order, int var, double base) {
    if (var < 0 || var >= num_vars) throw Error(ErrorKind::shape, "variable index out of range");
    Jet j(num_vars, order);
    j.coeffs_[0] = base;
    if (order >= 1) j.coeffs_[static_cast<std::size_t>(1 + var)] = 1.0;
    return j;
  }

  /// A jet of the same shape holding the constant c.
  Jet lift(double c) const { return constant(num_vars(), order_, c); }

  bool empty() const { return layout_ == nullptr; }
  int num_vars() const { return layout_ ? layout_->num_vars() : 0; }
  int order() const { return order_; }
  const JetLayout& layout() const { return *layout_; }
  double value() const { return coeffs_[0]; }

  std::span<const double> coeffs() const { return coeffs_; }
  std::span<double> coeffs() { return coeffs_; }
  double coeff(std::span<const int> alpha) const {
    const std::size_t i = checked_index(alpha);
    return coeffs_[i];
  }

  /// Raw partial derivative d^alpha f at the base point (alpha! times the coefficient).
  double derivative(std::span<const int> alpha) const {
    const double c = coeffs_[checked_index(alpha)];
    double fact = 1.0;
    for (int a : alpha)
      for (int k = 2; k <= a; ++k) fact *= k;
    return fact * c;
  }

  double derivative(std::initializer_list<int> alpha) const {
    return derivative(std::span<const int>(alpha.begin(), alpha.size()));
  }

  /// d/dx_var, one order lower.
  Jet partial(int var) const {
    if (order_ == 0) throw Error(ErrorKind::order, "cannot differentiate an order-0 jet");
    Jet r(num_vars(), order_ - 1);
    const std::size_t n = r.coeffs_.size();
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t up = layout_->raised(var, i);
      const int e = layout_->exponents(up)[static_cast<std::size_t>(var)];
      r.coeffs_[i] = e * coeffs_[up];
    }
    return r;
  }

  Jet truncated(int order) const {
    if (order > order_) throw Error(ErrorKind::order, "jets can be truncated but never extended");
    Jet r;
    r.layout_ = layout_;
    r.order_ = order;
    r.coeffs_.assign(coeffs_.begin(), coeffs_.begin() + static_cast<std::ptrdiff_t>(layout_->size(order)));
    return r;
  }

  bool is_finite() const {
    return std::all_of(coeffs_.begin(), coeffs_.end(), [](double c) { return std::isfinite(c); });
  }

  /// Taylor polynomial evaluated at base + h.
  double evaluate_offset(std::span<const double> h) const {
    double sum = 0.0;
    for (std::size_t i = 0; i < coeffs_.size(); ++i) {
      double term = coeffs_[i];
      auto e = layout_->exponents(i);
      for (std::size_t v = 0; v < e.size(); ++v)
        for (int k = 0; k < e[v]; ++k) term *= h[v];
      sum += term;
    }
    return sum;
  }

  Jet& operator+=(const Jet& b) {
    require_same_shape(b);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += b.coeffs_[i];
    return *this;
  }
  Jet& operator-=(const Jet& b) {
    require_same_shape(b);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= b.coeffs_[i];
    return *this;
  }
  Jet& operator*=(double s) {
    for (double& c : coeffs_) c *= s;
    return *this;
  }
  Jet& operator+=(double s) {
    coeffs_[0] += s;
    return *this;
  }
  Jet& operator-=(double s) {
    coeffs_[0] -= s;
    return *this;
  }

  /// this += s * b (same shape).
  void add_scaled(double s, const Jet& b) {
    require_same_shape(b);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += s * b.coeffs_[i];
  }

  /// this += a * b truncated to this jet's order; a and b may carry higher orders.
  void add_product(const Jet& a, const Jet& b) {
    if (a.layout_ != layout_ || b.layout_ != layout_) throw Error(ErrorKind::shape, "jet num_vars mismatch");
    if (a.order_ < order_ || b.order_ < order_) throw Error(ErrorKind::order, "product operands below target order");
    const double* pa = a.coeffs_.data();
    const double* pb = b.coeffs_.data();
    double* po = coeffs_.data();
    for (const auto& t : layout_->product_terms(order_)) po[t.out] += pa[t.lhs] * pb[t.rhs];
  }

  void require_same_shape(const Jet& b) const {
    if (layout_ != b.layout_) throw Error(ErrorKind::shape, "jet num_vars mismatch");
    if (order_ != b.order_)
      throw Error(ErrorKind::shape,
                  "jet order mismatch (" + std::to_string(order_) + " vs " + std::to_string(b.order_) + ")");
  }

 private:
  std::size_t checked_index(std::span<const int> alpha) const {
    int deg = 0;
    for (int a : alpha) deg += a;
    if (deg > order_)
      throw Error(ErrorKind::out_of_order,
                  "derivative of degree " + std::to_string(deg) + " from a jet of order " + std::to_string(order_));
    return layout_->index(alpha);
  }

  const JetLayout* layout_ = nullptr;
  int order_ = 0;
  std::vector<double> coeffs_;
};

/// a * b computed directly at the given order (<= both operand orders).
inline Jet mul(const Jet& a, const Jet& b, int order) {
  Jet r(a.num_vars(), order);
  r.add_product(a, b);
  return r;
}

inline Jet operator+(Jet a, const Jet& b) { return a += b; }
inline Jet operator-(Jet a, const Jet& b) { return a -= b; }
inline Jet operator-(Jet a) { return a *= -1.0; }
inline Jet operator+(Jet a, double s) { return a += s; }
inline Jet operator+(double s, Jet a) { return a += s; }
inline Jet operator-(Jet a, double s) { return a -= s; }
inline Jet operator-(double s, Jet a) {
  a *= -1.0;
  return a += s;
}
inline Jet operator*(Jet a, double s) { return a *= s; }
inline Jet operator*(double s, Jet a) { return a *= s; }

inline Jet operator*(const Jet& a, const Jet& b) {
  a.require_same_shape(b);
  return mul(a, b, a.order());
}

namespace detail {

// sum_k c_k (a - a0)^k by Horner; the nilpotent part has no constant term.
inline Jet compose(const Jet& a, std::span<const double> c) {
  Jet h = a;
  h.coeffs()[0] = 0.0;
  const int K = a.order();
  Jet r = a.lift(c[static_cast<std::size_t>(K)]);
  for (int k = K - 1; k >= 0; --k) {
    r = r * h;
    r += c[static_cast<std::size_t>(k)];
  }
  return r;
}

// Coefficients of (a0 + h)^p = a0^p sum_k binom(p, k) (h / a0)^k.
inline std::vector<double> binomial_series(double a0, double p, int K) {
  std::vector<double> c(static_cast<std::size_t>(K) + 1);
  double coef = std::pow(a0, p);
  for (int k = 0; k <= K; ++k) {
    c[static_cast<std::size_t>(k)] = coef;
    coef *= (p - k) / ((k + 1) * a0);
  }
  return c;
}

}  // namespace detail

inline Jet reciprocal(const Jet& a) {
  if (a.value() == 0.0) throw Error(ErrorKind::singular, "division by a jet with zero constant term");
  return detail::compose(a, detail::binomial_series(a.value(), -1.0, a.order()));
}

inline Jet operator/(const Jet& a, const Jet& b) {
  a.require_same_shape(b);
  return a * reciprocal(b);
}
inline Jet operator/(Jet a, double s) {
  if (s == 0.0) throw Error(ErrorKind::singular, "division of a jet by zero");
  return a *= 1.0 / s;
}
inline Jet operator/(double s, const Jet& b) { return s * reciprocal(b); }

inline Jet exp(const Jet& a) {
  const int K = a.order();
  std::vector<double> c(static_cast<std::size_t>(K) + 1);
  double e = std::exp(a.value());
  for (int k = 0; k <= K; ++k) {
    c[static_cast<std::size_t>(k)] = e;
    e /= (k + 1);
  }
  return detail::compose(a, c);
}

inline Jet log(const Jet& a) {
  const double a0 = a.value();
  if (!(a0 > 0.0)) throw Error(ErrorKind::singular, "log of a jet with non-positive constant term");
  const int K = a.order();
  std::vector<double> c(static_cast<std::size_t>(K) + 1);
  c[0] = std::log(a0);
  double p = 1.0;
  for (int k = 1; k <= K; ++k) {
    p /= a0;
    c[static_cast<std::size_t>(k)] = ((k % 2 == 1) ? 1.0 : -1.0) * p / k;
  }
  return detail::compose(a, c);
}

inline Jet sqrt(const Jet& a) {
  const double a0 = a.value();
  if (!(a0 > 0.0)) throw Error(ErrorKind::singular, "sqrt of a jet with non-positive constant term");
  return detail::compose(a, detail::binomial_series(a0, 0.5, a.order()));
}

/// Non-negative integer powers by repeated squaring (valid for any constant term).
inline Jet pow(const Jet& a, int p) {
  if (p < 0) return reciprocal(pow(a, -p));
  Jet result = a.lift(1.0);
  Jet base = a;
  while (p > 0) {
    if (p & 1) result = result * base;
    p >>= 1;
    if (p) base = base * base;
  }
  return result;
}

inline Jet pow(const Jet& a, double p) {
  if (p == std::floor(p) && std::abs(p) <= 64.0) return pow(a, static_cast<int>(p));
  const double a0 = a.value();
  if (!(a0 > 0.0)) throw Error(ErrorKind::singular, "non-integer power of a jet with non-positive constant term");
  return detail::compose(a, detail::binomial_series(a0, p, a.order()));
}

inline Jet pow(const Jet& a, const Jet& b) {
  a.require_same_shape(b);
  bool constant_exponent = true;
  for (std::size_t i = 1; i < b.coeffs().size(); ++i) constant_exponent = constant_exponent && b.coeffs()[i] == 0.0;
  if (constant_exponent) return pow(a, b.value());
  return exp(b * log(a));
}

/// The jet of the coordinate functions at a base point: x_v = p_v + h_v.
inline std::vector<Jet> coordinate_jets(std::span<const double> point, int order) {
  const int m = static_cast<int>(point.size());
  std::vector<Jet> xs;
  xs.reserve(point.size());
  for (int v = 0; v < m; ++v) xs.push_back(Jet::variable(m, order, v, point[static_cast<std::size_t>(v)]));
  return xs;
}

}  // namespace kfut
