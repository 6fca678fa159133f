#pragma once

// Differential forms at a point, stored densely over the 2^m coordinate
// monomials dx^{i_1} ^ ... ^ dx^{i_k} (bitmask i_1 < ... < i_k).

#include <bit>
#include <complex>
#include <cstdint>
#include <vector>

#include "kfut/error.hpp"
#include "kfut/tensor.hpp"

namespace kfut {

template <class T>
class FormValue {
 public:
  FormValue() = default;
  FormValue(int dim, int degree) : dim_(dim), degree_(degree), c_(std::size_t{1} << dim, T{}) {
    if (dim < 1 || dim > 16) throw Error(ErrorKind::shape, "form dimension out of range");
  }

  /// sum_{k<l} a(k, l) dx^k ^ dx^l from an antisymmetric coefficient accessor.
  template <class F>
  static FormValue two_form(int dim, F&& a) {
    FormValue f(dim, 2);
    for (int k = 0; k < dim; ++k)
      for (int l = k + 1; l < dim; ++l) f.c_[(std::size_t{1} << k) | (std::size_t{1} << l)] = a(k, l);
    return f;
  }

  static FormValue constant(int dim, T value) {
    FormValue f(dim, 0);
    f.c_[0] = value;
    return f;
  }

  int dim() const { return dim_; }
  int degree() const { return degree_; }

  T& operator[](std::uint32_t mask) { return c_[mask]; }
  const T& operator[](std::uint32_t mask) const { return c_[mask]; }

  /// Component alpha(d_{i_1}, ..., d_{i_k}) for increasing indices.
  T component(std::initializer_list<int> idx) const {
    std::uint32_t mask = 0;
    for (int i : idx) mask |= 1u << i;
    return c_[mask];
  }

  /// Coefficient of dx^1 ^ ... ^ dx^m (zero unless the form is top-degree).
  T top() const { return degree_ == dim_ ? c_[(std::size_t{1} << dim_) - 1] : T{}; }

  FormValue& operator+=(const FormValue& b) {
    check_compatible(b);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += b.c_[i];
    return *this;
  }
  FormValue& operator-=(const FormValue& b) {
    check_compatible(b);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= b.c_[i];
    return *this;
  }
  FormValue& operator*=(const T& s) {
    for (auto& x : c_) x *= s;
    return *this;
  }

  friend FormValue operator+(FormValue a, const FormValue& b) { return a += b; }
  friend FormValue operator-(FormValue a, const FormValue& b) { return a -= b; }
  friend FormValue operator*(FormValue a, const T& s) { return a *= s; }
  friend FormValue operator*(const T& s, FormValue a) { return a *= s; }

  FormValue wedge(const FormValue& b) const {
    if (dim_ != b.dim_) throw Error(ErrorKind::shape, "wedge of forms on different dimensions");
    if (degree_ + b.degree_ > dim_) return FormValue(dim_, degree_ + b.degree_);
    FormValue out(dim_, degree_ + b.degree_);
    for (std::uint32_t ma = 0; ma < c_.size(); ++ma) {
      if (c_[ma] == T{} || std::popcount(ma) != degree_) continue;
      for (std::uint32_t mb = 0; mb < b.c_.size(); ++mb) {
        if ((ma & mb) != 0 || b.c_[mb] == T{} || std::popcount(mb) != b.degree_) continue;
        out.c_[ma | mb] += (merge_sign(ma, mb) ? -1.0 : 1.0) * c_[ma] * b.c_[mb];
      }
    }
    return out;
  }

  /// alpha^k (alpha^0 = 1).
  FormValue power(int k) const {
    FormValue r = constant(dim_, T{1});
    for (int i = 0; i < k; ++i) r = r.wedge(*this);
    return r;
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& x : c_) m = std::max(m, static_cast<double>(std::abs(x)));
    return m;
  }

 private:
  // Parity of the permutation sorting (indices of a) followed by (indices of b).
  static bool merge_sign(std::uint32_t a, std::uint32_t b) {
    int swaps = 0;
    while (b) {
      const int j = std::countr_zero(b);
      b &= b - 1;
      swaps += std::popcount(a >> (j + 1));
    }
    return swaps & 1;
  }

  void check_compatible(const FormValue& b) const {
    if (dim_ != b.dim_ || degree_ != b.degree_) throw Error(ErrorKind::shape, "adding forms of different type");
  }

  int dim_ = 0;
  int degree_ = 0;
  std::vector<T> c_;
};

using RealForm = FormValue<double>;
using ComplexForm = FormValue<std::complex<double>>;

inline ComplexForm complexify(const RealForm& f) {
  ComplexForm out(f.dim(), f.degree());
  for (std::uint32_t m = 0; m < (1u << f.dim()); ++m) out[m] = f[m];
  return out;
}

/// Factorial as a double (small arguments).
inline double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

}  // namespace kfut
