#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "kfut/error.hpp"
#include "kfut/jet.hpp"

namespace kfut {

/// Dense rank-r array over an m-dimensional chart; index (i0, ..., i_{r-1}) is
/// stored row-major. Variance is tracked by the caller.
template <class T>
class BasicTensor {
 public:
  BasicTensor() = default;
  BasicTensor(int dim, int rank, const T& fill = T{}) : dim_(dim), rank_(rank) {
    std::size_t n = 1;
    for (int r = 0; r < rank; ++r) n *= static_cast<std::size_t>(dim);
    data_.assign(n, fill);
  }

  int dim() const { return dim_; }
  int rank() const { return rank_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  template <class... I>
  T& operator()(I... idx) {
    return data_[flat(idx...)];
  }
  template <class... I>
  const T& operator()(I... idx) const {
    return data_[flat(idx...)];
  }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }

  /// Multi-index of a flat position.
  void unflatten(std::size_t flat_index, std::span<int> out) const {
    for (int r = rank_ - 1; r >= 0; --r) {
      out[static_cast<std::size_t>(r)] = static_cast<int>(flat_index % static_cast<std::size_t>(dim_));
      flat_index /= static_cast<std::size_t>(dim_);
    }
  }

  std::size_t flat_of(std::span<const int> idx) const {
    std::size_t f = 0;
    for (int i : idx) f = f * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(i);
    return f;
  }

 private:
  template <class... I>
  std::size_t flat(I... idx) const {
    std::size_t f = 0;
    ((f = f * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(idx)), ...);
    return f;
  }

  int dim_ = 0;
  int rank_ = 0;
  std::vector<T> data_;
};

using Tensor = BasicTensor<double>;
using JetTensor = BasicTensor<Jet>;

inline JetTensor zero_jet_tensor(int dim, int rank, int num_vars, int order) {
  return JetTensor(dim, rank, Jet(num_vars, order));
}

/// Constant-term values of every component.
inline Tensor values(const JetTensor& t) {
  Tensor out(t.dim(), t.rank());
  for (std::size_t i = 0; i < t.size(); ++i) out[i] = t[i].value();
  return out;
}

inline JetTensor truncated(const JetTensor& t, int order) {
  JetTensor out = t;
  for (std::size_t i = 0; i < t.size(); ++i) out[i] = t[i].truncated(order);
  return out;
}

inline int jet_order(const JetTensor& t) { return t.empty() ? -1 : t[0].order(); }

inline double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Small dense helpers on row-major m x m double matrices.
namespace dense {

inline std::vector<double> matmul(std::span<const double> a, std::span<const double> b, int m) {
  std::vector<double> c(static_cast<std::size_t>(m * m), 0.0);
  for (int i = 0; i < m; ++i)
    for (int k = 0; k < m; ++k) {
      const double aik = a[static_cast<std::size_t>(i * m + k)];
      for (int j = 0; j < m; ++j) c[static_cast<std::size_t>(i * m + j)] += aik * b[static_cast<std::size_t>(k * m + j)];
    }
  return c;
}

inline std::vector<double> transpose(std::span<const double> a, int m) {
  std::vector<double> t(static_cast<std::size_t>(m * m));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) t[static_cast<std::size_t>(j * m + i)] = a[static_cast<std::size_t>(i * m + j)];
  return t;
}

/// Inverse by Gauss-Jordan with partial pivoting; throws on a (numerically) singular matrix.
inline std::vector<double> inverse(std::span<const double> a_in, int m) {
  std::vector<double> a(a_in.begin(), a_in.end());
  std::vector<double> inv(static_cast<std::size_t>(m * m), 0.0);
  for (int i = 0; i < m; ++i) inv[static_cast<std::size_t>(i * m + i)] = 1.0;
  double scale = max_abs(a);
  for (int col = 0; col < m; ++col) {
    int piv = col;
    for (int r = col + 1; r < m; ++r)
      if (std::abs(a[static_cast<std::size_t>(r * m + col)]) > std::abs(a[static_cast<std::size_t>(piv * m + col)])) piv = r;
    const double p = a[static_cast<std::size_t>(piv * m + col)];
    if (!(std::abs(p) > 1e-14 * scale)) throw Error(ErrorKind::degenerate, "singular matrix");
    if (piv != col)
      for (int j = 0; j < m; ++j) {
        std::swap(a[static_cast<std::size_t>(piv * m + j)], a[static_cast<std::size_t>(col * m + j)]);
        std::swap(inv[static_cast<std::size_t>(piv * m + j)], inv[static_cast<std::size_t>(col * m + j)]);
      }
    for (int j = 0; j < m; ++j) {
      a[static_cast<std::size_t>(col * m + j)] /= p;
      inv[static_cast<std::size_t>(col * m + j)] /= p;
    }
    for (int r = 0; r < m; ++r) {
      if (r == col) continue;
      const double f = a[static_cast<std::size_t>(r * m + col)];
      if (f == 0.0) continue;
      for (int j = 0; j < m; ++j) {
        a[static_cast<std::size_t>(r * m + j)] -= f * a[static_cast<std::size_t>(col * m + j)];
        inv[static_cast<std::size_t>(r * m + j)] -= f * inv[static_cast<std::size_t>(col * m + j)];
      }
    }
  }
  return inv;
}

/// True when the symmetric matrix admits a Cholesky factorization.
inline bool positive_definite(std::span<const double> a, int m) {
  std::vector<double> l(static_cast<std::size_t>(m * m), 0.0);
  for (int j = 0; j < m; ++j) {
    double d = a[static_cast<std::size_t>(j * m + j)];
    for (int k = 0; k < j; ++k) d -= l[static_cast<std::size_t>(j * m + k)] * l[static_cast<std::size_t>(j * m + k)];
    if (!(d > 0.0)) return false;
    const double ljj = std::sqrt(d);
    l[static_cast<std::size_t>(j * m + j)] = ljj;
    for (int i = j + 1; i < m; ++i) {
      double s = a[static_cast<std::size_t>(i * m + j)];
      for (int k = 0; k < j; ++k) s -= l[static_cast<std::size_t>(i * m + k)] * l[static_cast<std::size_t>(j * m + k)];
      l[static_cast<std::size_t>(i * m + j)] = s / ljj;
    }
  }
  return true;
}

}  // namespace dense

}  // namespace kfut
