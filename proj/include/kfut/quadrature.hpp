#pragma once

// Tensor-product quadrature over compactified charts.
//
// Atlas weights are Lebesgue weights in chart coordinates (Jacobian of the
// compactification included); densities integrated against omega^n / n!
// multiply by the volume density themselves, which keeps one atlas valid for
// every Kähler form on the same chart.
//
// Presets:
//   fubini_study          CP^n as n + 1 affine charts, each over the polydisc |w_i| <= 1
//                         where its homogeneous coordinate dominates
//   product_fubini_study  CP^1 x CP^1 as four bidisc charts
//   radial_tan            a single chart over all of C^n via r = tan(theta); usable only
//                         while the potential stays well conditioned far out
//   box                   the chart's box domain
//   ball                  polar / Hopf coordinates about a center, radius r0
// Radial and Hopf angles use Gauss-Legendre, azimuths the periodic trapezoid rule.
//
// The polydisc layout exists because derivatives of log(1 + |z|^2) lose about
// seven powers of |z| to cancellation: a single chart reaching |z| ~ 1e3 turns
// an exactly zero sixth-order quantity into 1e5.

#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <numbers>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <gsl/gsl_integration.h>

#include "kfut/error.hpp"
#include "kfut/kahler_chart.hpp"

namespace kfut {

struct QuadratureNode {
  std::vector<double> x;
  double weight = 0.0;
  int chart = 0;
};

struct QuadratureAtlas {
  std::string preset;
  int dim = 0;
  int nodes_per_axis = 0;
  std::vector<QuadratureNode> nodes;
};

struct Rule1D {
  std::vector<double> x, w;
};

/// Gauss-Legendre nodes and weights on [-1, 1], ascending (GSL fixed-order tables).
inline const Rule1D& gauss_legendre(int n) {
  static std::mutex mu;
  static std::map<int, Rule1D> cache;
  std::lock_guard lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  if (n < 1) throw Error(ErrorKind::usage, "Gauss-Legendre rule needs at least one node");
  gsl_integration_glfixed_table* table = gsl_integration_glfixed_table_alloc(static_cast<std::size_t>(n));
  if (!table) throw Error(ErrorKind::evaluation, "could not build a Gauss-Legendre table");
  Rule1D r;
  for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i) {
    double x = 0.0, w = 0.0;
    gsl_integration_glfixed_point(-1.0, 1.0, i, &x, &w, table);
    r.x.push_back(x);
    r.w.push_back(w);
  }
  gsl_integration_glfixed_table_free(table);
  std::vector<std::size_t> order(r.x.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return r.x[a] < r.x[b]; });
  Rule1D sorted;
  for (std::size_t i : order) {
    sorted.x.push_back(r.x[i]);
    sorted.w.push_back(r.w[i]);
  }
  return cache.emplace(n, std::move(sorted)).first->second;
}

namespace detail {

/// Gauss-Legendre on [a, b] as (node, weight) pairs.
inline std::vector<std::pair<double, double>> gl_interval(int n, double a, double b) {
  const auto& r = gauss_legendre(n);
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 0; i < r.x.size(); ++i)
    out.emplace_back(0.5 * (a + b) + 0.5 * (b - a) * r.x[i], 0.5 * (b - a) * r.w[i]);
  return out;
}

inline std::vector<std::pair<double, double>> trapezoid_periodic(int n) {
  std::vector<std::pair<double, double>> out;
  const double h = 2.0 * std::numbers::pi / n;
  for (int k = 0; k < n; ++k) out.emplace_back(k * h, h);
  return out;
}

// Radial axis either on the whole half-line via r = tan(theta) or on [0, r0].
inline std::vector<std::pair<double, double>> radial_axis(int n, double r0) {
  std::vector<std::pair<double, double>> out;
  if (r0 <= 0.0) {
    for (auto [t, w] : gl_interval(n, 0.0, 0.5 * std::numbers::pi)) {
      const double c = std::cos(t);
      out.emplace_back(std::tan(t), w / (c * c));
    }
  } else {
    out = gl_interval(n, 0.0, r0);
  }
  return out;
}

// Polar (one complex dimension) or Hopf (two) coordinates about `center`.
inline QuadratureAtlas radial_atlas(std::string preset, int complex_dim, int n, const std::vector<double>& center,
                                    double r0, int radial_n = 0) {
  QuadratureAtlas a;
  a.preset = std::move(preset);
  a.dim = 2 * complex_dim;
  a.nodes_per_axis = n;
  const auto radial = radial_axis(radial_n > 0 ? radial_n : n, r0);
  const auto az = trapezoid_periodic(n);
  if (complex_dim == 1) {
    for (auto [r, wr] : radial)
      for (auto [t, wt] : az)
        a.nodes.push_back({{center[0] + r * std::cos(t), center[1] + r * std::sin(t)}, wr * wt * r});
  } else if (complex_dim == 2) {
    const auto eta = gl_interval(n, 0.0, 0.5 * std::numbers::pi);
    for (auto [r, wr] : radial)
      for (auto [e, we] : eta) {
        const double ce = std::cos(e), se = std::sin(e);
        const double base = wr * we * r * r * r * ce * se;
        for (auto [t1, w1] : az)
          for (auto [t2, w2] : az)
            a.nodes.push_back({{center[0] + r * ce * std::cos(t1), center[1] + r * ce * std::sin(t1),
                                center[2] + r * se * std::cos(t2), center[3] + r * se * std::sin(t2)},
                               base * w1 * w2});
      }
  } else {
    throw Error(ErrorKind::unsupported, "radial atlases cover complex dimension 1 or 2");
  }
  return a;
}

}  // namespace detail

inline QuadratureAtlas radial_tan_atlas(int complex_dim, int n) {
  return detail::radial_atlas("radial_tan", complex_dim, n, std::vector<double>(static_cast<std::size_t>(2 * complex_dim), 0.0),
                              0.0);
}

/// `radial_n` nodes in the radius (default n), n along every angle.
inline QuadratureAtlas ball_atlas(const Ball& ball, int n, int radial_n = 0) {
  const int complex_dim = static_cast<int>(ball.center.size()) / 2;
  return detail::radial_atlas("ball", complex_dim, n, ball.center, ball.radius, radial_n);
}

/// Unit polydisc in each of `charts` affine charts: polar coordinates per complex
/// coordinate, Gauss-Legendre in r on [0, 1].
inline QuadratureAtlas polydisc_atlas(std::string preset, int complex_dim, int charts, int n) {
  QuadratureAtlas a;
  a.preset = std::move(preset);
  a.dim = 2 * complex_dim;
  a.nodes_per_axis = n;
  std::vector<std::pair<std::pair<double, double>, double>> disc;  // ((x, y), weight)
  for (auto [r, wr] : detail::gl_interval(n, 0.0, 1.0))
    for (auto [t, wt] : detail::trapezoid_periodic(n)) disc.push_back({{r * std::cos(t), r * std::sin(t)}, wr * wt * r});
  for (int c = 0; c < charts; ++c) {
    if (complex_dim == 1) {
      for (const auto& [p, w] : disc) a.nodes.push_back({{p.first, p.second}, w, c});
    } else if (complex_dim == 2) {
      for (const auto& [p, w] : disc)
        for (const auto& [q, v] : disc) a.nodes.push_back({{p.first, p.second, q.first, q.second}, w * v, c});
    } else {
      throw Error(ErrorKind::unsupported, "polydisc atlases cover complex dimension 1 or 2");
    }
  }
  return a;
}

inline QuadratureAtlas fubini_study_atlas(int complex_dim, int n) {
  return polydisc_atlas("fubini_study", complex_dim, complex_dim + 1, n);
}

inline QuadratureAtlas product_fubini_study_atlas(int n) { return polydisc_atlas("product_fubini_study", 2, 4, n); }

inline QuadratureAtlas box_atlas(const std::vector<double>& lower, const std::vector<double>& upper, int n) {
  QuadratureAtlas a;
  a.preset = "box";
  a.dim = static_cast<int>(lower.size());
  a.nodes_per_axis = n;
  std::vector<std::vector<std::pair<double, double>>> axes;
  for (std::size_t i = 0; i < lower.size(); ++i) axes.push_back(detail::gl_interval(n, lower[i], upper[i]));
  std::vector<std::size_t> idx(lower.size(), 0);
  for (;;) {
    QuadratureNode node{std::vector<double>(lower.size()), 1.0};
    for (std::size_t i = 0; i < lower.size(); ++i) {
      node.x[i] = axes[i][idx[i]].first;
      node.weight *= axes[i][idx[i]].second;
    }
    a.nodes.push_back(std::move(node));
    std::size_t k = lower.size();
    while (k > 0) {
      --k;
      if (++idx[k] < axes[k].size()) break;
      idx[k] = 0;
      if (k == 0) return a;
    }
  }
}

/// Defaults sized for a single core: 32 per axis on real surfaces, 10 on real
/// 4-manifolds (3 or 4 charts of 10^4 nodes).
inline int default_nodes_per_axis(int real_dim) { return real_dim <= 2 ? 32 : 10; }

// Bump deformations need more angular nodes than the smooth base in 4D
// (10 vs 12 angular nodes differ by 1e-7 in a sixth-order integrand).
inline int default_patch_nodes(int real_dim) { return real_dim <= 2 ? 32 : 12; }

// The bump's radial profile has high polynomial degree, the angular
// dependence does not.
inline int patch_radial_nodes(int n) { return 2 * n + 4; }

inline QuadratureAtlas atlas_for(const KahlerChartSpec& spec, int n) {
  const std::string& c = spec.compactification;
  auto need_charts = [&](int k) {
    if (spec.num_charts() != k)
      throw Error(ErrorKind::unsupported, "compactification '" + c + "' needs " + std::to_string(k) +
                                              " affine charts, spec '" + spec.name + "' carries " +
                                              std::to_string(spec.num_charts()));
  };
  if (c == "fubini_study") {
    need_charts(spec.complex_dim + 1);
    return fubini_study_atlas(spec.complex_dim, n);
  }
  if (c == "product_fubini_study") {
    if (spec.complex_dim != 2) throw Error(ErrorKind::unsupported, "product_fubini_study needs complex dimension 2");
    need_charts(4);
    return product_fubini_study_atlas(n);
  }
  if (c == "radial_tan") return radial_tan_atlas(spec.complex_dim, n);
  if (c == "box") {
    if (spec.domain.kind != ChartDomain::Kind::box) throw Error(ErrorKind::usage, "box compactification needs a box domain");
    return box_atlas(spec.domain.lower, spec.domain.upper, n);
  }
  if (c == "ball") {
    if (spec.domain.kind != ChartDomain::Kind::ball) throw Error(ErrorKind::usage, "ball compactification needs a ball domain");
    return ball_atlas(spec.domain.ball, n);
  }
  throw Error(ErrorKind::usage, "unknown compactification '" + c + "'");
}

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0, comp_ = 0.0;
};

/// Lebesgue density in chart coordinates with k components.
using Density = std::function<std::vector<double>(std::span<const double>)>;
/// Same, for atlases spread over several charts.
using NodeDensity = std::function<std::vector<double>(const QuadratureNode&)>;

struct IntegralResult {
  std::vector<double> value;
  std::vector<double> error;  // |I(q) - I(q/2)|, floored at the rounding level
  std::vector<double> l1;     // sum |w f|, the scale of rounding in the sum

  IntegralResult& operator+=(const IntegralResult& b) {
    for (std::size_t i = 0; i < value.size(); ++i) {
      value[i] += b.value[i];
      error[i] += b.error[i];
      l1[i] += b.l1[i];
    }
    return *this;
  }
};

/// Rounding floor of the error estimate, relative to the L1 mass of the summand.
inline constexpr double kRoundingFloor = 1e-13;

inline int worker_count() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(std::min(hw, 16u));
}

/// Evaluates `f` at every node (concurrently) and reduces in node order.
inline IntegralResult integrate_once(const QuadratureAtlas& atlas, const NodeDensity& f) {
  const std::size_t N = atlas.nodes.size();
  std::vector<std::vector<double>> slots(N);
  std::vector<std::exception_ptr> errors(N);
  const int workers = std::max(1, std::min<int>(worker_count(), static_cast<int>(N)));
  auto run = [&](int w) {
    for (std::size_t i = static_cast<std::size_t>(w); i < N; i += static_cast<std::size_t>(workers)) {
      try {
        slots[i] = f(atlas.nodes[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(run, w);
    for (auto& t : pool) t.join();
  }
  for (std::size_t i = 0; i < N; ++i)
    if (errors[i]) std::rethrow_exception(errors[i]);

  const std::size_t k = N ? slots[0].size() : 0;
  std::vector<CompensatedSum> sums(k);
  IntegralResult r{std::vector<double>(k), std::vector<double>(k, 0.0), std::vector<double>(k, 0.0)};
  for (std::size_t i = 0; i < N; ++i) {
    if (slots[i].size() != k) throw Error(ErrorKind::shape, "density returned a varying number of components");
    for (std::size_t c = 0; c < k; ++c) {
      const double v = slots[i][c];
      if (!std::isfinite(v)) {
        std::string where;
        for (double x : atlas.nodes[i].x) where += (where.empty() ? "" : ", ") + std::to_string(x);
        throw Error(ErrorKind::evaluation, "non-finite density at quadrature node " + std::to_string(i) + " (chart " +
                                               std::to_string(atlas.nodes[i].chart) + ": " + where + ")");
      }
      sums[c].add(atlas.nodes[i].weight * v);
      r.l1[c] += std::abs(atlas.nodes[i].weight * v);
    }
  }
  for (std::size_t c = 0; c < k; ++c) r.value[c] = sums[c].value();
  return r;
}

inline IntegralResult integrate_once(const QuadratureAtlas& atlas, const Density& f) {
  return integrate_once(atlas, NodeDensity([&f](const QuadratureNode& n) { return f(n.x); }));
}

/// Integral on q nodes per axis with error estimate against q/2 nodes per axis.
inline IntegralResult integrate(const std::function<QuadratureAtlas(int)>& make_atlas, int q, const NodeDensity& f) {
  IntegralResult fine = integrate_once(make_atlas(q), f);
  const IntegralResult coarse = integrate_once(make_atlas(std::max(1, q / 2)), f);
  for (std::size_t c = 0; c < fine.value.size(); ++c)
    fine.error[c] = std::max(std::abs(fine.value[c] - coarse.value[c]), kRoundingFloor * fine.l1[c]);
  return fine;
}

struct QuadratureOptions {
  int nodes_per_axis = 0;  // 0: default for the chart dimension
  int patch_nodes = 0;     // angular nodes on deformation patches; 0: default for the dimension

  int nodes_for(int real_dim) const { return nodes_per_axis > 0 ? nodes_per_axis : default_nodes_per_axis(real_dim); }
  int patch_for(int real_dim) const { return patch_nodes > 0 ? patch_nodes : default_patch_nodes(real_dim); }
};

/// A density that depends on which Kähler form of the chart is in use.
using ChartDensity = std::function<std::vector<double>(const KahlerChartSpec&, std::span<const double>)>;

/// Integral of f(spec) - f(base) over the support ball of a deformed spec.
inline IntegralResult integrate_deformation_patch(const KahlerChartSpec& spec, const ChartDensity& f,
                                                  const QuadratureOptions& opt = {}) {
  if (!spec.base || !spec.deformation_support) throw Error(ErrorKind::usage, "spec has no localized deformation");
  const KahlerChartSpec& base = *spec.base;
  const Ball ball = *spec.deformation_support;
  NodeDensity diff = [&](const QuadratureNode& n) {
    auto a = f(spec, n.x);
    const auto b = f(base, n.x);
    for (std::size_t i = 0; i < a.size(); ++i) a[i] -= b[i];
    return a;
  };
  return integrate([&](int q) { return ball_atlas(ball, q, patch_radial_nodes(q)); }, opt.patch_for(spec.real_dim()), diff);
}

/// Integral over the manifold. A deformation with known support is integrated
/// as the base integral plus the change inside the support ball.
inline IntegralResult integrate_manifold(const KahlerChartSpec& spec, const ChartDensity& f, const QuadratureOptions& opt = {}) {
  if (spec.base && spec.deformation_support) {
    IntegralResult r = integrate_manifold(*spec.base, f, opt);
    r += integrate_deformation_patch(spec, f, opt);
    return r;
  }
  NodeDensity g = [&](const QuadratureNode& n) { return f(chart_of(spec, n.chart), n.x); };
  return integrate([&](int q) { return atlas_for(spec, q); }, opt.nodes_for(spec.real_dim()), g);
}

/// Volume of (M, omega) as the integral of omega^n / n!.
inline IntegralResult volume(const KahlerChartSpec& spec, const QuadratureOptions& opt = {}) {
  return integrate_manifold(
      spec,
      [](const KahlerChartSpec& s, std::span<const double> x) {
        return std::vector<double>{point_geometry(s, x, 2).volume_density};
      },
      opt);
}

/// A function on the manifold given by its expression in each affine chart.
struct GlobalFunction {
  std::vector<ScalarField> charts;

  GlobalFunction() = default;
  GlobalFunction(ScalarField single) : charts{std::move(single)} {}
  explicit GlobalFunction(std::vector<ScalarField> per_chart) : charts(std::move(per_chart)) {}

  const ScalarField& on(int chart) const {
    if (chart < 0 || chart >= static_cast<int>(charts.size()))
      throw Error(ErrorKind::usage, "function has no expression in chart " + std::to_string(chart));
    return charts[static_cast<std::size_t>(chart)];
  }
  const ScalarField& on(const KahlerChartSpec& chart) const { return on(chart.chart_index); }
};

/// f minus its mean with respect to omega^n / n!.
struct MeanZero {
  double mean = 0.0;
  double error = 0.0;
  GlobalFunction projected;
};

inline MeanZero mean_zero_project(const KahlerChartSpec& spec, const GlobalFunction& f, const QuadratureOptions& opt = {}) {
  const IntegralResult r = integrate_manifold(
      spec,
      [&f](const KahlerChartSpec& s, std::span<const double> x) {
        const double vol = point_geometry(s, x, 2).volume_density;
        const double fx = f.on(s)(coordinate_jets(x, 0)).value();
        return std::vector<double>{vol, fx * vol};
      },
      opt);
  MeanZero out;
  out.mean = r.value[1] / r.value[0];
  out.error = r.error[1] / r.value[0] + std::abs(out.mean) * r.error[0] / r.value[0];
  const double mean = out.mean;
  for (const auto& g : f.charts) out.projected.charts.push_back([g, mean](std::span<const Jet> x) { return g(x) - mean; });
  return out;
}

}  // namespace kfut
