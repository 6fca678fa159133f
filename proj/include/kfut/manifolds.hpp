#pragma once

// Built-in charts (flat, CP^1, CP^2, CP^1 x CP^1) and the compactly supported
// bumps used to deform potentials and perturb connections.

#include <memory>
#include <random>
#include <string>
#include <vector>

#include "kfut/error.hpp"
#include "kfut/expression.hpp"
#include "kfut/kahler_chart.hpp"

namespace kfut {

inline ScalarField scalar_field(const Expression& e) {
  return [e](std::span<const Jet> x) { return e(x); };
}

inline KahlerChartSpec chart_from_expression(std::string name, int complex_dim, const std::string& potential,
                                             std::string compactification, ChartDomain domain = {}) {
  KahlerChartSpec s;
  s.name = std::move(name);
  s.complex_dim = complex_dim;
  s.potential = scalar_field(Expression::parse(potential, 2 * complex_dim));
  s.potential_source = potential;
  s.compactification = std::move(compactification);
  s.domain = std::move(domain);
  return s;
}

inline std::vector<std::string> manifold_names() { return {"cp1", "cp1xcp1", "cp2", "flat1", "flat2"}; }

/// Gives `chart0` further affine charts, chart k carrying potential `sources[k - 1]`.
inline KahlerChartSpec with_charts(KahlerChartSpec chart0, const std::vector<std::string>& sources) {
  chart0.other_charts.clear();
  for (std::size_t k = 0; k < sources.size(); ++k) {
    KahlerChartSpec c = chart_from_expression(chart0.name, chart0.complex_dim, sources[k], chart0.compactification, chart0.domain);
    c.chart_index = static_cast<int>(k + 1);
    chart0.other_charts.push_back(std::make_shared<const KahlerChartSpec>(std::move(c)));
  }
  return chart0;
}

/// CP^n and CP^1 x CP^1 carry the Fubini-Study potential in every standard
/// affine chart (it has the same form in each). Flat charts use |z|^2 / 4 so
/// that g is the Euclidean metric; they are integrated over the unit box as a
/// torus-style fundamental domain.
inline KahlerChartSpec builtin_manifold(const std::string& name) {
  auto multi = [](std::string n, int dim, const std::string& pot, std::string comp, int charts) {
    return with_charts(chart_from_expression(std::move(n), dim, pot, std::move(comp)),
                       std::vector<std::string>(static_cast<std::size_t>(charts - 1), pot));
  };
  if (name == "cp1") return multi("cp1", 1, "log(1 + x1^2 + x2^2)", "fubini_study", 2);
  if (name == "cp2") return multi("cp2", 2, "log(1 + x1^2 + x2^2 + x3^2 + x4^2)", "fubini_study", 3);
  if (name == "cp1xcp1")
    return multi("cp1xcp1", 2, "log(1 + x1^2 + x2^2) + log(1 + x3^2 + x4^2)", "product_fubini_study", 4);
  if (name == "flat1" || name == "flat2") {
    const int n = name == "flat1" ? 1 : 2;
    ChartDomain box;
    box.kind = ChartDomain::Kind::box;
    box.lower.assign(static_cast<std::size_t>(2 * n), 0.0);
    box.upper.assign(static_cast<std::size_t>(2 * n), 1.0);
    return chart_from_expression(name, n, n == 1 ? "(x1^2 + x2^2) / 4" : "(x1^2 + x2^2 + x3^2 + x4^2) / 4", "box",
                                 box);
  }
  throw Error(ErrorKind::usage, "unknown manifold '" + name + "'");
}

/// max(0, 1 - |x - c|^2 / r^2)^power as a jet-evaluable function.
inline ScalarField bump_function(const Ball& ball, int power) {
  return [ball, power](std::span<const Jet> x) {
    Jet s = x[0].lift(1.0);
    for (std::size_t i = 0; i < ball.center.size(); ++i) {
      Jet d = x[i] - ball.center[i];
      s.add_scaled(-1.0 / (ball.radius * ball.radius), d * d);
    }
    if (!(s.value() > 0.0)) return x[0].lift(0.0);
    return pow(s, power);
  };
}

inline constexpr int kPotentialBumpPower = 8;

inline KahlerChartSpec deform_with_bump(const KahlerChartSpec& base, const Ball& ball, double amplitude) {
  KahlerChartSpec out = deform(base, bump_function(ball, kPotentialBumpPower), amplitude, ball);
  out.name = base.name + "+bump";
  return out;
}

/// A completely symmetric lowered perturbation A_(b, c, d) = S_{bcd} (1 - |x - c|^2/r^2)_+^6.
struct ConnectionBump {
  Tensor S;
  Ball support;

  JetTensor lowered(std::span<const double> p, int order) const {
    const int m = S.dim();
    auto xs = coordinate_jets(p, order);
    const Jet profile = bump_function(support, 6)(xs);
    JetTensor out(m, 3);
    for (std::size_t i = 0; i < S.size(); ++i) out[i] = S[i] * profile;
    return out;
  }

  static ConnectionBump random(int m, const Ball& support, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    ConnectionBump b{Tensor(m, 3, 0.0), support};
    for (int i = 0; i < m; ++i)
      for (int j = i; j < m; ++j)
        for (int k = j; k < m; ++k) {
          const double v = u(rng);
          const int perm[6][3] = {{i, j, k}, {i, k, j}, {j, i, k}, {j, k, i}, {k, i, j}, {k, j, i}};
          for (const auto& q : perm) b.S(q[0], q[1], q[2]) = v;
        }
    return b;
  }
};

}  // namespace kfut
