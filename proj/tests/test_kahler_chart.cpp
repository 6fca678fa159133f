#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "kfut/kahler_chart.hpp"
#include "kfut/manifolds.hpp"
#include "kfut/moment_map.hpp"

using namespace kfut;

namespace {

std::vector<double> random_point(int m, std::mt19937_64& rng, double r = 1.5) {
  std::uniform_real_distribution<double> u(-r, r);
  std::vector<double> p(static_cast<std::size_t>(m));
  for (auto& x : p) x = u(rng);
  return p;
}

double max_abs_values(const JetTensor& t) { return max_abs(values(t).data()); }

}  // namespace

TEST(KahlerChart, FlatPotentialIsFlat) {
  auto spec = chart_from_expression("flat", 1, "(x1^2 + x2^2) / 2", "box");
  auto geom = point_geometry(spec, std::vector<double>{0.3, -0.7});
  EXPECT_DOUBLE_EQ(geom.omega(0, 1).value(), 2.0);
  EXPECT_DOUBLE_EQ(geom.omega(1, 0).value(), -2.0);
  EXPECT_DOUBLE_EQ(geom.g(0, 0).value(), 2.0);
  EXPECT_DOUBLE_EQ(geom.g(0, 1).value(), 0.0);
  EXPECT_EQ(max_abs_values(geom.gamma), 0.0);
  for (double c : geom.omega(0, 1).coeffs().subspan(1)) EXPECT_EQ(c, 0.0);
  auto curv = curvature(geom, levi_civita(geom), 2);
  EXPECT_EQ(max_abs_values(curv.R), 0.0);
  EXPECT_EQ(curv.scal.value(), 0.0);
}

TEST(KahlerChart, PluriharmonicTermsDoNotChangeOmega) {
  auto a = chart_from_expression("a", 2, "log(1 + x1^2 + x2^2 + x3^2 + x4^2)", "fubini_study");
  auto b = chart_from_expression("b", 2, "log(1 + x1^2 + x2^2 + x3^2 + x4^2) + x1^2 - x2^2 + 3 * x1 * x4 + 3 * x2 * x3",
                                 "fubini_study");
  std::mt19937_64 rng(5);
  for (int i = 0; i < 10; ++i) {
    auto p = random_point(4, rng);
    auto ga = point_geometry(a, p), gb = point_geometry(b, p);
    for (std::size_t k = 0; k < ga.omega.size(); ++k)
      for (std::size_t c = 0; c < ga.omega[k].coeffs().size(); ++c)
        EXPECT_NEAR(ga.omega[k].coeffs()[c], gb.omega[k].coeffs()[c], 1e-10);
  }
}

// Closed form for the round metric g = 4 / (1 + r^2)^2 (dx^2 + dy^2) = e^{2f} I:
// Gamma^x_xx = f_x, Gamma^x_yy = -f_x, Gamma^x_xy = f_y and symmetrically in y.
TEST(KahlerChart, FubiniStudyMatchesConformalOracle) {
  auto spec = builtin_manifold("cp1");
  auto at0 = point_geometry(spec, std::vector<double>{0.0, 0.0});
  EXPECT_NEAR(at0.g(0, 0).value(), 4.0, 1e-14);
  EXPECT_NEAR(at0.g(0, 1).value(), 0.0, 1e-14);
  EXPECT_NEAR(max_abs_values(at0.gamma), 0.0, 1e-14);
  EXPECT_GT(std::abs(at0.gamma(0, 0, 0).derivative({1, 0})), 1.0);

  std::mt19937_64 rng(3);
  for (int i = 0; i < 20; ++i) {
    auto p = random_point(2, rng);
    const double x = p[0], y = p[1], r2 = x * x + y * y;
    const double fx = -2 * x / (1 + r2), fy = -2 * y / (1 + r2);
    auto geom = point_geometry(spec, p);
    EXPECT_NEAR(geom.g(0, 0).value(), 4 / ((1 + r2) * (1 + r2)), 1e-12);
    EXPECT_NEAR(geom.gamma(0, 0, 0).value(), fx, 1e-12);
    EXPECT_NEAR(geom.gamma(0, 1, 1).value(), -fx, 1e-12);
    EXPECT_NEAR(geom.gamma(0, 0, 1).value(), fy, 1e-12);
    EXPECT_NEAR(geom.gamma(1, 1, 1).value(), fy, 1e-12);
    EXPECT_NEAR(geom.gamma(1, 0, 0).value(), -fy, 1e-12);
    EXPECT_NEAR(geom.volume_density, 4 / ((1 + r2) * (1 + r2)), 1e-12);
    auto curv = curvature(geom, levi_civita(geom), 0);
    EXPECT_NEAR(curv.scal.value(), 2.0, 1e-10);
  }
}

TEST(KahlerChart, ErrorsOnBadInput) {
  auto spec = chart_from_expression("neg", 1, "-(x1^2 + x2^2)", "box");
  try {
    (void)point_geometry(spec, std::vector<double>{0.1, 0.2});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::not_kahler);
  }
  auto degenerate = chart_from_expression("deg", 1, "x1 + x2", "box");
  try {
    (void)point_geometry(degenerate, std::vector<double>{0.1, 0.2});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::degenerate);
  }
  auto cp1 = builtin_manifold("cp1");
  EXPECT_THROW((void)point_geometry(cp1, std::vector<double>{0.1, 0.2, 0.3}), Error);
  auto low = point_geometry(cp1, std::vector<double>{0.1, 0.2}, 3);
  try {
    (void)curvature(low, levi_civita(low), 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::order);
  }
}

TEST(KahlerChart, ConnectionsPreserveOmegaAndMetric) {
  std::mt19937_64 rng(17);
  auto base = builtin_manifold("cp2");
  auto spec = deform_with_bump(base, Ball{{0.2, 0.1, -0.1, 0.3}, 0.8}, 0.05);
  for (int i = 0; i < 10; ++i) {
    auto p = random_point(4, rng, 0.5);
    auto geom = point_geometry(spec, p);
    auto dg = covariant_derivative(geom.g, {false, false}, geom.gamma);
    auto dw = covariant_derivative(geom.omega, {false, false}, geom.gamma);
    EXPECT_LT(max_abs_values(dg), 1e-9);
    EXPECT_LT(max_abs_values(dw), 1e-9);
    auto bump = ConnectionBump::random(4, Ball{{0.0, 0.0, 0.0, 0.0}, 1.0}, rng);
    auto conn = perturb(geom, bump.lowered(p, 4), 0.3);
    auto dw2 = covariant_derivative(geom.omega, {false, false}, conn.coefficients);
    EXPECT_LT(max_abs_values(dw2), 1e-9);
  }
}

TEST(KahlerChart, FirstBianchiAndRicciSymmetry) {
  std::mt19937_64 rng(23);
  for (const char* name : {"cp2", "cp1xcp1"}) {
    auto spec = deform_with_bump(builtin_manifold(name), Ball{{0.1, 0.0, 0.2, -0.1}, 0.9}, 0.03);
    for (int i = 0; i < 8; ++i) {
      auto p = random_point(4, rng, 0.6);
      auto geom = point_geometry(spec, p, 4);
      auto curv = curvature(geom, levi_civita(geom), 0);
      double bianchi = 0.0, antisym = 0.0, ric = 0.0;
      for (int a = 0; a < 4; ++a)
        for (int j = 0; j < 4; ++j)
          for (int k = 0; k < 4; ++k)
            for (int l = 0; l < 4; ++l) {
              bianchi = std::max(bianchi, std::abs(curv.R(a, j, k, l).value() + curv.R(a, k, l, j).value() +
                                                   curv.R(a, l, j, k).value()));
              antisym = std::max(antisym, std::abs(curv.R(a, j, k, l).value() + curv.R(a, j, l, k).value()));
            }
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) ric = std::max(ric, std::abs(curv.ric(a, b).value() - curv.ric(b, a).value()));
      EXPECT_LT(bianchi, 1e-8);
      EXPECT_EQ(antisym, 0.0);
      EXPECT_LT(ric, 1e-9);
    }
  }
}

TEST(KahlerChart, ProductOfEqualFactorsIsEinstein) {
  auto spec = builtin_manifold("cp1xcp1");
  auto geom = point_geometry(spec, std::vector<double>{0.4, -0.3, 1.2, 0.5}, 4);
  auto curv = curvature(geom, levi_civita(geom), 0);
  for (int a = 0; a < 2; ++a)
    for (int b = 2; b < 4; ++b)
      for (int c = 0; c < 4; ++c)
        for (int d = 0; d < 4; ++d) EXPECT_NEAR(curv.R(a, b, c, d).value(), 0.0, 1e-12);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) EXPECT_NEAR(curv.ric(a, b).value(), geom.g(a, b).value(), 1e-10);
}

TEST(KahlerChart, LaplacianExamples) {
  auto flat = builtin_manifold("flat1");
  auto geom = point_geometry(flat, std::vector<double>{0.2, 0.4});
  auto xs = coordinate_jets(geom.point, 2);
  EXPECT_NEAR(std::abs(laplacian(geom, xs[0] * xs[0] + xs[1] * xs[1])), 4.0, 1e-13);
  EXPECT_EQ(laplacian(geom, xs[0].lift(3.0)), 0.0);
  auto cp1 = builtin_manifold("cp1");
  auto g1 = point_geometry(cp1, std::vector<double>{0.7, -0.2});
  EXPECT_NEAR(laplacian(g1, curvature(g1, levi_civita(g1), 0).scal), 0.0, 1e-9);
}

TEST(KahlerChart, SymplecticDualFrame) {
  auto spec = deform_with_bump(builtin_manifold("cp2"), Ball{{0, 0, 0, 0}, 1.0}, 0.05);
  auto geom = point_geometry(spec, std::vector<double>{0.1, 0.2, -0.3, 0.05});
  const int m = 4;
  for (int k = 0; k < m; ++k)
    for (int l = 0; l < m; ++l) {
      // omega(e_k, e^l) with e^l = Lambda^{ml} d_m
      double s = 0.0;
      for (int a = 0; a < m; ++a) s += geom.omega(k, a).value() * geom.lambda(a, l).value();
      EXPECT_NEAR(s, k == l ? 1.0 : 0.0, 1e-13);
    }
}

TEST(KahlerChart, HamiltonianFieldSign) {
  auto spec = chart_from_expression("flat", 1, "(x1^2 + x2^2) / 4", "box");
  auto geom = point_geometry(spec, std::vector<double>{0.5, 0.5});
  auto xs = coordinate_jets(geom.point, 3);
  auto X = hamiltonian_field(geom, xs[0]);
  EXPECT_DOUBLE_EQ(X[0].value(), 0.0);
  EXPECT_DOUBLE_EQ(X[1].value(), -1.0);
  auto Z = hamiltonian_field(geom, xs[0].lift(2.0));
  EXPECT_EQ(Z[0].value(), 0.0);
  EXPECT_EQ(Z[1].value(), 0.0);
}

// Two affine charts of CP^1 related by w = 1/z; the deformation
// 0.1 x / (1 + |z|^2) has the same form in both charts.
TEST(KahlerChart, ScalarCurvatureIsChartIndependent) {
  auto z_chart = chart_from_expression("z", 1, "log(1 + x1^2 + x2^2) + 0.1 * x1 / (1 + x1^2 + x2^2)", "fubini_study");
  std::mt19937_64 rng(41);
  for (int i = 0; i < 10; ++i) {
    auto p = random_point(2, rng, 1.2);
    const double r2 = p[0] * p[0] + p[1] * p[1];
    std::vector<double> q{p[0] / r2, -p[1] / r2};
    auto gz = point_geometry(z_chart, p, 4);
    auto gw = point_geometry(z_chart, q, 4);
    const double sz = curvature(gz, levi_civita(gz), 0).scal.value();
    const double sw = curvature(gw, levi_civita(gw), 0).scal.value();
    EXPECT_NEAR(sz, sw, 1e-8);
  }
}
