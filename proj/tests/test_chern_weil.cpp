#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <numbers>
#include <random>

#include "kfut/chern_weil.hpp"
#include "kfut/fields.hpp"
#include "kfut/manifolds.hpp"
#include "kfut/quadrature.hpp"

using namespace kfut;

namespace {

std::vector<double> polydisc_point(int m, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> r(0.0, 1.0), t(0.0, 2.0 * std::numbers::pi);
  std::vector<double> p(static_cast<std::size_t>(m));
  for (int k = 0; k < m; k += 2) {
    const double rad = std::sqrt(r(rng)), th = t(rng);
    p[static_cast<std::size_t>(k)] = rad * std::cos(th);
    p[static_cast<std::size_t>(k + 1)] = rad * std::sin(th);
  }
  return p;
}

KahlerChartSpec bumped(const std::string& name) {
  const auto base = builtin_manifold(name);
  return deform_with_bump(base, Ball{std::vector<double>(static_cast<std::size_t>(base.real_dim()), 0.15), 1.0}, 0.05);
}

CurvatureBundle curvature_at(const KahlerChartSpec& s, std::span<const double> x, int order = 4) {
  const auto g = point_geometry(s, x, order);
  return curvature(g, levi_civita(g), 0);
}

RealForm random_form(int dim, int degree, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  RealForm f(dim, degree);
  for (std::uint32_t mask = 0; mask < (1u << dim); ++mask)
    if (std::popcount(mask) == degree) f[mask] = u(rng);
  return f;
}

}  // namespace

TEST(ChernWeil, FlatChartHasNoChernForms) {
  const auto flat = builtin_manifold("flat2");
  const auto c = chern_forms(curvature_at(flat, std::vector<double>{0.1, 0.2, 0.3, 0.4}));
  EXPECT_EQ(c.c1.max_abs(), 0.0);
  EXPECT_EQ(c.c2.max_abs(), 0.0);
  EXPECT_EQ(pontryagin_identity_residual(curvature_at(flat, std::vector<double>{0.5, 0.5, 0.5, 0.5})), 0.0);
}

TEST(ChernWeil, ChernNumbersOfProjectiveSpaces) {
  auto integral = [](const KahlerChartSpec& spec, auto&& pick) {
    return integrate_manifold(spec, [&](const KahlerChartSpec& s, std::span<const double> x) {
             return std::vector<double>{pick(chern_forms(curvature_at(s, x))).real()};
           })
        .value[0];
  };
  EXPECT_NEAR(integral(builtin_manifold("cp1"), [](const ChernForms& c) { return c.c1.top(); }), 2.0, 1e-6);
  EXPECT_NEAR(integral(bumped("cp1"), [](const ChernForms& c) { return c.c1.top(); }), 2.0, 1e-6);
  // chi(CP^2) = 3 and c1^2 = 9 (c1 = 3 times the hyperplane class).
  const auto cp2 = builtin_manifold("cp2");
  EXPECT_NEAR(integral(cp2, [](const ChernForms& c) { return c.c2.top(); }), 3.0, 1e-6);
  EXPECT_NEAR(integral(cp2, [](const ChernForms& c) { return c.c1.wedge(c.c1).top(); }), 9.0, 1e-6);
}

TEST(ChernWeil, FirstChernFormIsRicciOverTwoPi) {
  std::mt19937_64 rng(21);
  for (const char* name : {"cp1", "cp2", "cp1xcp1"}) {
    const auto spec = bumped(name);
    for (int i = 0; i < 10; ++i) {
      const auto curv = curvature_at(spec, polydisc_point(spec.real_dim(), rng));
      const auto c = chern_forms(curv);
      const ComplexForm diff = c.c1 - complexify(ricci_form(curv)) * cplx(0.5 / std::numbers::pi);
      EXPECT_LT(diff.max_abs(), 1e-8) << name;
    }
  }
}

TEST(ChernWeil, EinsteinFirstChernFormIsProportionalToOmega) {
  const auto cp2 = builtin_manifold("cp2");
  std::mt19937_64 rng(22);
  for (int k = 0; k < 3; ++k)
    for (int i = 0; i < 5; ++i) {
      const auto x = polydisc_point(4, rng);
      const auto g = point_geometry(chart_of(cp2, k), x, 4);
      const auto c = chern_forms(curvature(g, levi_civita(g), 0));
      // c1 = lambda omega with lambda^2 int omega^2 = int c1^2 = 9 and int omega^2 = 2 V = 16 pi^2.
      const ComplexForm diff = c.c1 - complexify(omega_form(g)) * cplx(0.75 / std::numbers::pi);
      EXPECT_LT(diff.max_abs(), 1e-10);
    }
}

TEST(ChernWeil, PontryaginIdentity) {
  std::mt19937_64 rng(23);
  const auto cp2 = builtin_manifold("cp2");
  const auto bumped_cp2 = bumped("cp2");
  double worst = 0.0, worst_bumped = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto x = polydisc_point(4, rng);
    worst = std::max(worst, pontryagin_identity_residual(curvature_at(chart_of(cp2, i % 3), x)));
    worst_bumped = std::max(worst_bumped, pontryagin_identity_residual(curvature_at(bumped_cp2, x)));
  }
  EXPECT_LT(worst, 1e-8);
  EXPECT_LT(worst_bumped, 1e-7);
}

TEST(ChernWeil, WedgeIsGradedCommutative) {
  std::mt19937_64 rng(24);
  for (int p = 0; p <= 3; ++p)
    for (int q = 0; q + p <= 4; ++q) {
      const RealForm a = random_form(4, p, rng), b = random_form(4, q, rng);
      const double sign = (p * q) % 2 ? -1.0 : 1.0;
      RealForm d = a.wedge(b);
      d -= sign * b.wedge(a);
      EXPECT_LT(d.max_abs(), 1e-15) << p << " " << q;
    }
}

TEST(EndoL, ZeroAndIdentityExamples) {
  const auto flat = builtin_manifold("flat1");
  const std::vector<double> x{0.4, -0.2};
  const auto g = point_geometry(flat, x, 4);
  auto jets = coordinate_jets(x, 1);
  const std::vector<Jet> zero{jets[0].lift(0.0), jets[0].lift(0.0)};
  const EndoL L0 = endo_L(g, zero);
  EXPECT_EQ(std::abs(L0(0, 0)), 0.0);
  // z d/dz is the real field x d_x + y d_y.
  const std::vector<Jet> euler{jets[0], jets[1]};
  const EndoL L1 = endo_L(g, euler);
  EXPECT_NEAR(std::abs(L1(0, 0) - cplx(1.0)), 0.0, 1e-15);
  // x d_x alone is not holomorphic.
  const std::vector<Jet> bad{jets[0], jets[0].lift(0.0)};
  try {
    endo_L(g, bad);
    FAIL() << "expected invalid_field";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::invalid_field);
  }
}

// tr L(Z^{1,0}) = -(i/2)(Delta F + i Delta H) with the analyst's Laplacian
// (laplacian_sign times the library's operator).
TEST(EndoL, TraceIdentity) {
  std::mt19937_64 rng(25);
  const std::vector<std::pair<std::string, std::vector<std::string>>> cases{{"cp1", {"rot", "boost_x"}},
                                                                           {"cp2", {"rot1", "boost1", "mix"}}};
  for (const auto& [man, names] : cases)
    for (const auto& spec : {builtin_manifold(man), bumped(man)})
      for (const auto& name : names) {
        const auto field = builtin_field(man, name);
        double worst = 0.0;
        for (int i = 0; i < 10; ++i) {
          const auto g = point_geometry(spec, polydisc_point(spec.real_dim(), rng), 4);
          const FieldChart fc = field_on(field, spec);
          const EndoL L = endo_L(g, jet_of(g, fc.Z, 1));
          const double dF = laplacian_sign * laplacian(g, jet_of(g, fc.F, 2));
          const double dH = laplacian_sign * laplacian(g, jet_of(g, fc.H, 2));
          worst = std::max(worst, std::abs(L.trace() - cplx(0.0, -0.5) * cplx(dF, dH)));
        }
        EXPECT_LT(worst, 1e-7) << spec.name << " " << name;
      }
}

TEST(GeneralizedIntegrand, LinearityAndZeroField) {
  const auto spec = bumped("cp2");
  const auto field = builtin_field("cp2", "boost1");
  std::mt19937_64 rng(26);
  for (int i = 0; i < 5; ++i) {
    const auto x = polydisc_point(4, rng);
    const auto g = point_geometry(spec, x, 4);
    const auto curv = curvature(g, levi_civita(g), 0);
    const FieldChart fc = field_on(field, spec);
    const EndoL L = endo_L(g, jet_of(g, fc.Z, 1));
    const cplx u(jet_of(g, fc.F, 0).value(), jet_of(g, fc.H, 0).value());
    const auto a = generalized_futaki_integrand(ChernPolynomial::c1c1, g, curv, L, u);
    const auto b = generalized_futaki_integrand(ChernPolynomial::c2, g, curv, L, u);
    const auto t = generalized_futaki_integrand(ChernPolynomial::td2, g, curv, L, u);
    const auto h = generalized_futaki_integrand(ChernPolynomial::c2_minus_half_c1c1, g, curv, L, u);
    const double s = std::abs(a.term1) + std::abs(a.term2) + std::abs(b.term1) + std::abs(b.term2);
    EXPECT_LT(std::abs(t.term1 - a.term1 - b.term1) + std::abs(t.term2 - a.term2 - b.term2), 1e-12 * s);
    EXPECT_LT(std::abs(h.term1 - b.term1 + 0.5 * a.term1) + std::abs(h.term2 - b.term2 + 0.5 * a.term2), 1e-12 * s);

    // The c1c1 linear term is 2i tr L rho ^ omega / (4 pi^2), entering with -L.
    const double vol = volume_top(g);
    const cplx expected = -cplx(0.0, 2.0) * L.trace() *
                          (ricci_form(curv).wedge(omega_form(g)).top() / vol) / (4.0 * std::numbers::pi * std::numbers::pi);
    EXPECT_LT(std::abs(a.term2 - expected), 1e-12 * std::max(1.0, std::abs(expected)));

    EndoL zero = L;
    for (auto& c : zero.matrix) c = 0.0;
    const auto z = generalized_futaki_integrand(ChernPolynomial::td2, g, curv, zero, 0.0);
    EXPECT_EQ(std::abs(z.term1) + std::abs(z.term2), 0.0);
  }
}

TEST(GeneralizedIntegrand, PolynomialNamesAndErrors) {
  for (auto q : {ChernPolynomial::c1c1, ChernPolynomial::c2, ChernPolynomial::c2_minus_half_c1c1, ChernPolynomial::td2})
    EXPECT_EQ(parse_chern_polynomial(to_string(q)), q);
  try {
    parse_chern_polynomial("td3");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::unsupported);
  }
  const auto cp1 = builtin_manifold("cp1");
  const auto g = point_geometry(cp1, std::vector<double>{0.1, 0.2}, 4);
  const auto curv = curvature(g, levi_civita(g), 0);
  EXPECT_THROW(futaki_chern_integrand(2, g, curv, 1.0), Error);
  EXPECT_THROW(futaki_chern_integrand(3, g, curv, 1.0), Error);
}
