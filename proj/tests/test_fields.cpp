#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "kfut/fields.hpp"
#include "kfut/manifolds.hpp"

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

double relative(const FieldResiduals& r) { return r.max() / std::max(1.0, r.field_norm); }

}  // namespace

TEST(Fields, BuiltinFieldsPassResidualsInEveryChart) {
  std::mt19937_64 rng(31);
  for (const char* man : {"cp1", "cp2", "cp1xcp1"}) {
    const auto base = builtin_manifold(man);
    const auto bumped =
        deform_with_bump(base, Ball{std::vector<double>(static_cast<std::size_t>(base.real_dim()), 0.1), 1.0}, 0.05);
    for (const auto& f : builtin_fields(man)) {
      double worst = 0.0;
      for (int k = 0; k < base.num_charts(); ++k)
        for (int i = 0; i < 5; ++i) {
          const auto g = point_geometry(chart_of(base, k), polydisc_point(base.real_dim(), rng), 4);
          worst = std::max(worst, relative(holomorphic_residuals(f.on(k), g)));
        }
      for (int i = 0; i < 5; ++i) {
        const auto g = point_geometry(bumped, polydisc_point(base.real_dim(), rng), 4);
        worst = std::max(worst, relative(holomorphic_residuals(field_on(f, bumped), g)));
      }
      EXPECT_LT(worst, 1e-8) << man << " " << f.name;
    }
  }
}

// The rotation of CP1 is J times the circle action w -> e^{it} w; its H is the
// circle's moment map -2|w|^2 / (1 + |w|^2) in chart 0 and F vanishes.
TEST(Fields, RotationHamiltonianMatchesClosedForm) {
  const auto spec = builtin_manifold("cp1");
  const auto rot = builtin_field("cp1", "rot");
  for (const auto& x : {std::vector<double>{0.3, -0.4}, std::vector<double>{0.9, 0.1}}) {
    const auto g = point_geometry(spec, x, 4);
    const double s = x[0] * x[0] + x[1] * x[1];
    EXPECT_NEAR(jet_of(g, rot.on(0).H, 0).value(), -2.0 * s / (1.0 + s), 1e-15);
    EXPECT_EQ(jet_of(g, rot.on(0).F, 0).value(), 0.0);
    // Radial field: Z = -(x, y) in the chart.
    const auto Z = jet_of(g, rot.on(0).Z, 0);
    EXPECT_NEAR(Z[0].value(), -x[0], 1e-15);
    EXPECT_NEAR(Z[1].value(), -x[1], 1e-15);
  }
}

TEST(Fields, ZeroFieldHasZeroResiduals) {
  const auto spec = builtin_manifold("cp2");
  const auto zero = scaled_field(builtin_field("cp2", "boost1"), 0.0, "zero");
  const auto g = point_geometry(spec, std::vector<double>{0.1, 0.2, 0.3, 0.4}, 4);
  const auto r = holomorphic_residuals(zero.on(0), g);
  EXPECT_EQ(r.max(), 0.0);
  EXPECT_EQ(r.field_norm, 0.0);
}

TEST(Fields, CorruptedHamiltonianIsDetected) {
  const auto spec = builtin_manifold("cp1");
  const auto rot = builtin_field("cp1", "rot");
  FieldChart bad = rot.on(0);
  bad.H = [H = bad.H](std::span<const Jet> x) { return 2.0 * H(x); };
  const std::vector<double> x{0.4, 0.3};
  const auto g = point_geometry(spec, x, 4);
  const auto r = holomorphic_residuals(bad, g);
  EXPECT_GT(r.decomposition, 0.1 * r.field_norm);
  try {
    require_valid_field("bad", r, x);
    FAIL() << "expected invalid_field";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::invalid_field);
  }
}

TEST(Fields, FlatTranslation) {
  const auto flat = builtin_manifold("flat1");
  const auto t = builtin_field("flat1", "translate_x");
  const auto g = point_geometry(flat, std::vector<double>{0.2, 0.7}, 4);
  EXPECT_EQ(holomorphic_residuals(t.on(0), g).max(), 0.0);
}

TEST(Fields, LinearCombinationsAndBrackets) {
  std::mt19937_64 rng(32);
  const auto spec = builtin_manifold("cp2");
  const auto Y = builtin_field("cp2", "rot1"), Z = builtin_field("cp2", "shear12");
  const auto sum = combine_fields(Y, 0.7, Z, -1.3, "sum");
  const auto br = bracket_field(Y, Z, "[rot1,shear12]");
  const auto self = bracket_field(Z, Z, "[shear12,shear12]");
  for (int k = 0; k < 3; ++k)
    for (int i = 0; i < 4; ++i) {
      const auto x = polydisc_point(4, rng);
      const auto g = point_geometry(chart_of(spec, k), x, 4);
      EXPECT_LT(relative(holomorphic_residuals(sum.on(k), g)), 1e-8);
      const auto rb = holomorphic_residuals(br.on(k), g);
      EXPECT_LT(relative(rb), 1e-8);
      EXPECT_GT(rb.field_norm, 1e-3);
      const auto rs = holomorphic_residuals(self.on(k), g);
      EXPECT_LT(rs.field_norm, 1e-14);
      // [E11, E12] = E12 for the matrix generators; rot1 = -E11.
      const auto zb = jet_of(g, br.on(k).Z, 0), zz = jet_of(g, Z.on(k).Z, 0);
      for (std::size_t a = 0; a < zb.size(); ++a) EXPECT_NEAR(std::abs(zb[a].value()), std::abs(zz[a].value()), 1e-12);
    }
}

TEST(Fields, UnknownNamesAreUsageErrors) {
  try {
    builtin_field("cp2", "nope");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::usage);
  }
  EXPECT_EQ(builtin_field_names("cp1").size(), 3u);
  EXPECT_TRUE(builtin_fields("unknown").empty());
}
