#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "kfut/expression.hpp"
#include "kfut/jet.hpp"
#include "poly_oracle.hpp"

using namespace kfut;
using oracle::Poly;

namespace {

Jet oracle_jet(const Poly& p, std::span<const double> point, int order) {
  Jet j(p.m, order);
  auto c = oracle::taylor_coefficients(p, point, order);
  std::copy(c.begin(), c.end(), j.coeffs().begin());
  return j;
}

double gap(const Jet& a, const Jet& b) { return oracle::relative_gap(a.coeffs(), b.coeffs()); }

std::vector<double> random_point(int m, std::mt19937_64& rng, double r = 0.8) {
  std::uniform_real_distribution<double> u(-r, r);
  std::vector<double> p(static_cast<std::size_t>(m));
  for (auto& x : p) x = u(rng);
  return p;
}

}  // namespace

TEST(Jet, ProductOfVariablesAtPoint) {
  auto xs = coordinate_jets(std::vector<double>{1.0, 2.0}, 2);
  Jet p = xs[0] * xs[1];
  EXPECT_DOUBLE_EQ(p.value(), 2.0);
  EXPECT_DOUBLE_EQ(p.derivative({1, 0}), 2.0);
  EXPECT_DOUBLE_EQ(p.derivative({0, 1}), 1.0);
  EXPECT_DOUBLE_EQ(p.derivative({1, 1}), 1.0);
  EXPECT_DOUBLE_EQ(p.derivative({2, 0}), 0.0);
  EXPECT_DOUBLE_EQ(p.derivative({0, 2}), 0.0);
}

TEST(Jet, LogOfOnePlusRadiusSquared) {
  auto xs = coordinate_jets(std::vector<double>{0.0, 0.0}, 2);
  Jet f = log(1.0 + xs[0] * xs[0] + xs[1] * xs[1]);
  EXPECT_DOUBLE_EQ(f.value(), 0.0);
  EXPECT_DOUBLE_EQ(f.derivative({1, 0}), 0.0);
  EXPECT_DOUBLE_EQ(f.derivative({2, 0}), 2.0);
  EXPECT_DOUBLE_EQ(f.derivative({0, 2}), 2.0);
  EXPECT_DOUBLE_EQ(f.derivative({1, 1}), 0.0);
}

TEST(Jet, ExtractionAndOrderErrors) {
  auto xs = coordinate_jets(std::vector<double>{0.0, 0.0}, 6);
  Jet cube = pow(xs[0], 3);
  EXPECT_DOUBLE_EQ(cube.derivative({3, 0}), 6.0);
  EXPECT_DOUBLE_EQ(exp(xs[0]).derivative({4, 0}), 1.0);
  EXPECT_DOUBLE_EQ(exp(xs[0]).derivative({0, 0}), 1.0);
  try {
    (void)cube.derivative({4, 3});
    FAIL() << "expected out_of_order";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::out_of_order);
  }
}

TEST(Jet, ShapeAndSingularErrors) {
  Jet a(2, 3), b(2, 4), c(3, 3);
  try {
    (void)(a + b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::shape);
  }
  try {
    (void)(a * c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::shape);
  }
  try {
    (void)(a.lift(1.0) / a);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::singular);
  }
}

TEST(Jet, AdditiveInverseIsZero) {
  std::mt19937_64 rng(11);
  auto pt = random_point(4, rng);
  Jet a = oracle::jet_from_poly(Poly::random(4, 6, rng), pt, 6);
  Jet z = a + (-a);
  for (double c : z.coeffs()) EXPECT_EQ(c, 0.0);
}

TEST(Jet, CoefficientCountIsBinomial) {
  for (int m = 1; m <= kMaxJetVars; ++m)
    for (int k = 0; k <= kMaxJetOrder; ++k) EXPECT_EQ(Jet(m, k).coeffs().size(), binomial(m + k, k));
}

TEST(Jet, PolynomialArithmeticMatchesSymbolicOracle) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 40; ++trial) {
    const int m = 1 + trial % 4;
    const int K = 6;
    auto pt = random_point(m, rng);
    Poly p = Poly::random(m, 6, rng), q = Poly::random(m, 6, rng);
    Jet jp = oracle::jet_from_poly(p, pt, K), jq = oracle::jet_from_poly(q, pt, K);
    EXPECT_LT(gap(jp, oracle_jet(p, pt, K)), 1e-12);
    EXPECT_LT(gap(jp + jq, oracle_jet(p + q, pt, K)), 1e-12);
    EXPECT_LT(gap(jp - jq, oracle_jet(p - q, pt, K)), 1e-12);
    EXPECT_LT(gap(jp * jq, oracle_jet(p * q, pt, K)), 1e-12);
    EXPECT_LT(gap(pow(jp, 3), oracle_jet(p * p * p, pt, K)), 1e-12);
    for (int v = 0; v < m; ++v) EXPECT_LT(gap(jp.partial(v), oracle_jet(p.diff(v), pt, K - 1)), 1e-12);
  }
}

// Transcendental operations are pinned by differential identities that hold
// exactly at every order, e.g. d(exp P) = exp(P) dP, together with the value.
TEST(Jet, TranscendentalOperationsSatisfyDifferentialIdentities) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    const int m = 1 + trial % 4;
    const int K = 6;
    auto pt = random_point(m, rng, 0.5);
    Poly p = Poly::random(m, 6, rng, 8);
    p.terms[std::vector<int>(static_cast<std::size_t>(m), 0)] += 4.0;  // keep P > 0 near pt
    const double p0 = p(pt);
    ASSERT_GT(p0, 0.0);
    Jet jp = oracle_jet(p, pt, K);

    Jet e = exp(jp), l = log(jp), s = sqrt(jp), r = reciprocal(jp), w = pow(jp, 2.5);
    EXPECT_NEAR(e.value(), std::exp(p0), 1e-12 * std::exp(p0));
    EXPECT_NEAR(l.value(), std::log(p0), 1e-12);
    EXPECT_NEAR(s.value(), std::sqrt(p0), 1e-12);
    EXPECT_LT(gap(s * s, jp), 1e-12);
    EXPECT_LT(gap(r * jp, jp.lift(1.0)), 1e-12);
    for (int v = 0; v < m; ++v) {
      Jet dp = oracle_jet(p.diff(v), pt, K - 1);
      EXPECT_LT(gap(e.partial(v), mul(e, dp, K - 1)), 1e-12);
      EXPECT_LT(gap(mul(jp, l.partial(v), K - 1), dp), 1e-12);
      EXPECT_LT(gap(mul(jp, w.partial(v), K - 1), 2.5 * mul(w, dp, K - 1)), 1e-12);
    }
  }
}

TEST(Jet, AssociativityAndCommutativity) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    Jet a(4, 6), b(4, 6), c(4, 6);
    for (auto* j : {&a, &b, &c})
      for (double& x : j->coeffs()) x = u(rng);
    EXPECT_LT(gap((a + b) + c, a + (b + c)), 1e-13);
    EXPECT_LT(gap(a * b, b * a), 1e-13);
    EXPECT_LT(gap((a * b) * c, a * (b * c)), 1e-13);
  }
}

TEST(Jet, TaylorPredictionConvergesAtOrderKPlusOne) {
  const std::vector<double> p{0.3, -0.2};
  auto f = [](std::span<const Jet> x) { return exp(x[0]) * log(2.0 + x[1]) + sqrt(1.0 + x[0] * x[0] * x[1] * x[1]); };
  for (int K : {2, 4}) {
    Jet j = f(coordinate_jets(p, K));
    double prev = 0.0;
    for (double h : {0.04, 0.02, 0.01}) {
      std::vector<double> q{p[0] + h, p[1] - h};
      const double exact = f(coordinate_jets(q, 0)).value();
      const double err = std::abs(j.evaluate_offset(std::vector<double>{h, -h}) - exact);
      if (prev > 0.0) {
        EXPECT_NEAR(std::log2(prev / err), K + 1, 0.3);
      }
      prev = err;
    }
  }
}

TEST(Expression, ParsesAndEvaluatesOnJets) {
  auto e = Expression::parse("log(1 + x1^2 + x2^2) - pow(x1, 2) / 2 + pospart(1 - x2) * pi", 2);
  std::vector<double> p{0.4, 0.1};
  Jet j = e(coordinate_jets(p, 3));
  auto xs = coordinate_jets(p, 3);
  Jet ref = log(1.0 + xs[0] * xs[0] + xs[1] * xs[1]) - xs[0] * xs[0] / 2.0 + (1.0 - xs[1]) * std::numbers::pi;
  EXPECT_LT(gap(j, ref), 1e-14);
}

TEST(Expression, ReportsColumnOfParseErrors) {
  try {
    (void)Expression::parse("1 + x3", 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::parse);
    EXPECT_NE(std::string(e.what()).find("column 5"), std::string::npos) << e.what();
  }
  EXPECT_THROW((void)Expression::parse("log(x1", 2), Error);
  EXPECT_THROW((void)Expression::parse("x1 $ 2", 2), Error);
}
