#include <gtest/gtest.h>

#include <random>

#include "optquad/quad_engine.hpp"
#include "oracles.hpp"

using namespace optquad;

namespace {

BigReal thr64() { return BigReal::pow2(-64, 256); }

}  // namespace

TEST(Apply, ConstantIntegratesToOne) {
  const QuadRule r = build_rule(7, 11);
  Integrand one;
  one.id = "one";
  one.f = [](const BigReal& x) { return BigReal(1L, x.precision()); };
  one.f1 = one.f3 = [](const BigReal& x) { return BigReal(0L, x.precision()); };
  EXPECT_LE(abs(apply(r, one) - 1), thr64());
}

TEST(Apply, PolynomialExactness) {
  std::mt19937 rng(11);
  for (int m = 4; m <= 8; ++m) {
    const int N = std::uniform_int_distribution<int>(std::max(1, m - 3), 40)(rng);
    const QuadRule r = build_rule(m, N);
    for (int a = 0; a < m; ++a) {
      const Integrand g = monomial(static_cast<unsigned>(a));
      EXPECT_LE(abs(apply(r, g) - *g.exact_integral), thr64()) << m << " " << N << " " << a;
    }
  }
}

TEST(Apply, IsLinear) {
  const QuadRule r = build_rule(6, 13);
  const Integrand f = corpus_integrand("exp", 6), g = corpus_integrand("sinpi", 6);
  const BigReal a = BigReal::parse("2.5"), b = BigReal::parse("-0.75");
  Integrand combo;
  combo.f = [&](const BigReal& x) { return a * f.f(x) + b * g.f(x); };
  combo.f1 = [&](const BigReal& x) { return a * (*f.f1)(x) + b * (*g.f1)(x); };
  combo.f3 = [&](const BigReal& x) { return a * (*f.f3)(x) + b * (*g.f3)(x); };
  const BigReal lhs = apply(r, combo);
  const BigReal rhs = a * apply(r, f) + b * apply(r, g);
  EXPECT_LT(abs(lhs - rhs).to_double(), 1e-70);
}

TEST(Apply, ExpWithinBoundForM4) {
  const QuadRule r = build_rule(4, 10);
  const Integrand g = corpus_integrand("exp", 4);
  const BigReal err = abs(apply(r, g) - *g.exact_integral);
  const BigReal e = exp(BigReal(1L, 256));
  const BigReal bound = sqrt(pow(BigReal(1L, 256) / 10, 8ul) / 1209600) * sqrt((e * e - 1) / 2);
  EXPECT_LE(err, bound);
  EXPECT_LT(abs(bound - error_bound(r, *g.fm_l2)).to_double(), 1e-60);
}

TEST(Apply, NonFiniteValueNamesTheNode) {
  const QuadRule r = build_rule(4, 4);
  Integrand g;
  g.id = "pole";
  g.f = [](const BigReal& x) { return 1 / (x - BigReal::parse("0.5")); };
  g.f1 = g.f3 = g.f;
  try {
    apply(r, g);
    FAIL() << "expected EvaluationError";
  } catch (const EvaluationError& e) {
    EXPECT_NE(std::string(e.what()).find("node 2"), std::string::npos) << e.what();
  }
}

TEST(Apply, FiniteDifferenceFallbackIsFlagged) {
  const QuadRule r = build_rule(6, 16);
  Integrand g = corpus_integrand("exp", 6);
  const ApplyResult analytic = apply_detailed(r, g);
  EXPECT_FALSE(analytic.fd_fallback);
  EXPECT_TRUE(analytic.fd_truncation.is_zero());
  g.f1.reset();
  g.f3.reset();
  const ApplyResult fd = apply_detailed(r, g);
  EXPECT_TRUE(fd.fd_fallback);
  EXPECT_GT(fd.fd_truncation.sign(), 0);
  const BigReal diff = abs(fd.value - analytic.value);
  EXPECT_LE(diff, 10 * fd.fd_truncation + BigReal::pow2(-200, 256));
  EXPECT_LT(diff.to_double(), 1e-30);
}

TEST(ErrorBound, ClosedFormCases) {
  EXPECT_TRUE(error_bound(build_rule(6, 10), BigReal(0L, 256)).is_zero());
  const BigReal one(1L, 256);
  EXPECT_LT(abs(error_bound(build_rule(4, 1), one) - sqrt(one / 1209600)).to_double(), 1e-60);
  EXPECT_LT(abs(error_bound(build_rule(5, 2), one) - sqrt(one / 47900160) / 32).to_double(), 1e-60);
  EXPECT_THROW(error_bound(build_rule(4, 1), -one), ParameterError);
}

TEST(Corpus, ClosedFormNormsAgreeWithQuadrature) {
  // ||f^(m)||^2 by 40-point Gauss-Legendre on 8 panels.
  const int bits = 256;
  const auto gl = oracle::gauss_legendre(40, bits);
  for (int m : {4, 5, 6}) {
    const BigReal pi = BigReal::pi(bits);
    const std::vector<std::pair<std::string, RealFunction>> fm{
        {"exp", [](const BigReal& x) { return exp(x); }},
        {"sinpi", [&](const BigReal& x) {
           const BigReal pm = pow(pi, static_cast<unsigned long>(m));
           return (m % 2 == 0) ? pm * sin(pi * x) : pm * cos(pi * x);
         }},
        {"inv1px", [&](const BigReal& x) {
           return BigReal(oracle::fact(m), bits) / pow(x + 1, static_cast<unsigned long>(m + 1));
         }},
        {"xm", [&](const BigReal& x) { return BigReal(oracle::fact(m), bits) + 0 * x; }}};
    for (const auto& [id, deriv] : fm) {
      BigReal sq(0L, bits);
      for (int p = 0; p < 8; ++p)
        for (std::size_t i = 0; i < gl.x.size(); ++i) {
          const BigReal t = (BigReal(p, bits) + (gl.x[i] + 1) / 2) / 8;
          const BigReal v = deriv(t);
          sq += gl.w[i] / 16 * v * v;
        }
      const Integrand g = corpus_integrand(id, m, bits);
      EXPECT_LT((abs(sqrt(sq) - *g.fm_l2) / *g.fm_l2).to_double(), 1e-40) << id << " m=" << m;
    }
  }
}

TEST(Corpus, ExactIntegrals) {
  const QuadRule r = build_rule(8, 64);
  for (const auto& id : corpus_ids()) {
    const Integrand g = corpus_integrand(id, 8);
    EXPECT_LT(abs(apply(r, g) - *g.exact_integral).to_double(), 1e-12) << id;
  }
  EXPECT_THROW(corpus_integrand("gauss", 4), ParameterError);
}

TEST(Corpus, ErrorWithinBound) {
  for (int m : {4, 5, 6})
    for (int N : {8, 16, 32, 64}) {
      const QuadRule r = build_rule(m, N);
      for (const auto& id : corpus_ids()) {
        const Integrand g = corpus_integrand(id, m);
        EXPECT_LE(abs(apply(r, g) - *g.exact_integral), error_bound(r, *g.fm_l2))
            << id << " m=" << m << " N=" << N;
      }
    }
}

TEST(Comparators, TrapezoidAndEulerMaclaurin) {
  const Integrand g = corpus_integrand("exp", 4);
  for (int N : {8, 16}) {
    const BigReal h = BigReal(1L, 256) / N;
    const BigReal e = exp(BigReal(1L, 256));
    // Trapezoid on e^x: h (e - 1) / 2 * coth(h / 2)
    const BigReal trap = h * (e - 1) / 2 * (exp(h) + 1) / (exp(h) - 1);
    EXPECT_LT(abs(trapezoid(g, N, 256) - trap).to_double(), 1e-70);
    const BigReal em = trap + h * h / 12 * (1 - e) - pow(h, 4ul) / 720 * (1 - e);
    EXPECT_LT(abs(euler_maclaurin(g, N, 256) - em).to_double(), 1e-70);
  }
}

TEST(Converge, M4MatchesEulerMaclaurinAndBound) {
  const ConvergenceReport rep = converge(4, corpus_integrand("exp", 4), {8, 16, 32, 64});
  ASSERT_EQ(rep.rows.size(), 4u);
  for (const auto& row : rep.rows) {
    ASSERT_TRUE(row.ok) << row.error;
    EXPECT_LE(row.abs_error, row.norm_bound);
    EXPECT_LT((abs(row.abs_error - row.euler_maclaurin_error) / row.abs_error).to_double(), 1e-30);
  }
  EXPECT_FALSE(rep.rows[0].observed_order.is_finite());
  for (std::size_t i = 1; i < rep.rows.size(); ++i) {
    EXPECT_NEAR(rep.rows[i].observed_order.to_double(), 6.0, 0.3);  // e^x error is O(h^6)
    EXPECT_NEAR(rep.rows[i].bound_order.to_double(), 4.0, 0.05);
  }
}

TEST(Converge, BoundOrderEqualsM) {
  Integrand g;
  const int m = 6;
  const BigReal pi = BigReal::pi(256), two_pi = 2 * pi;
  g.id = "cos2pi+x6";
  g.f = [=](const BigReal& x) { return cos(two_pi * x) + pow(x, 6ul); };
  g.f1 = [=](const BigReal& x) { return -two_pi * sin(two_pi * x) + 6 * pow(x, 5ul); };
  g.f3 = [=](const BigReal& x) {
    return two_pi * two_pi * two_pi * sin(two_pi * x) + 120 * pow(x, 3ul);
  };
  g.exact_integral = BigReal(1L, 256) / 7;
  // f^(6) = -(2 pi)^6 cos(2 pi x) + 720
  const BigReal a = pow(two_pi, 6ul);
  g.fm_l2 = sqrt(a * a / 2 + 720 * 720);
  const ConvergenceReport rep = converge(m, g, {16, 32, 64, 128});
  for (std::size_t i = 1; i < rep.rows.size(); ++i) {
    ASSERT_TRUE(rep.rows[i].ok);
    if (rep.rows[i].N >= 32) EXPECT_NEAR(rep.rows[i].bound_order.to_double(), 6.0, 0.05);
    EXPECT_LE(rep.rows[i].abs_error, rep.rows[i].norm_bound);
  }
}

TEST(Converge, OptimalBoundBeatsTrapezoidForM6) {
  const ConvergenceReport rep = converge(6, corpus_integrand("exp", 6), {8, 16, 32, 64});
  for (const auto& row : rep.rows) EXPECT_LT(row.norm_bound, row.trapezoid_error) << row.N;
}

TEST(Converge, FailedRowsAreMarked) {
  const ConvergenceReport rep = converge(8, corpus_integrand("exp", 8), {2, 8, 16});
  ASSERT_EQ(rep.rows.size(), 3u);
  EXPECT_FALSE(rep.rows[0].ok);
  EXPECT_FALSE(rep.rows[0].error.empty());
  EXPECT_TRUE(rep.rows[1].ok);
  EXPECT_FALSE(rep.rows[1].observed_order.is_finite());
  EXPECT_TRUE(rep.rows[2].observed_order.is_finite());
}
