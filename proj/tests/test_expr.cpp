#include "dbar/expr.hpp"

#include <gtest/gtest.h>

using namespace dbar;

namespace {

CVec pt(cdouble a, cdouble b) {
  CVec z(2);
  z << a, b;
  return z;
}

cdouble fd_dbar(const CoeffExpr& e, CVec z, int k, double h = 1e-4) {
  auto f = [&](cdouble d) {
    CVec w = z;
    w(k) += d;
    return e(w);
  };
  cdouble dx = (f(h) - f(-h)) / (2 * h);
  cdouble dy = (f(cdouble(0, h)) - f(cdouble(0, -h))) / (2 * h);
  return 0.5 * (dx + kI * dy);
}

}  // namespace

TEST(Expr, Arithmetic) {
  CVec z = pt({1.0, 2.0}, {0.5, -1.0});
  EXPECT_EQ(CoeffExpr("1 + 2*3 - 4/2", 2)(z), cdouble(5.0));
  EXPECT_EQ(CoeffExpr("-2^2", 2)(z), cdouble(-4.0));
  EXPECT_EQ(CoeffExpr("2^-1", 2)(z), cdouble(0.5));
  EXPECT_EQ(CoeffExpr("z1", 2)(z), z(0));
  EXPECT_EQ(CoeffExpr("zb2", 2)(z), std::conj(z(1)));
  EXPECT_EQ(CoeffExpr("conj(z2)", 2)(z), std::conj(z(1)));
  EXPECT_NEAR(std::abs(CoeffExpr("z1^3", 2)(z) - z(0) * z(0) * z(0)), 0.0, 1e-13);
  EXPECT_NEAR(CoeffExpr("norm2", 2)(z).real(), std::norm(z(0)) + std::norm(z(1)), 1e-14);
  EXPECT_NEAR(std::abs(CoeffExpr("abs2(z1)", 2)(z) - std::norm(z(0))), 0.0, 1e-14);
  EXPECT_EQ(CoeffExpr("re(z1) + i*im(z1)", 2)(z), z(0));
  EXPECT_NEAR(std::abs(CoeffExpr("exp(i*pi)", 2)(z) + 1.0), 0.0, 1e-15);
  EXPECT_EQ(CoeffExpr("1.5e-1", 2)(z), cdouble(0.15));
}

TEST(Expr, BumpShape) {
  CoeffExpr b("bump(0.5, 1)", 2);
  EXPECT_EQ(b(pt(0.3, 0.0)), cdouble(1.0));
  EXPECT_EQ(b(pt(0.7, 0.8)), cdouble(0.0));
  double mid = b(pt(0.75, 0.0)).real();
  EXPECT_GT(mid, 0.0);
  EXPECT_LT(mid, 1.0);
  double prev = 1.0;
  for (double r = 0.5; r <= 1.0; r += 0.01) {
    double v = b(pt(r, 0.0)).real();
    EXPECT_LE(v, prev + 1e-15);
    prev = v;
  }
}

TEST(Expr, ParseErrors) {
  for (const char* bad : {"z3", "z0", "1 +", "foo(1)", "bump(1, 0.5)", "(1", "z1^0.5", "dbar(3, z1)",
                          "dbar(1, dbar(1, dbar(1, z1)))"}) {
    try {
      CoeffExpr(bad, 2);
      ADD_FAILURE() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::ParseError) << bad;
    }
  }
}

TEST(Expr, WirtingerDerivatives) {
  CVec z = pt({0.3, -0.2}, {0.1, 0.4});
  EXPECT_NEAR(std::abs(CoeffExpr("dbar(1, zb1)", 2)(z) - 1.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(CoeffExpr("dbar(1, z1^3)", 2)(z)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(CoeffExpr("dbar(1, abs2(z1))", 2)(z) - z(0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(CoeffExpr("dz(2, z2^2*zb1)", 2)(z) - 2.0 * z(1) * std::conj(z(0))), 0.0, 1e-15);
  for (const char* g : {"bump(0.2, 0.9) * zb2 * exp(z1)", "cutoff(0.1, 0.8, abs2(z1 - 0.2)) * re(z2)",
                        "conj(z1*z2) / (2 + abs2(z1))"}) {
    CoeffExpr e(g, 2);
    for (int k = 0; k < 2; ++k) {
      cdouble exact = CoeffExpr(std::string("dbar(") + char('1' + k) + ", " + g + ")", 2)(z);
      EXPECT_NEAR(std::abs(exact - fd_dbar(e, z, k)), 0.0, 1e-7) << g;
      EXPECT_NEAR(std::abs(exact - e.dbar(k, z)), 0.0, 1e-14) << g;
    }
  }
}

TEST(Expr, NestedDerivativesCommute) {
  CVec z = pt({0.3, -0.2}, {0.1, 0.4});
  const std::string g = "bump(0.1, 0.9) * (z1 + zb2^2) * exp(i*re(z2))";
  cdouble a = CoeffExpr("dbar(1, dbar(2, " + g + "))", 2)(z);
  cdouble b = CoeffExpr("dbar(2, dbar(1, " + g + "))", 2)(z);
  EXPECT_NEAR(std::abs(a - b), 0.0, 1e-13);
  CoeffExpr inner("dbar(2, " + g + ")", 2);
  EXPECT_NEAR(std::abs(a - fd_dbar(inner, z, 0)), 0.0, 1e-7);
  // d/dz d/d(conj z) of |z|^4 = 4 |z|^2
  cdouble lap = CoeffExpr("dz(1, dbar(1, abs2(z1)^2))", 2)(z);
  EXPECT_NEAR(std::abs(lap - 4.0 * std::norm(z(0))), 0.0, 1e-13);
}

TEST(Expr, DeterministicAndCopyable) {
  CoeffExpr e("bump(0.2, 0.9)*zb1*z2", 2);
  CoeffExpr f = e;
  CVec z = pt({0.2, 0.1}, {-0.3, 0.2});
  EXPECT_EQ(e(z), f(z));
  EXPECT_EQ(e(z), e(z));
}
