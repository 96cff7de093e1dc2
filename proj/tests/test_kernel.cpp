#include "dbar/expr.hpp"
#include "dbar/forms.hpp"
#include "dbar/kernel.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace dbar;

namespace {

QuadratureSpec disc_spec(double R) {
  QuadratureSpec s;
  s.outer_radius = R;
  return s;
}

std::function<cdouble(cdouble)> scalar(const std::string& text) {
  auto e = std::make_shared<CoeffExpr>(text, 1);
  return [e](cdouble t) { return (*e)(CVec::Constant(1, t)); };
}

cdouble indicator(cdouble t) { return std::abs(t) < 1.0 ? 1.0 : 0.0; }

}  // namespace

TEST(Quadrature, GaussLegendreIsExact) {
  const auto& g = detail::gauss_legendre(8);
  for (int k = 0; k < 16; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < g.x.size(); ++i) s += g.w[i] * std::pow(g.x[i], k);
    EXPECT_NEAR(s, 1.0 / (k + 1), 1e-14) << k;
  }
}

TEST(Quadrature, DiscAreaAndMoments) {
  PlaneGeometry geo{cdouble(0.2, -0.1), 1.5, {{cdouble(0.5, 0.3), 0.0}, {0.0, 1.0}}, 1};
  QuadratureSpec spec;
  auto r = integrate_plane(geo, spec, 2, [&](cdouble u, CVec& out) {
    out(0) = 1.0;
    out(1) = std::norm(u - geo.center);
  });
  EXPECT_NEAR(r.value(0).real(), kPi * 2.25, 1e-12);
  EXPECT_NEAR(r.value(1).real(), kPi * std::pow(1.5, 4) / 2.0, 1e-11);
}

TEST(Quadrature, ReportsNonConvergence) {
  PlaneGeometry geo{0.0, 1.0, {}, 1};
  QuadratureSpec spec;
  spec.max_depth = 1;
  spec.target_rel_err = 1e-14;
  try {
    integrate_plane(geo, spec, 1, [](cdouble u, CVec& out) { out(0) = std::cos(200.0 * u.real()) + 2.0; });
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::QuadratureNonConvergent);
  }
}

TEST(CauchyTransform, IndicatorOfUnitDisc) {
  auto spec = disc_spec(1.0);
  for (cdouble z : {cdouble(0.0), cdouble(0.3, 0.2), cdouble(-0.7, 0.5), cdouble(0.1, -0.95)}) {
    cdouble v = cauchy_transform(indicator, z, spec).value;
    EXPECT_NEAR(std::abs(v + std::conj(z)), 0.0, 1e-10) << z;
  }
  for (cdouble z : {cdouble(1.5, 0.0), cdouble(-1.2, 2.0)}) {
    cdouble v = cauchy_transform(indicator, z, spec).value;
    EXPECT_NEAR(std::abs(v + 1.0 / z), 0.0, 1e-10) << z;
  }
}

// Brute-force polar midpoint sum with 1000 x 1000 cells on the unit disc.
// The interior evaluation point sits at a cell centre and that cell is
// skipped; its principal-value contribution vanishes by symmetry.
TEST(CauchyTransform, MatchesMillionNodeRiemannSum) {
  auto spec = disc_spec(1.0);
  const int N = 1000;
  const double dr = 1.0 / N, dth = 2.0 * kPi / N;
  const cdouble inside = std::polar(360.5 * dr, 100.5 * dth);
  for (cdouble z : {inside, cdouble(1.4, -0.3)}) {
    cdouble acc = 0.0;
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) {
        if (z == inside && i == 360 && j == 100) continue;
        const double r = (i + 0.5) * dr;
        cdouble t = std::polar(r, (j + 0.5) * dth);
        acc += indicator(t) * r / (t - z);
      }
    acc *= dr * dth / kPi;
    cdouble v = cauchy_transform(indicator, z, spec).value;
    EXPECT_LT(std::abs(v - acc), 1e-4 * std::abs(v)) << z;
  }
}

// dbar of the transform returns the density up to one global sign.
TEST(CauchyTransform, PompeiuSignIsGlobal) {
  QuadratureSpec spec = disc_spec(1.0);
  spec.fixed_level = 2;
  const std::vector<std::string> fs{"bump(0.1, 0.9)", "bump(0.2, 0.8) * (z1 + 2*zb1^2)",
                                    "cutoff(0.2, 0.9, abs2(z1 - 0.05)) * exp(i*re(z1))"};
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (const auto& text : fs) {
    auto f = scalar(text);
    LocalForm F{1, 0, [&](const CVec& w) { return Covector{{MultiIndex{}, cauchy_transform(f, w(0), spec).value}}; }, {}};
    double worst = 0.0;
    int count = 0;
    while (count < 50) {
      cdouble z(U(rng), U(rng));
      if (std::abs(z) > 0.9) continue;
      ++count;
      cdouble d = dbar_fd(F, CVec::Constant(1, z), 2.5e-3).at(MultiIndex{0});
      worst = std::max(worst, std::abs(d - static_cast<double>(kOrientationSign) * f(z)));
    }
    EXPECT_LE(worst, 1e-6) << text;
  }
}

TEST(CauchyTransform, RejectsLeakingIntegrand) {
  auto spec = disc_spec(0.5);
  try {
    cauchy_transform(indicator, 0.1, spec);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::SupportOverflow);
  }
}

TEST(WeightedCauchy, DeltaRangeAndNormalisation) {
  QuadratureSpec spec;
  for (double bad : {-0.1, 1.0, 1.5}) {
    try {
      weighted_cauchy(indicator, 0.3, bad, 1.0, spec);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::DeltaOutOfRange);
    }
  }
  const cdouble t(0.3, 0.2);
  cdouble v0 = weighted_cauchy(indicator, t, 0.0, 1.0, spec).value;
  EXPECT_NEAR(std::abs(v0 - cdouble(0.0, -2.0) * kPi * (-std::conj(t))), 0.0, 1e-9);
  cdouble v5 = weighted_cauchy(indicator, t, 0.5, 1.0, spec).value;
  EXPECT_NEAR(std::abs(v5 - v0 / std::sqrt(std::abs(t))), 0.0, 1e-9);
}

TEST(YoungBound, ExactAtOriginAndFiniteEverywhere) {
  QuadratureSpec spec;
  for (double delta : {0.0, 0.5, 0.9}) {
    const double R = 1.3;
    double at0 = young_bound_integral(0.0, delta, R, spec).value.real();
    EXPECT_NEAR(at0, 2.0 * kPi * std::pow(R, 1.0 - delta) / (1.0 - delta), 1e-6 * at0) << delta;
    auto tab = tabulate_young_bound(delta, R, spec, 3, 4);
    EXPECT_TRUE(std::isfinite(tab.sup));
    EXPECT_GE(tab.sup, at0 * (1.0 - 1e-9));
  }
}

// (1/pi) int_{|u| < rho} u^sigma conj(u)^(b-1) / (u - 1) dA in closed form.
TEST(SolutionKernel, IndicatorClosedForms) {
  struct Case {
    int sigma, beta;
    double rho, expect;
  };
  const std::vector<Case> cases{{0, 1, 0.5, -0.25},       {-1, 1, 0.5, -0.25}, {2, 1, 2.0, 3.0},
                                {1, 3, 2.0, -1.0 / 3.0}, {-2, 2, 0.5, -0.03125}, {1, 2, 0.5, -0.03125}};
  for (const auto& c : cases) {
    QuadratureSpec spec = disc_spec(c.rho);
    auto g = [&](cdouble u) { return std::abs(u) < c.rho ? cdouble(1.0) : cdouble(0.0); };
    cdouble v = solution_kernel_integral(g, c.sigma, c.beta, spec).value;
    EXPECT_NEAR(std::abs(v - c.expect), 0.0, 1e-9) << c.sigma << " " << c.beta << " " << c.rho;
  }
}

TEST(SolutionKernel, RejectsNonIntegrableExponent) {
  try {
    solution_kernel_integral(indicator, -3, 2, disc_spec(1.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NonIntegrableAtZero);
  }
}
