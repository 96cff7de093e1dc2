#include "dbar/corpus.hpp"
#include "dbar/variety.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace dbar;

namespace {

CVec vec(std::initializer_list<cdouble> v) {
  CVec out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (cdouble c : v) out(i++) = c;
  return out;
}

cdouble rnd(std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  return {nd(rng), nd(rng)};
}

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::InvalidArgument;
}

}  // namespace

TEST(WeightVector, Validation) {
  EXPECT_EQ(code_of([] { WeightVector{1}; }), Errc::InvalidArgument);
  EXPECT_EQ(code_of([] { WeightVector{1, 0}; }), Errc::InvalidArgument);
  EXPECT_TRUE((WeightVector{1, 1, 1}).all_ones());
}

TEST(ScaleAction, Examples) {
  WeightVector b{3, 2};
  CVec z = vec({1.0, 1.0});
  EXPECT_EQ(scale_action(2.0, z, b), vec({8.0, 4.0}));
  EXPECT_EQ(scale_action(1.0, z, b), z);
  EXPECT_EQ(scale_action(0.0, z, b), vec({0.0, 0.0}));
}

TEST(ScaleAction, GroupLaw) {
  std::mt19937_64 rng(1);
  WeightVector b{3, 2, 5};
  for (int i = 0; i < 100; ++i) {
    cdouble s = rnd(rng), t = rnd(rng);
    CVec z = vec({rnd(rng), rnd(rng), rnd(rng)});
    CVec a = scale_action(s * t, z, b), c = scale_action(s, scale_action(t, z, b), b);
    EXPECT_LE((a - c).norm(), 1e-12 * (1.0 + a.norm()));
  }
}

TEST(Homogeneity, DegreesAndFailures) {
  EXPECT_EQ(check_weighted_homogeneous(detail::poly(2, {{{2, 0}, 1.0}, {{0, 3}, -1.0}}), WeightVector{3, 2}), 6);
  EXPECT_EQ(check_weighted_homogeneous(detail::poly(3, {{{1, 1, 0}, 1.0}, {{0, 0, 2}, -1.0}}), WeightVector{1, 1, 1}),
            2);
  EXPECT_EQ(code_of([] { check_weighted_homogeneous(detail::poly(2, {{{1, 0}, 1.0}, {{0, 2}, 1.0}}), WeightVector{1, 1}); }),
            Errc::MixedDegree);
  EXPECT_EQ(code_of([] { check_weighted_homogeneous(Polynomial(2, {}), WeightVector{1, 1}); }), Errc::ZeroPolynomial);
}

TEST(Membership, CuspExamples) {
  auto V = cusp_variety();
  EXPECT_TRUE(membership(V, vec({1.0, 1.0}), 1e-10));
  EXPECT_FALSE(membership(V, vec({1.0, 2.0}), 1e-10));
  std::mt19937_64 rng(2);
  for (int i = 0; i < 50; ++i) {
    cdouble t = rnd(rng);
    EXPECT_TRUE(membership(V, vec({ipow(t, 3), ipow(t, 2)}), 1e-10));
  }
}

TEST(Membership, InvariantUnderAction) {
  std::mt19937_64 rng(3);
  for (const auto& entry : corpus()) {
    const auto& V = entry.variety;
    const auto& P = *V.parametrization();
    for (int i = 0; i < 50; ++i) {
      CVec w(P.dim);
      for (int k = 0; k < P.dim; ++k) w(k) = rnd(rng);
      CVec z = P.map(w);
      ASSERT_TRUE(membership(V, z, 1e-10)) << V.name();
      EXPECT_TRUE(membership(V, scale_action(rnd(rng), z, V.weights()), 1e-8)) << V.name();
    }
  }
}

TEST(Regularity, Examples) {
  auto cusp = cusp_variety();
  EXPECT_TRUE(is_regular_point(cusp, vec({1.0, 1.0})));
  EXPECT_FALSE(is_regular_point(cusp, vec({0.0, 0.0})));
  auto cone = cone_variety();
  EXPECT_TRUE(is_regular_point(cone, vec({1.0, 0.0, 0.0})));
  EXPECT_FALSE(is_regular_point(cone, vec({0.0, 0.0, 0.0})));
  auto fgr = fgr_variety();
  EXPECT_FALSE(is_regular_point(fgr, vec({0.0, 0.0, 0.7})));
  EXPECT_TRUE(is_regular_point(fgr, vec({1.0, 1.0, 1.0})));
  WeightedVariety nodim("nodim", WeightVector{1, 1}, {detail::poly(2, {{{0, 1}, 1.0}})});
  EXPECT_EQ(code_of([&] { is_regular_point(nodim, vec({1.0, 0.0})); }), Errc::DimensionUnknown);
}

TEST(Slice, CuspAndConeExamples) {
  auto cusp = cusp_variety();
  auto Y = slice_variety(cusp, vec({1.0, 1.0}));
  EXPECT_EQ(Y.designated, 0);
  ASSERT_EQ(Y.generators.size(), 1u);
  EXPECT_NEAR(std::abs(Y.generators[0](vec({1.0}))), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(Y.generators[0](vec({2.0})) - cdouble(-7.0)), 0.0, 1e-14);

  auto cone = cone_variety();
  auto Yc = slice_variety(cone, vec({1.0, 1.0, 1.0}));
  // y2 = y3^2 on the slice z1 = 1
  EXPECT_NEAR(std::abs(Yc.generators[0](vec({4.0, 2.0}))), 0.0, 1e-15);
  EXPECT_GT(std::abs(Yc.generators[0](vec({4.0, 1.0}))), 1.0);
}

TEST(Slice, RelabelsWhenFirstCoordinateVanishes) {
  auto cone = cone_variety();
  auto Y = slice_variety(cone, vec({0.0, 1.0, 0.0}));
  EXPECT_EQ(Y.designated, 1);
  EXPECT_EQ(code_of([&] { slice_variety(cone, vec({0.0, 0.0, 0.0})); }), Errc::ZeroCoordinate);
}

TEST(Slice, ScalingIdentity) {
  std::mt19937_64 rng(4);
  for (const auto& entry : corpus()) {
    const auto& V = entry.variety;
    const auto& P = *V.parametrization();
    CVec w(P.dim);
    for (int k = 0; k < P.dim; ++k) w(k) = cdouble(0.6 + 0.1 * k, 0.3);
    CVec xi = P.map(w);
    auto Y = slice_variety(V, xi);
    for (int i = 0; i < 100; ++i) {
      CVec y(V.n() - 1);
      for (Eigen::Index k = 0; k < y.size(); ++k) y(k) = rnd(rng);
      cdouble s = rnd(rng);
      CVec eta = slice_spread(Y, V.weights(), s, y);
      for (std::size_t g = 0; g < V.generators().size(); ++g) {
        const int d = V.generators()[g].degree;
        cdouble lhs = V.generators()[g].poly(eta);
        cdouble rhs = ipow(s / Y.value, d) * Y.generators[g](y);
        EXPECT_LE(std::abs(lhs - rhs), 1e-9 * (1.0 + std::pow(std::abs(s), d)) * (1.0 + std::abs(rhs))) << V.name();
      }
    }
  }
}

TEST(Chart, CuspIsTheParametrisation) {
  auto V = cusp_variety();
  Chart C(V, vec({1.0, 1.0}));
  EXPECT_EQ(C.dim(), 1);
  std::mt19937_64 rng(5);
  for (int i = 0; i < 20; ++i) {
    cdouble s = rnd(rng);
    CVec z = C.map(s, CVec(0));
    EXPECT_LE((z - vec({ipow(s, 3), ipow(s, 2)})).norm(), 1e-12 * (1.0 + z.norm()));
  }
}

TEST(Chart, InvariantsOnCorpus) {
  std::mt19937_64 rng(6);
  for (const auto& entry : corpus()) {
    const auto& V = entry.variety;
    const auto& P = *V.parametrization();
    CVec w(P.dim);
    for (int k = 0; k < P.dim; ++k) w(k) = cdouble(0.7 - 0.2 * k, 0.25 + 0.1 * k);
    CVec xi = P.map(w);
    Chart C(V, xi);
    EXPECT_LE((C.map(1.0, C.base_parameter()) - xi).norm(), 1e-12) << V.name();
    for (int i = 0; i < 30; ++i) {
      CVec x = C.base_parameter();
      for (Eigen::Index k = 0; k < x.size(); ++k) x(k) += 0.5 * C.radius() * std::polar(1.0, 2.0 * kPi * i / 30.0);
      cdouble s = rnd(rng);
      CVec z = C.map(s, x);
      EXPECT_TRUE(membership(V, z, 1e-9)) << V.name();
      EXPECT_EQ(numeric_rank(C.jacobian(s, x)), V.dim()) << V.name();
    }
  }
}

TEST(Chart, ConeChartIsAGraph) {
  auto V = cone_variety();
  Chart C(V, vec({1.0, 1.0, 1.0}));
  EXPECT_EQ(C.designated(), 0);
  SlicePoint sp = C.slice_point(C.base_parameter() + CVec::Constant(1, cdouble(0.1, 0.05)));
  EXPECT_NEAR(std::abs(sp.y(1) - sp.y(2) * sp.y(2)), 0.0, 1e-13);
  EXPECT_EQ(sp.y(0), cdouble(1.0));
}

TEST(Chart, RejectsSingularAndZeroBasePoints) {
  auto cusp = cusp_variety();
  EXPECT_EQ(code_of([&] { Chart(cusp, vec({0.0, 0.0})); }), Errc::ZeroCoordinate);
  auto fgr = fgr_variety();
  EXPECT_EQ(code_of([&] { Chart(fgr, vec({0.0, 0.0, 1.0})); }), Errc::SingularSlice);
}

TEST(ChartDensity, LineIsIsometric) {
  auto V = line_variety();
  Chart C(V, vec({1.0, 0.0}));
  for (double r : {0.1, 0.5, 2.0}) EXPECT_NEAR(chart_volume_density(C, cdouble(r, -r), CVec(0)), 1.0, 1e-14);
}

TEST(ChartDensity, CuspClosedForm) {
  auto V = cusp_variety();
  Chart C(V, vec({1.0, 1.0}));
  std::mt19937_64 rng(7);
  for (int i = 0; i < 20; ++i) {
    cdouble s = rnd(rng);
    double a = std::abs(s);
    double expect = 9 * std::pow(a, 4) + 4 * a * a;
    EXPECT_NEAR(chart_volume_density(C, s, CVec(0)), expect, 1e-12 * expect);
  }
}

TEST(ChartDensity, ConeHomogeneousLaw) {
  auto V = cone_variety();
  Chart C(V, vec({1.0, 1.0, 1.0}));
  std::mt19937_64 rng(8);
  for (int i = 0; i < 20; ++i) {
    cdouble s = rnd(rng);
    CVec x = C.base_parameter();
    x(0) += 0.3 * C.radius() * rnd(rng);
    double d1 = chart_volume_density(C, s, x), d2 = chart_volume_density(C, 2.0 * s, x);
    EXPECT_NEAR(d2 / d1, 4.0, 1e-10);
    double theta1 = d1 / std::norm(s);
    double theta2 = chart_volume_density(C, cdouble(0.3, -1.7), x) / std::norm(cdouble(0.3, -1.7));
    EXPECT_NEAR(theta1 / theta2, 1.0, 1e-8);
  }
  EXPECT_EQ(code_of([&] { chart_volume_density(C, 0.0, C.base_parameter()); }), Errc::InvalidArgument);
}

TEST(Parametrization, DegreesAndRadii) {
  EXPECT_EQ(cone_variety().parametrization()->homogeneous_degree(), 2);
  EXPECT_EQ(cusp_variety().parametrization()->homogeneous_degree(), -1);
  const auto fgr = fgr_variety();
  const auto& P = *fgr.parametrization();
  EXPECT_NEAR(P.parameter_radius(1, 4.0), 4.0, 1e-15);
  EXPECT_NEAR(P.parameter_radius(0, 4.0), 2.0, 1e-15);
  Parametrization Q;
  Q.dim = 1;
  Q.components = {detail::poly(1, {{{1}, 1.0}, {{2}, 1.0}}), Polynomial(1, {})};
  EXPECT_EQ(code_of([&] { Q.parameter_radius(0, 1.0); }), Errc::AtlasIncomplete);
}
