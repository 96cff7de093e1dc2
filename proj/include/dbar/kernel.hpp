#pragma once

#include "dbar/core.hpp"
#include "dbar/quadrature.hpp"

namespace dbar {

struct ScalarResult {
  cdouble value;
  QuadStats stats;
};

namespace detail {

inline void certify_support(const std::function<cdouble(cdouble)>& f, cdouble center, double R) {
  for (int j = 0; j < 64; ++j) {
    for (double grow : {1.0 + 1e-6, 1.1, 1.5}) {
      cdouble t = center + grow * R * std::polar(1.0, 2.0 * kPi * (j + 0.5) / 64.0);
      if (f(t) != 0.0) fail(Errc::SupportOverflow, "integrand is nonzero outside the declared outer radius");
    }
  }
}

}  // namespace detail

/// Solid Cauchy transform (1/2 pi i) int f(t) d(conj t)^dt / (t - z)
/// = (1/pi) int f(t) / (t - z) dA(t), over the disc D(outer_center, outer_radius).
inline ScalarResult cauchy_transform(const std::function<cdouble(cdouble)>& f, cdouble z, const QuadratureSpec& spec) {
  if (!(spec.outer_radius > 0.0)) fail(Errc::InvalidArgument, "cauchy_transform needs an outer radius");
  detail::certify_support(f, spec.outer_center, spec.outer_radius);
  PlaneGeometry geo{spec.outer_center, spec.outer_radius, {{z, 0.0}}, 1};
  for (cdouble c : spec.singular_centers) geo.centers.push_back({c, 1.0});
  auto r = integrate_plane(geo, spec, 1, [&](cdouble t, CVec& out) {
    cdouble d = t - z;
    out(0) = d == 0.0 ? cdouble(0.0) : f(t) / (kPi * d);
  });
  return {r.value(0), r.stats};
}

/// |t|^-delta * int_{|w|<R} h(w) dw^d(conj w) / (w - t), with dw^d(conj w) = -2i dA.
inline ScalarResult weighted_cauchy(const std::function<cdouble(cdouble)>& h, cdouble t, double delta, double R,
                                    const QuadratureSpec& spec) {
  if (!(delta >= 0.0 && delta < 1.0)) fail(Errc::DeltaOutOfRange, "weighted kernel needs 0 <= delta < 1");
  if (!(R > 0.0)) fail(Errc::InvalidArgument, "radius must be positive");
  if (t == 0.0 && delta > 0.0) fail(Errc::InvalidArgument, "weighted kernel is singular at t = 0");
  QuadratureSpec s = spec;
  s.outer_radius = R;
  s.outer_center = 0.0;
  ScalarResult c = cauchy_transform(h, t, s);
  const double w = delta == 0.0 ? 1.0 : std::pow(std::abs(t), -delta);
  return {cdouble(0.0, -2.0) * kPi * w * c.value, c.stats};
}

/// int_{|t|<R} dA(t) / (|t|^delta |w - t|): the finite Young-type bound of
/// the weighted kernel, evaluated at one w.
inline ScalarResult young_bound_integral(cdouble w, double delta, double R, const QuadratureSpec& spec) {
  if (!(delta >= 0.0 && delta < 1.0)) fail(Errc::DeltaOutOfRange, "Young bound needs 0 <= delta < 1");
  // the radial power at t = 0 is r^(1 - delta), or r^(-delta) when w = 0
  const bool centred = std::abs(w) == 0.0;
  PlaneGeometry geo{0.0, R, {{0.0, centred ? -delta : 1.0 - delta}}, 1};
  if (!centred) geo.centers.push_back({w, 0.0});
  auto r = integrate_plane(geo, spec, 1, [&](cdouble t, CVec& out) {
    double a = std::abs(t), b = std::abs(w - t);
    out(0) = (a == 0.0 || b == 0.0) ? 0.0 : std::pow(a, -delta) / b;
  });
  return {r.value(0), r.stats};
}

/// Largest Young bound integral over a polar grid of w in |w| <= 2R.
struct YoungBoundTable {
  double sup = 0.0;
  cdouble argmax = 0.0;
  std::vector<std::pair<cdouble, double>> samples;
};

inline YoungBoundTable tabulate_young_bound(double delta, double R, const QuadratureSpec& spec, int rings = 6,
                                            int spokes = 8) {
  YoungBoundTable tab;
  std::vector<cdouble> ws{0.0};
  for (int i = 1; i <= rings; ++i)
    for (int j = 0; j < spokes; ++j) ws.push_back(std::polar(2.0 * R * i / rings, 2.0 * kPi * j / spokes));
  tab.samples.resize(ws.size());
  parallel_for(ws.size(), [&](std::size_t i) {
    tab.samples[i] = {ws[i], young_bound_integral(ws[i], delta, R, spec).value.real()};
  });
  for (const auto& [w, v] : tab.samples)
    if (v > tab.sup) {
      tab.sup = v;
      tab.argmax = w;
    }
  return tab;
}

/// (1/2 pi i) int g(u) u^sigma conj(u)^betaJ d(conj u)^du / (conj(u) (u - 1))
/// = (1/pi) int g(u) u^sigma conj(u)^(betaJ - 1) / (u - 1) dA(u).
/// The disc is D(0, spec.outer_radius), which must contain the support of g.
inline ScalarResult solution_kernel_integral(const std::function<cdouble(cdouble)>& g, int sigma, int betaJ,
                                             const QuadratureSpec& spec) {
  if (sigma < -betaJ) fail(Errc::NonIntegrableAtZero, "sigma < -beta_J makes the kernel non-integrable at u = 0");
  if (!(spec.outer_radius > 0.0)) fail(Errc::InvalidArgument, "solution kernel needs an outer radius");
  PlaneGeometry geo{0.0, spec.outer_radius, {{0.0, static_cast<double>(sigma + betaJ)}, {1.0, 0.0}},
                    std::max(1, -sigma)};
  for (cdouble c : spec.singular_centers) geo.centers.push_back({c, 1.0});
  auto r = integrate_plane(geo, spec, 1, [&](cdouble u, CVec& out) {
    out(0) = g(u) * ipow(u, sigma) * ipow(std::conj(u), betaJ - 1) / (kPi * (u - 1.0));
  });
  return {r.value(0), r.stats};
}

}  // namespace dbar
