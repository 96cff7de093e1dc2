#pragma once

#include "dbar/corpus.hpp"
#include "dbar/lp.hpp"
#include "dbar/measure.hpp"
#include "dbar/solver.hpp"
#include "dbar/verify.hpp"

#include <cstdio>
#include <random>

namespace dbar {

// ---------------------------------------------------------------------------
// Test families

namespace detail {

inline std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf[0] == '-' ? "(" + std::string(buf) + ")" : std::string(buf);
}

inline std::string complex_num(cdouble c) { return "(" + num(c.real()) + " + " + num(c.imag()) + "*i)"; }

/// Scale-free cutoff: 1 on |z - c| < 0.3 r, 0 beyond r.
inline std::string ball_cutoff(const CVec& c, double r) {
  std::string dist;
  for (Eigen::Index k = 0; k < c.size(); ++k) {
    if (k) dist += " + ";
    const std::string z = "z" + std::to_string(k + 1);
    dist += c(k) == 0.0 ? "abs2(" + z + ")" : "abs2(" + z + " - " + complex_num(c(k)) + ")";
  }
  return "cutoff(0.3, 1, (" + dist + ") / " + num(r * r) + ")";
}

/// A ball-filling cutoff around c times an affine factor with unit
/// coefficients of random phase.
inline std::string random_bump(const CVec& c, double R, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi), radius(0.8, 0.9);
  const double outer = std::min(radius(rng) * R, R - c.norm());
  std::uniform_int_distribution<int> pick(1, static_cast<int>(c.size()));
  const std::string factor = "(1 + " + complex_num(std::polar(1.0, phase(rng))) + " * z" + std::to_string(pick(rng)) +
                             " + " + complex_num(std::polar(1.0, phase(rng))) + " * zb" + std::to_string(pick(rng)) + ")";
  return ball_cutoff(c, outer) + " * " + factor;
}

}  // namespace detail

/// Exact forms dbar(g) with g a cutoff around a point of Sigma near the
/// origin times an affine factor, deterministic in the seed.
inline std::vector<TestForm> random_exact_forms(const WeightedVariety& V, double R, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto centres = sample_points(V, count, seed, 0.01 * R, 0.1 * R);
  std::vector<TestForm> out;
  for (int k = 0; k < count; ++k)
    out.push_back(exact_form("random-" + std::to_string(k), V.n(), R,
                             detail::random_bump(centres[static_cast<std::size_t>(k)], R, rng)));
  return out;
}

/// Scalar densities on the disc |t| < R, deterministic in the seed.
inline std::vector<std::string> random_densities(double R, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::vector<std::string> out;
  for (int k = 0; k < count; ++k) {
    const CVec c = CVec::Constant(1, cdouble(U(rng), U(rng)) * (0.1 * R / std::sqrt(2.0)));
    out.push_back(detail::random_bump(c, R, rng));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Lp bound probes

struct ProbeRow {
  std::string id;
  double solution = 0.0;
  double form = 0.0;
  double ratio() const { return solution / form; }
};

struct LpProbe {
  std::string label;
  double p = 2.0;
  int sigma = 0;
  double delta = 0.0;
  std::vector<ProbeRow> rows;

  /// Largest ratio over the first count rows (all rows when count is 0).
  double constant(std::size_t count = 0) const {
    if (count == 0 || count > rows.size()) count = rows.size();
    double c = 0.0;
    for (std::size_t i = 0; i < count; ++i) c = std::max(c, rows[i].ratio());
    return c;
  }
  bool finite() const {
    for (const auto& r : rows)
      if (!std::isfinite(r.ratio()) || r.form <= 0.0) return false;
    return true;
  }
  /// Relative increase of the constant when the family grows from half to all rows.
  double doubling_change() const {
    const double half = constant(rows.size() / 2);
    return (constant() - half) / half;
  }
  /// Last ratio over the first.
  double growth() const { return rows.back().ratio() / rows.front().ratio(); }
};

struct ProbeResolution {
  MeasureResolution link{2, 6, 8};
  int panels = 4;
  int order = 8;
  int angles = 32;
  int grading = 4;

  ProbeResolution refined() const { return {link.refined(), 2 * panels, order, 2 * angles, grading + 1}; }
  PolarGrid grid(double R) const { return make_polar_grid(R, panels, order, angles, grading); }
};

/// ||S omega||_p / ||omega||_p on Sigma cap B_R for every family member, one
/// probe per (p, sigma) pair.
inline std::vector<LpProbe> lp_bound_probes(const WeightedVariety& V, const std::vector<AntiForm>& family,
                                            const std::vector<NormSpec>& specs, double R,
                                            const ProbeResolution& res = {}) {
  if (!V.is_cone()) fail(Errc::NotACone, "lp_bound_probe needs a cone");
  if (family.empty()) fail(Errc::InvalidArgument, "empty family");
  const int q = family.front().degree();
  std::vector<LpProbe> out(specs.size());
  for (std::size_t k = 0; k < specs.size(); ++k) {
    out[k].label = V.name();
    out[k].p = specs[k].p;
    out[k].sigma = specs[k].sigma;
    out[k].delta = lp_delta(specs[k].sigma, q, V.dim(), specs[k].p);
  }
  const PolarGrid g = res.grid(R);
  for (const auto& omega : family) {
    const auto N = cone_lp_norms(omega, V, specs, R, res.link, g);
    for (std::size_t k = 0; k < specs.size(); ++k) out[k].rows.push_back({omega.id, N[k].solution, N[k].form});
  }
  return out;
}

inline LpProbe lp_bound_probe(const WeightedVariety& V, const std::vector<AntiForm>& family, double p, int sigma,
                              double R, const ProbeResolution& res = {}) {
  return lp_bound_probes(V, family, {{p, sigma}}, R, res).front();
}

/// ||T h||_p / ||h||_p on the disc for T h = -2 pi i |t|^-delta C h.
inline LpProbe weighted_cauchy_probe(const std::vector<std::string>& family, double delta, double p, double R,
                                     const ProbeResolution& res = {}) {
  LpProbe out;
  out.label = "weighted-cauchy";
  out.p = p;
  out.delta = delta;
  const PolarGrid g = res.grid(R);
  for (const auto& text : family) {
    auto e = std::make_shared<CoeffExpr>(text, 1);
    ConeNorms N = weighted_cauchy_norms([e](cdouble t) { return (*e)(CVec::Constant(1, t)); }, delta, p, g);
    out.rows.push_back({text, N.solution, N.form});
  }
  return out;
}

/// sigma one below sigma_min on the line at p = 1, for dbar of bumps that
/// shrink toward the origin. The ratio grows like the inverse support radius.
inline LpProbe sigma_too_small_probe(const std::vector<double>& radii, double R = 1.0, double p = 1.0,
                                     const ProbeResolution& res = {}) {
  const WeightedVariety V = line_variety();
  std::vector<AntiForm> family;
  for (double rho : radii) {
    if (!(rho > 0.0 && rho <= R)) fail(Errc::InvalidArgument, "support radii must lie in (0, R]");
    family.push_back(exact_form("shrink-" + detail::num(rho), 2, R, detail::ball_cutoff(CVec::Zero(2), rho)).form);
  }
  const int sigma = sigma_min(V.dim(), p, 1).sigma - 1;
  LpProbe out = lp_bound_probe(V, family, p, sigma, R, res);
  out.label = "sigma-too-small";
  return out;
}

// ---------------------------------------------------------------------------
// Nested integrals

struct NestedCheck {
  double direct = 0.0;
  double split = 0.0;
  double rel_err() const {
    const double s = std::max(std::abs(direct), std::abs(split));
    return s == 0.0 ? 0.0 : std::abs(direct - split) / s;
  }
};

/// Direct chart integral against the projective/radial split on a cone.
inline NestedCheck nested_integral_check(const WeightedVariety& V, const std::function<double(const CVec&)>& Phi,
                                         double R, const MeasureResolution& res = {}) {
  return {direct_integral(V, Phi, R, res), radial_first_integral(V, Phi, R, res)};
}

}  // namespace dbar
