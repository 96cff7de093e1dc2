#pragma once

#include "dbar/core.hpp"
#include "dbar/forms.hpp"
#include "dbar/kernel.hpp"
#include "dbar/variety.hpp"

#include <boost/rational.hpp>

#include <cmath>
#include <limits>
#include <optional>

namespace dbar {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class SolverMode { Weighted, Cone };

struct SolverConfig {
  std::optional<int> sigma;          // unset: weighted max(-q, 0), cone sigma_min(d, p, q)
  SolverMode mode = SolverMode::Weighted;
  double p = 2.0;                    // only used to auto-select sigma in cone mode
  AlephMode aleph = AlephMode::Weighted;
  QuadratureSpec quad;
  double u_radius = 0.0;             // > 0 freezes the u-disc (finite-difference stencils)
};

struct SigmaChoice {
  int sigma = 0;
  bool floored = false;  // raised to -q to stay in the admissible range
};

/// Smallest integer sigma >= (2d-2)/p + 1 - q, with p = num/den exact.
inline SigmaChoice sigma_min(int d, boost::rational<long> p, int q) {
  if (q < 1 || q > d) fail(Errc::InvalidArgument, "sigma_min needs 1 <= q <= d");
  if (p < 1) fail(Errc::InvalidArgument, "sigma_min needs p >= 1");
  boost::rational<long> bound = boost::rational<long>(2 * d - 2) / p + (1 - q);
  long c = bound.numerator() / bound.denominator();
  if (boost::rational<long>(c) < bound) ++c;
  SigmaChoice out{static_cast<int>(c), false};
  if (out.sigma < -q) out = {-q, true};
  return out;
}

/// Same with p as a double; p = infinity drops the (2d-2)/p term.
inline SigmaChoice sigma_min(int d, double p, int q) {
  if (q < 1 || q > d) fail(Errc::InvalidArgument, "sigma_min needs 1 <= q <= d");
  if (!(p >= 1.0)) fail(Errc::InvalidArgument, "sigma_min needs p >= 1");
  double bound = (std::isinf(p) ? 0.0 : (2.0 * d - 2.0) / p) + 1.0 - q;
  SigmaChoice out{static_cast<int>(std::ceil(bound - 1e-12)), false};
  if (out.sigma < -q) out = {-q, true};
  return out;
}

/// delta = sigma + q - 1 + (2 - 2d)/p, exact.
inline boost::rational<long> lp_delta(int sigma, int q, int d, std::optional<boost::rational<long>> p) {
  boost::rational<long> v(sigma + q - 1);
  if (p) v += boost::rational<long>(2 - 2 * d) / *p;
  return v;
}

inline double lp_delta(int sigma, int q, int d, double p) {
  return sigma + q - 1 + (std::isinf(p) ? 0.0 : (2.0 - 2.0 * d) / p);
}

/// Radius of the disc {u : |u^beta * z| < R}; solves sum rho^(2 beta_k) |z_k|^2 = R^2.
inline double support_u_radius(const CVec& z, const WeightVector& beta, double R) {
  auto f = [&](double rho) {
    double s = 0.0;
    for (int k = 0; k < beta.n(); ++k) s += std::pow(rho, 2.0 * beta[k]) * std::norm(z(k));
    return s;
  };
  if (z.norm() == 0.0) fail(Errc::InvalidArgument, "support radius undefined at the origin");
  double lo = 0.0, hi = 1.0;
  while (f(hi) < R * R) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    double mid = 0.5 * (lo + hi);
    (f(mid) < R * R ? lo : hi) = mid;
  }
  return hi;
}

struct SolveResult {
  Covector value;
  QuadStats stats;
  int sigma = 0;
  double u_radius = 0.0;
};

inline Covector zero_covector(int n, int degree) {
  Covector out;
  for (const auto& K : all_multi_indices(n, degree)) out[K] = 0.0;
  return out;
}

inline int resolve_sigma(const SolverConfig& cfg, const WeightedVariety& V, int q) {
  if (cfg.sigma) return *cfg.sigma;
  if (cfg.mode == SolverMode::Cone) return sigma_min(V.dim(), cfg.p, q).sigma;
  return std::max(-q, 0);
}

namespace detail {

inline PlaneGeometry solution_geometry(double u_radius, int sigma, int betaJ_min, const QuadratureSpec& spec) {
  PlaneGeometry geo{0.0, u_radius, {{0.0, static_cast<double>(sigma + betaJ_min)}, {1.0, 0.0}}, std::max(1, -sigma)};
  for (cdouble c : spec.singular_centers) geo.centers.push_back({c, 1.0});
  return geo;
}

}  // namespace detail

/// S^sigma_q omega(z) = sum_J aleph_J (1/pi) int f_J(u^beta * z) u^sigma conj(u)^(beta_J - 1) / (u - 1) dA(u).
inline SolveResult solve_weighted(const AntiForm& omega, const WeightedVariety& V, const CVec& z,
                                  const SolverConfig& cfg) {
  const int q = omega.degree();
  const int n = V.n();
  if (q < 1) fail(Errc::InvalidArgument, "solver needs a form of degree q >= 1");
  if (omega.n() != n || z.size() != n) fail(Errc::InvalidArgument, "form, variety and point dimensions differ");
  const auto& beta = V.weights();
  SolveResult res;
  res.sigma = resolve_sigma(cfg, V, q);
  if (res.sigma < -q) fail(Errc::InvalidArgument, "sigma must satisfy sigma >= -q");
  res.value = zero_covector(n, q - 1);
  if (z.norm() == 0.0) return res;

  std::vector<MultiIndex> keys;
  std::vector<const Coefficient*> fs;
  std::vector<int> bJ;
  int bmin = std::numeric_limits<int>::max();
  for (const auto& [J, f] : omega.coefficients()) {
    keys.push_back(J);
    fs.push_back(&f);
    bJ.push_back(beta_sum(J, beta.values()));
    if (res.sigma < -bJ.back()) fail(Errc::NonIntegrableAtZero, "sigma < -beta_J");
    bmin = std::min(bmin, bJ.back());
  }
  if (keys.empty()) return res;

  res.u_radius = cfg.u_radius > 0.0 ? cfg.u_radius : support_u_radius(z, beta, omega.support_radius());
  PlaneGeometry geo = detail::solution_geometry(res.u_radius, res.sigma, bmin, cfg.quad);
  const Eigen::Index m = static_cast<Eigen::Index>(keys.size());
  const int sigma = res.sigma;
  auto r = integrate_plane(geo, cfg.quad, m, [&](cdouble u, CVec& out) {
    CVec w = scale_action(u, z, beta);
    const cdouble base = ipow(u, sigma) / (kPi * (u - 1.0));
    const cdouble ub = std::conj(u);
    for (Eigen::Index i = 0; i < m; ++i)
      out(i) = (*fs[static_cast<std::size_t>(i)])(w) * base * ipow(ub, bJ[static_cast<std::size_t>(i)] - 1);
  });
  res.stats = r.stats;
  for (Eigen::Index i = 0; i < m; ++i)
    for (const auto& [K, a] : aleph_multiplier(keys[static_cast<std::size_t>(i)], z, beta, cfg.aleph))
      res.value[K] += a * r.value(i);
  return res;
}

/// Homogeneous specialisation: f_J(u z) u^sigma conj(u)^q / (conj(u) (u - 1)).
/// The multiplier uses the factor beta_j = 1 unless cfg.aleph asks for the
/// literal factor q.
inline SolveResult solve_cone(const AntiForm& omega, const WeightedVariety& V, const CVec& z,
                              const SolverConfig& cfg) {
  if (!V.is_cone()) fail(Errc::NotACone, "variety '" + V.name() + "' has a weight different from 1");
  const int q = omega.degree();
  const int n = V.n();
  if (q < 1) fail(Errc::InvalidArgument, "solver needs a form of degree q >= 1");
  if (omega.n() != n || z.size() != n) fail(Errc::InvalidArgument, "form, variety and point dimensions differ");
  SolverConfig c = cfg;
  c.mode = SolverMode::Cone;
  SolveResult res;
  res.sigma = resolve_sigma(c, V, q);
  if (res.sigma < -q) fail(Errc::NonIntegrableAtZero, "sigma < -q");
  res.value = zero_covector(n, q - 1);
  if (z.norm() == 0.0 || omega.coefficients().empty()) return res;

  res.u_radius = cfg.u_radius > 0.0 ? cfg.u_radius : omega.support_radius() / z.norm();
  PlaneGeometry geo = detail::solution_geometry(res.u_radius, res.sigma, q, cfg.quad);
  std::vector<std::pair<MultiIndex, const Coefficient*>> items;
  for (const auto& [J, f] : omega.coefficients()) items.emplace_back(J, &f);
  const Eigen::Index m = static_cast<Eigen::Index>(items.size());
  const int sigma = res.sigma;
  auto r = integrate_plane(geo, cfg.quad, m, [&](cdouble u, CVec& out) {
    CVec w = u * z;
    const cdouble ub = std::conj(u);
    const cdouble k = ipow(u, sigma) * ipow(ub, q) / (ub * (u - 1.0) * kPi);
    for (Eigen::Index i = 0; i < m; ++i) out(i) = (*items[static_cast<std::size_t>(i)].second)(w) * k;
  });
  res.stats = r.stats;
  for (Eigen::Index i = 0; i < m; ++i)
    for (const auto& [K, a] : aleph_multiplier(items[static_cast<std::size_t>(i)].first, z, V.weights(), cfg.aleph))
      res.value[K] += a * r.value(i);
  return res;
}

/// Dispatches on cfg.mode.
inline SolveResult solve(const AntiForm& omega, const WeightedVariety& V, const CVec& z, const SolverConfig& cfg) {
  return cfg.mode == SolverMode::Cone ? solve_cone(omega, V, z, cfg) : solve_weighted(omega, V, z, cfg);
}

/// Largest dbar-closedness defect of a form on C^m over the given points.
inline double closedness_defect(const AntiForm& omega, const std::vector<CVec>& points, double h = 1e-3) {
  if (omega.degree() >= omega.n()) return 0.0;
  LocalForm F{omega.n(), omega.degree(), [&](const CVec& w) {
                Covector c = omega(w);
                if (c.empty()) c = zero_covector(omega.n(), omega.degree());
                return c;
              },
              {}};
  double worst = 0.0;
  for (const auto& p : points) worst = std::max(worst, max_abs(dbar_fd(F, p, h)));
  return worst;
}

struct ProductSolveOptions {
  double fiber_radius = 1.0;          // support bound in the first coordinate
  std::vector<cdouble> extra_centers;
  bool audit = true;
  double closed_tol = 1e-6;
};

/// S_q omega = sum_{|K| = q-1, 1 not in K} I[a_{1,K}] d(conj z)_K with I the
/// Cauchy transform in the first coordinate.
inline SolveResult product_solve(const AntiForm& omega, const CVec& z, const QuadratureSpec& quad,
                                 const ProductSolveOptions& opt) {
  const int q = omega.degree();
  const int m = omega.n();
  if (q < 1 || q > m) fail(Errc::InvalidArgument, "product solver needs 1 <= q <= m");
  if (z.size() != m) fail(Errc::InvalidArgument, "point dimension mismatch");
  SolveResult res;
  res.value = zero_covector(m, q - 1);

  if (opt.audit) {
    std::vector<CVec> pts{z};
    for (int j = 0; j < 8; ++j) {
      CVec p = z;
      p(0) = 0.5 * opt.fiber_radius * std::polar(1.0, 2.0 * kPi * j / 8.0 + 0.3);
      pts.push_back(p);
    }
    double scale = 1.0;
    for (const auto& p : pts) scale = std::max(scale, max_abs(omega(p)));
    double defect = closedness_defect(omega, pts);
    if (defect > opt.closed_tol * scale)
      fail(Errc::NotClosed, "closedness defect " + std::to_string(defect) + " exceeds tolerance");
  }

  QuadratureSpec s = quad;
  s.outer_radius = opt.fiber_radius;
  s.outer_center = 0.0;
  s.singular_centers.insert(s.singular_centers.end(), opt.extra_centers.begin(), opt.extra_centers.end());
  for (const auto& [J, f] : omega.coefficients()) {
    if (J.empty() || J[0] != 0) continue;
    MultiIndex K = J.without(0);
    auto fiber = [&, fp = &f](cdouble t) {
      CVec w = z;
      w(0) = t;
      return (*fp)(w);
    };
    ScalarResult r = cauchy_transform(fiber, z(0), s);
    res.value[K] += r.value;
    res.stats.merge(r.stats);
  }
  return res;
}

// ---------------------------------------------------------------------------
// Reduction of weighted homogeneous varieties to cones.

inline CVec phi_map(const CVec& x, const WeightVector& beta) {
  CVec z(x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) z(k) = ipow(x(k), beta[static_cast<int>(k)]);
  return z;
}

/// X = Phi^{-1}(Sigma), cut out by Q_k o Phi with unit weights.
inline WeightedVariety phi_lift_variety(const WeightedVariety& V) {
  std::vector<Polynomial> gens;
  for (const auto& g : V.generators()) gens.push_back(g.poly.compose_powers(V.weights().values()));
  return WeightedVariety("phi-lift of " + V.name(), WeightVector::ones(V.n()), std::move(gens), V.dim_hint());
}

/// Factor prod_{j in J} beta_j conj(x_j)^(beta_j - 1) of Phi^* d(conj z)_J.
inline cdouble phi_factor(const MultiIndex& J, const CVec& x, const WeightVector& beta) {
  cdouble f = 1.0;
  for (int j : J) f *= static_cast<double>(beta[j]) * ipow(std::conj(x(j)), beta[j] - 1);
  return f;
}

inline AntiForm phi_pullback(const AntiForm& omega, const WeightVector& beta) {
  double r2 = 0.0;
  for (int k = 0; k < beta.n(); ++k) r2 += std::pow(omega.support_radius(), 2.0 / beta[k]);
  AntiForm out(omega.n(), omega.degree(), std::sqrt(r2));
  out.id = omega.id.empty() ? std::string() : "phi*" + omega.id;
  for (const auto& [J, f] : omega.coefficients()) {
    out.set(J, Coefficient([f, J, beta](const CVec& x) {
      cdouble v = f(phi_map(x, beta));
      return v == 0.0 ? v : v * phi_factor(J, x, beta);
    }));
  }
  return out;
}

/// Phi^* of a covector given at Phi(x).
inline Covector phi_pullback_covector(const Covector& c, const CVec& x, const WeightVector& beta) {
  Covector out;
  for (const auto& [K, v] : c) out[K] = v * phi_factor(K, x, beta);
  return out;
}

/// The operator on the lifted cone written through Phi:
/// sum_J hat-aleph_J (1/pi) int f_J(Phi(u x)) u^sigma conj(u)^(beta_J - 1) / (u - 1) dA(u),
/// hat-aleph_J = sum_j beta_j conj(x_j^beta_j) sign(j, K) prod_{k in K} beta_k conj(x_k^(beta_k - 1)) d(conj x)_K.
inline SolveResult phi_commuted_solve(const AntiForm& omega, const WeightedVariety& V, const CVec& x,
                                      const SolverConfig& cfg) {
  const int q = omega.degree();
  const int n = V.n();
  const auto& beta = V.weights();
  SolveResult res;
  res.sigma = resolve_sigma(cfg, V, q);
  res.value = zero_covector(n, q - 1);
  if (x.norm() == 0.0 || omega.coefficients().empty()) return res;
  const CVec zx = phi_map(x, beta);
  res.u_radius = cfg.u_radius > 0.0 ? cfg.u_radius : support_u_radius(zx, beta, omega.support_radius());

  std::vector<std::pair<MultiIndex, const Coefficient*>> items;
  int bmin = std::numeric_limits<int>::max();
  for (const auto& [J, f] : omega.coefficients()) {
    items.emplace_back(J, &f);
    bmin = std::min(bmin, beta_sum(J, beta.values()));
  }
  if (res.sigma < -bmin) fail(Errc::NonIntegrableAtZero, "sigma < -beta_J");
  PlaneGeometry geo = detail::solution_geometry(res.u_radius, res.sigma, bmin, cfg.quad);
  const Eigen::Index m = static_cast<Eigen::Index>(items.size());
  const int sigma = res.sigma;
  auto r = integrate_plane(geo, cfg.quad, m, [&](cdouble u, CVec& out) {
    CVec w = phi_map(CVec(u * x), beta);
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto& [J, f] = items[static_cast<std::size_t>(i)];
      const int bJ = beta_sum(J, beta.values());
      out(i) = (*f)(w) * ipow(u, sigma) * ipow(std::conj(u), bJ - 1) / (kPi * (u - 1.0));
    }
  });
  res.stats = r.stats;
  for (Eigen::Index i = 0; i < m; ++i) {
    const MultiIndex& J = items[static_cast<std::size_t>(i)].first;
    for (int j : J) {
      MultiIndex K = J.without(j);
      cdouble hat = static_cast<double>(beta[j]) * ipow(std::conj(x(j)), beta[j]) *
                    static_cast<double>(sign_perm(j, K)) * phi_factor(K, x, beta);
      res.value[K] += hat * r.value(i);
    }
  }
  return res;
}

}  // namespace dbar
