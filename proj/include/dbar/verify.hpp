#pragma once

#include "dbar/core.hpp"
#include "dbar/forms.hpp"
#include "dbar/kernel.hpp"
#include "dbar/measure.hpp"
#include "dbar/solver.hpp"
#include "dbar/variety.hpp"

#include <chrono>
#include <random>

namespace dbar {

// ---------------------------------------------------------------------------
// Sample points

/// Regular points of Sigma with rmin <= |z| <= rmax drawn through the
/// parametrization, deterministic in the seed.
inline std::vector<CVec> sample_points(const WeightedVariety& V, int count, std::uint64_t seed, double rmin,
                                       double rmax) {
  if (!V.parametrization()) fail(Errc::AtlasIncomplete, "variety '" + V.name() + "' has no parametrization");
  const auto& P = *V.parametrization();
  std::vector<double> box;
  for (int i = 0; i < P.dim; ++i) box.push_back(P.parameter_radius(i, rmax));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::vector<CVec> out;
  for (int attempt = 0; static_cast<int>(out.size()) < count; ++attempt) {
    if (attempt > 10000 * std::max(1, count)) fail(Errc::SamplerError, "could not sample enough regular points");
    CVec w(P.dim);
    for (int i = 0; i < P.dim; ++i) w(i) = cdouble(U(rng), U(rng)) * box[static_cast<std::size_t>(i)];
    CVec z = P.map(w);
    const double r = z.norm();
    if (r < rmin || r > rmax) continue;
    if (!is_regular_point(V, z)) continue;
    out.push_back(z);
  }
  return out;
}

struct GridPoint {
  cdouble param;
  CVec z;
};

/// Polar grid in the parameter a of the curve a -> P(a u), u = (1, ..., 1)/sqrt(m),
/// with rings spaced evenly in |P| between rmin and rmax along every ray.
/// Singular points are dropped.
inline std::vector<GridPoint> grid_points(const WeightedVariety& V, int rings, int angles, double rmin, double rmax) {
  if (!V.parametrization()) fail(Errc::AtlasIncomplete, "variety '" + V.name() + "' has no parametrization");
  if (rings < 1 || angles < 1 || !(rmin > 0.0 && rmax > rmin)) fail(Errc::InvalidArgument, "invalid grid");
  const auto& P = *V.parametrization();
  const CVec u = CVec::Constant(P.dim, 1.0 / std::sqrt(static_cast<double>(P.dim)));
  double top = 1.0;
  for (int i = 0; i < P.dim; ++i) top = std::max(top, 2.0 * P.parameter_radius(i, rmax) * std::sqrt(double(P.dim)));
  std::vector<GridPoint> out;
  for (int j = 0; j < angles; ++j) {
    const cdouble dir = std::polar(1.0, 2.0 * kPi * j / angles);
    auto at = [&](double a) { return P.map(CVec(u * (a * dir))).norm(); };
    for (int i = 0; i < rings; ++i) {
      const double target = rings == 1 ? rmax : rmin + (rmax - rmin) * i / (rings - 1);
      double lo = 0.0, hi = top;
      if (at(hi) < target) continue;
      for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        (at(mid) < target ? lo : hi) = mid;
      }
      const cdouble a = 0.5 * (lo + hi) * dir;
      CVec z = P.map(CVec(u * a));
      if (is_regular_point(V, z)) out.push_back({a, z});
    }
  }
  return out;
}

/// A point x of the lifted cone with Phi(x) = z, on principal roots.
inline CVec phi_root(const CVec& z, const WeightVector& beta) {
  CVec x(z.size());
  for (Eigen::Index k = 0; k < z.size(); ++k) {
    const int b = beta[static_cast<int>(k)];
    x(k) = b == 1 ? z(k) : std::pow(z(k), 1.0 / b);
  }
  return x;
}

// ---------------------------------------------------------------------------
// Residual of the solution property

struct ResidualRow {
  CVec z;
  double residual = 0.0;       // chart-induced norm of dbar(S omega) - eps * omega
  double form_norm = 0.0;      // |omega|_Sigma at z
  double closed_defect = 0.0;  // ambient dbar-closedness defect of omega at z
  bool closed = true;
  QuadStats stats;
  std::string error;           // non-empty if the point failed
};

struct ResidualTable {
  std::vector<ResidualRow> rows;
  double max = 0.0;
  double mean = 0.0;
  double quad_tol = 0.0;
  double h = 0.0;
  int fd_order = 0;
  bool all_closed = true;
  int failures = 0;
};

namespace detail {

inline double u_radius_for(const SolverConfig& cfg, const WeightedVariety& V, const CVec& z, double R) {
  return cfg.mode == SolverMode::Cone ? R / z.norm() : support_u_radius(z, V.weights(), R);
}

/// S omega pulled back to chart coordinates (s, x), as a local form on C^d.
inline LocalForm pulled_back_solution(const AntiForm& omega, const WeightedVariety& V, const Chart& C,
                                      const SolverConfig& cfg) {
  const int d = C.dim();
  const int q = omega.degree();
  return LocalForm{d, q - 1,
                   [&omega, &V, &C, cfg, d, q](const CVec& w) {
                     CVec x = w.tail(d - 1);
                     SlicePoint sp = C.slice_point(x);
                     CVec Z = C.map(w(0), sp);
                     Covector S = solve(omega, V, Z, cfg).value;
                     Covector out = pullback_covector(S, C.jacobian(w(0), sp));
                     if (out.empty()) out = zero_covector(d, q - 1);
                     return out;
                   },
                   [&C](const CVec& w) { return w(0) != 0.0 && C.in_domain(CVec(w.tail(w.size() - 1))); }};
}

inline std::vector<CVec> fd_stencil(const CVec& w0, double h, int order) {
  std::vector<CVec> pts;
  const int reach = order / 2;
  for (Eigen::Index i = 0; i < w0.size(); ++i)
    for (int k = -reach; k <= reach; ++k)
      for (cdouble dir : {cdouble(1.0, 0.0), cdouble(0.0, 1.0)}) {
        if (k == 0) continue;
        CVec p = w0;
        p(i) += static_cast<double>(k) * h * dir;
        pts.push_back(p);
      }
  return pts;
}

}  // namespace detail

/// For each point: build a chart centred there, solve once adaptively to fix
/// the refinement level, freeze the rule on a u-disc covering the whole
/// stencil, and compare the finite-difference dbar of the pulled-back
/// solution with eps times the pulled-back form.
inline ResidualTable residual_check(const WeightedVariety& V, const AntiForm& omega, const SolverConfig& cfg,
                                    const std::vector<CVec>& points, double h = 1e-2, int fd_order = 6,
                                    double closed_tol = 1e-6) {
  ResidualTable tab;
  tab.quad_tol = cfg.quad.target_rel_err;
  tab.h = h;
  tab.fd_order = fd_order;
  tab.rows.resize(points.size());
  const double R = omega.support_radius();
  parallel_for(points.size(), [&](std::size_t i) {
    ResidualRow& row = tab.rows[i];
    row.z = points[i];
    try {
      const CVec& z = points[i];
      if (z.norm() == 0.0) fail(Errc::InvalidArgument, "residual points must avoid the origin");
      Chart C(V, z);
      const int d = C.dim();
      CVec w0(d);
      w0(0) = 1.0;
      w0.tail(d - 1) = C.base_parameter();

      Covector om = omega(z);
      if (omega.degree() < omega.n()) {
        row.closed_defect = closedness_defect(omega, {z}) / std::max(1.0, max_abs(om));
        row.closed = row.closed_defect <= closed_tol;
      }

      SolveResult base = solve(omega, V, z, cfg);
      SolverConfig frozen = cfg;
      frozen.quad.fixed_level = base.stats.level;
      double ur = 0.0;
      for (const auto& p : detail::fd_stencil(w0, h, fd_order)) {
        CVec x = p.tail(d - 1);
        if (!C.in_domain(x)) fail(Errc::StencilOutOfDomain, "stencil leaves the chart domain");
        ur = std::max(ur, detail::u_radius_for(cfg, V, C.map(p(0), x), R));
      }
      frozen.u_radius = ur;
      LocalForm F = detail::pulled_back_solution(omega, V, C, frozen);
      Covector lhs = dbar_fd(F, w0, h, fd_order);
      Covector rhs = pullback(omega, C, 1.0, C.base_parameter());
      CMat J = C.jacobian(1.0, C.base_parameter());
      Covector diff = difference(lhs, scaled(rhs, static_cast<double>(kOrientationSign)));
      row.residual = induced_norm(diff, J);
      row.form_norm = induced_norm(rhs, J);
      row.stats = base.stats;
    } catch (const Error& e) {
      row.error = std::string(errc_name(e.code())) + ": " + e.what();
    }
  });
  double sum = 0.0;
  int ok = 0;
  for (const auto& row : tab.rows) {
    if (!row.error.empty()) {
      ++tab.failures;
      continue;
    }
    tab.all_closed = tab.all_closed && row.closed;
    tab.max = std::max(tab.max, row.residual);
    sum += row.residual;
    ++ok;
  }
  tab.mean = ok ? sum / ok : 0.0;
  return tab;
}

// ---------------------------------------------------------------------------
// Identity checks

struct DeviationRow {
  CVec point;
  double abs_dev = 0.0;
  double rel_dev = 0.0;
  std::string error;
};

struct DeviationTable {
  std::vector<DeviationRow> rows;
  double max_rel = 0.0;
  double tol = 0.0;
  int failures = 0;
  bool pass() const { return failures == 0 && max_rel <= tol; }
};

namespace detail {

inline double covector_distance(const Covector& a, const Covector& b) { return max_abs(difference(a, b)); }

inline void finish(DeviationTable& t) {
  for (const auto& r : t.rows) {
    if (!r.error.empty()) {
      ++t.failures;
      continue;
    }
    t.max_rel = std::max(t.max_rel, r.rel_dev);
  }
}

inline double relative(double dev, const Covector& a, const Covector& b, double floor) {
  return dev / std::max({max_abs(a), max_abs(b), floor});
}

}  // namespace detail

/// Pi^* S omega against S_q(t^sigma Pi^* omega) / s^sigma, the second side
/// computed by the one-variable Cauchy transform in the chart coordinate t.
inline DeviationTable commutation_check(const WeightedVariety& V, const AntiForm& omega, const SolverConfig& cfg,
                                        const std::vector<CVec>& points, cdouble s = cdouble(0.9, 0.25),
                                        double tol = 1e-5) {
  DeviationTable tab;
  tab.tol = tol;
  tab.rows.resize(points.size());
  const auto& beta = V.weights();
  const double R = omega.support_radius();
  parallel_for(points.size(), [&](std::size_t i) {
    DeviationRow& row = tab.rows[i];
    row.point = points[i];
    try {
      Chart C(V, points[i]);
      const int d = C.dim();
      const int q = omega.degree();
      const CVec x0 = C.base_parameter();
      const SlicePoint sp0 = C.slice_point(x0);
      const int sigma = resolve_sigma(cfg, V, q);

      auto eta_at = [&C, &omega, sp0, x0, sigma](const CVec& w) {
        CVec x = w.tail(w.size() - 1);
        SlicePoint sp = (x == x0) ? sp0 : C.slice_point(x);
        Covector c = pullback(omega, C, w(0), sp);
        return scaled(c, ipow(w(0), sigma));
      };
      AntiForm eta(d, q, 1.0);
      for (const auto& A : all_multi_indices(d, q))
        eta.set(A, Coefficient([eta_at, A](const CVec& w) {
                  if (w(0) == 0.0) return cdouble(0.0);
                  Covector c = eta_at(w);
                  auto it = c.find(A);
                  return it == c.end() ? cdouble(0.0) : it->second;
                }));
      CVec w(d);
      w(0) = s;
      w.tail(d - 1) = x0;
      ProductSolveOptions opt;
      opt.fiber_radius = support_u_radius(sp0.y, beta, R) * (1.0 + 1e-9);
      opt.extra_centers = {0.0};
      opt.audit = q < d;
      SolveResult lhs = product_solve(eta, w, cfg.quad, opt);
      Covector left = scaled(lhs.value, 1.0 / ipow(s, sigma));

      CVec Z = C.map(s, sp0);
      Covector right = pullback_covector(solve(omega, V, Z, cfg).value, C.jacobian(s, sp0));
      row.abs_dev = detail::covector_distance(left, right);
      row.rel_dev = detail::relative(row.abs_dev, left, right, 1e-3);
    } catch (const Error& e) {
      row.error = std::string(errc_name(e.code())) + ": " + e.what();
    }
  });
  detail::finish(tab);
  return tab;
}

struct PhiRow {
  CVec x;
  double dev_ab = 0.0;  // pulled-back solution vs the commuted formula
  double dev_ac = 0.0;  // pulled-back solution vs the cone solver on the lifted cone
  std::string error;
};

struct PhiTable {
  std::vector<PhiRow> rows;
  double max_rel = 0.0;
  double tol = 0.0;
  int failures = 0;
  bool pass() const { return failures == 0 && max_rel <= tol; }
};

/// Phi^* S omega = S (Phi^* omega) at points x of the lifted cone, by three
/// quadratures: pull back the weighted solution, the commuted formula on X,
/// and the cone solver applied to the pulled-back form.
inline PhiTable phi_commutation_check(const WeightedVariety& V, const AntiForm& omega, const SolverConfig& cfg,
                                      const std::vector<CVec>& points, double tol = 1e-6) {
  PhiTable tab;
  tab.tol = tol;
  tab.rows.resize(points.size());
  const auto& beta = V.weights();
  const WeightedVariety X = phi_lift_variety(V);
  const AntiForm lifted = phi_pullback(omega, beta);
  SolverConfig wcfg = cfg;
  wcfg.mode = SolverMode::Weighted;
  wcfg.sigma = resolve_sigma(cfg, V, omega.degree());
  SolverConfig ccfg = wcfg;
  ccfg.mode = SolverMode::Cone;
  parallel_for(points.size(), [&](std::size_t i) {
    PhiRow& row = tab.rows[i];
    row.x = points[i];
    try {
      const CVec& x = points[i];
      Covector a = phi_pullback_covector(solve_weighted(omega, V, phi_map(x, beta), wcfg).value, x, beta);
      Covector b = phi_commuted_solve(omega, V, x, wcfg).value;
      Covector c = solve_cone(lifted, X, x, ccfg).value;
      row.dev_ab = detail::relative(detail::covector_distance(a, b), a, b, 1e-3);
      row.dev_ac = detail::relative(detail::covector_distance(a, c), a, c, 1e-3);
    } catch (const Error& e) {
      row.error = std::string(errc_name(e.code())) + ": " + e.what();
    }
  });
  for (const auto& r : tab.rows) {
    if (!r.error.empty()) {
      ++tab.failures;
      continue;
    }
    tab.max_rel = std::max({tab.max_rel, r.dev_ab, r.dev_ac});
  }
  return tab;
}

/// solve_cone against solve_weighted with identical sigma.
inline DeviationTable cone_weighted_agreement(const WeightedVariety& V, const std::vector<AntiForm>& forms,
                                              const std::vector<CVec>& points, const SolverConfig& cfg,
                                              double tol = 1e-10) {
  if (forms.size() != points.size()) fail(Errc::InvalidArgument, "one form per point expected");
  DeviationTable tab;
  tab.tol = tol;
  tab.rows.resize(points.size());
  std::vector<double> size(points.size(), 0.0);
  parallel_for(points.size(), [&](std::size_t i) {
    DeviationRow& row = tab.rows[i];
    row.point = points[i];
    try {
      SolverConfig c = cfg;
      c.sigma = resolve_sigma(cfg, V, forms[i].degree());
      c.mode = SolverMode::Cone;
      Covector a = solve_cone(forms[i], V, points[i], c).value;
      c.mode = SolverMode::Weighted;
      Covector b = solve_weighted(forms[i], V, points[i], c).value;
      row.abs_dev = detail::covector_distance(a, b);
      size[i] = std::max(max_abs(a), max_abs(b));
    } catch (const Error& e) {
      row.error = std::string(errc_name(e.code())) + ": " + e.what();
    }
  });
  // Values that vanish identically (points outside the support) are measured
  // against the batch scale.
  const double floor = size.empty() ? 0.0 : 1e-3 * *std::max_element(size.begin(), size.end());
  for (std::size_t i = 0; i < points.size(); ++i)
    tab.rows[i].rel_dev = tab.rows[i].abs_dev / std::max({size[i], floor, 1e-300});
  detail::finish(tab);
  return tab;
}

// ---------------------------------------------------------------------------
// Exterior algebra bookkeeping

struct SignAudit {
  long checked = 0;
  long failures = 0;
};

/// sign(j, J\j) sign(k, J\{j,k}) = -sign(k, J\k) sign(j, J\{j,k}) for j != k,
/// over every J with 2 <= |J| <= max_q in C^n, n <= max_n.
inline SignAudit sign_cancellation_audit(int max_q = 4, int max_n = 6) {
  SignAudit a;
  for (int n = 1; n <= max_n; ++n)
    for (int q = 2; q <= std::min(max_q, n); ++q)
      for (const auto& J : all_multi_indices(n, q))
        for (int j : J)
          for (int k : J) {
            if (j == k) continue;
            MultiIndex Jjk = J.without(j).without(k);
            int lhs = sign_perm(j, J.without(j)) * sign_perm(k, Jjk);
            int rhs = -sign_perm(k, J.without(k)) * sign_perm(j, Jjk);
            ++a.checked;
            if (lhs != rhs) ++a.failures;
          }
  return a;
}

/// Pi^* aleph_J against conj(s^beta_J) Theta_J at a chart point: the
/// d(conj s) terms must cancel. Returns the largest relative deviation over
/// all J of degree 1..d.
inline double aleph_pullback_deviation(const Chart& C, cdouble s, const CVec& x) {
  const auto& V = C.variety();
  const auto& beta = V.weights();
  const int n = V.n();
  const int d = C.dim();
  SlicePoint sp = C.slice_point(x);
  CVec Z = C.map(s, sp);
  CMat J = C.jacobian(s, sp);
  double worst = 0.0;
  for (int q = 1; q <= d; ++q)
    for (const auto& I : all_multi_indices(n, q)) {
      Covector pb = pullback_covector(aleph_multiplier(I, Z, beta), J);
      Covector theta;
      cdouble sb = std::conj(ipow(s, beta_sum(I, beta.values())));
      for (const auto& A : all_multi_indices(d, q - 1)) {
        if (A.contains(0)) continue;
        MultiIndex Ax;
        for (int a : A) Ax = Ax.with(a - 1);
        cdouble acc = 0.0;
        for (int j : I) {
          MultiIndex K = I.without(j);
          acc += static_cast<double>(beta[j]) * std::conj(sp.y(j)) * static_cast<double>(sign_perm(j, K)) *
                 std::conj(small_det(submatrix(sp.dy, K, Ax)));
        }
        theta[A] = sb * acc;
      }
      double dev = max_abs(difference(pb, theta));
      worst = std::max(worst, dev / std::max({max_abs(pb), max_abs(theta), 1e-12}));
    }
  return worst;
}

// ---------------------------------------------------------------------------
// Cauchy-Pompeiu

struct PompeiuRow {
  std::string label;
  double epsilon = 0.0;  // fitted sign, Re(dbar(I f) / f) at the largest |f|
  double max_err = 0.0;  // max |dbar(I f) - eps f| with the global eps
};

/// dbar(I f) = eps f with eps = kOrientationSign for every f, at the given points.
inline std::vector<PompeiuRow> cauchy_pompeiu_audit(
    const std::vector<std::pair<std::string, std::function<cdouble(cdouble)>>>& fs, const std::vector<cdouble>& points,
    const QuadratureSpec& spec, double h) {
  std::vector<PompeiuRow> out(fs.size());
  for (std::size_t k = 0; k < fs.size(); ++k) {
    const auto& f = fs[k].second;
    LocalForm F{1, 0,
                [&](const CVec& w) { return Covector{{MultiIndex{}, cauchy_transform(f, w(0), spec).value}}; }, {}};
    std::vector<cdouble> d(points.size());
    parallel_for(points.size(), [&](std::size_t i) {
      d[i] = dbar_fd(F, CVec::Constant(1, points[i]), h).at(MultiIndex{0});
    });
    PompeiuRow row{fs[k].first, 0.0, 0.0};
    double best = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      cdouble fv = f(points[i]);
      if (std::abs(fv) > best) {
        best = std::abs(fv);
        row.epsilon = (d[i] / fv).real();
      }
      row.max_err = std::max(row.max_err, std::abs(d[i] - static_cast<double>(kOrientationSign) * fv));
    }
    out[k] = row;
  }
  return out;
}

}  // namespace dbar
