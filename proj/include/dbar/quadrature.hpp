#pragma once

#include "dbar/core.hpp"

#include <boost/math/special_functions/legendre.hpp>

#include <cmath>
#include <map>
#include <mutex>
#include <vector>

namespace dbar {

/// Plan for integrating over a disc in C with integrable point singularities.
struct QuadratureSpec {
  double outer_radius = 0.0;               // disc radius; 0 lets the caller derive it from the support
  cdouble outer_center = 0.0;
  std::vector<cdouble> singular_centers;   // extra centers on top of the caller's own
  int rings_per_decade = 3;
  int angular_nodes = 32;
  int radial_order = 8;
  double min_radius = 1e-8;
  double target_rel_err = 1e-6;
  int max_depth = 4;
  int fixed_level = -1;                    // >= 0 disables adaptivity
  double max_panel_fraction = 0.1;        // radial panels no longer than this times the disc radius
};

struct QuadStats {
  int level = 0;
  std::size_t evaluations = 0;
  double change = 0.0;   // |I_level - I_{level-1}| in the max norm, 0 when frozen

  void merge(const QuadStats& o) {
    level = std::max(level, o.level);
    evaluations += o.evaluations;
    change = std::max(change, o.change);
  }
};

/// Singular point of an integrand: |F(u)| ~ |u - c|^(alpha - 1) nearby, so
/// F r dr has exponent alpha. alpha = 0 is the Cauchy kernel.
struct SingularCenter {
  cdouble c;
  double alpha = 0.0;
};

struct QuadNode {
  cdouble u;
  double w;
};

namespace detail {

struct GaussRule {
  std::vector<double> x, w;  // on [0, 1]
};

inline const GaussRule& gauss_legendre(int order) {
  static std::mutex mu;
  static std::map<int, GaussRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(order);
  if (it != cache.end()) return it->second;
  GaussRule r;
  for (double z : boost::math::legendre_p_zeros<double>(order)) {
    double dp = boost::math::legendre_p_prime<double>(order, z);
    double w = 2.0 / ((1.0 - z * z) * dp * dp);
    if (z == 0.0) {
      r.x.push_back(0.5);
      r.w.push_back(0.5 * w);
    } else {
      r.x.push_back(0.5 * (1.0 - z));
      r.w.push_back(0.5 * w);
      r.x.push_back(0.5 * (1.0 + z));
      r.w.push_back(0.5 * w);
    }
  }
  return cache.emplace(order, std::move(r)).first->second;
}

inline bool is_integer(double a) { return std::abs(a - std::round(a)) < 1e-12; }

}  // namespace detail

/// Disc D(center, radius) with singular centers; each center's polar rule is
/// blended with the others through a smooth partition of unity of order m.
struct PlaneGeometry {
  cdouble center = 0.0;
  double radius = 1.0;
  std::vector<SingularCenter> centers;
  int pou_order = 1;
};

/// Tensor polar rule at a refinement level: every center gets geometrically
/// graded Gauss panels along rays clipped exactly to the disc, trapezoid in
/// angle, and weights multiplied by that center's partition-of-unity share.
inline std::vector<QuadNode> build_plane_rule(const PlaneGeometry& geo, const QuadratureSpec& spec, int level) {
  if (!(geo.radius > 0.0)) fail(Errc::InvalidArgument, "integration disc needs positive radius");
  if (spec.rings_per_decade < 1 || spec.angular_nodes < 4 || spec.radial_order < 2 || !(spec.min_radius > 0.0))
    fail(Errc::InvalidArgument, "invalid quadrature resolution");
  const int rpd = spec.rings_per_decade << level;
  const int nth = spec.angular_nodes << level;
  const double ratio = std::pow(10.0, -1.0 / rpd);
  const auto& gl = detail::gauss_legendre(spec.radial_order);
  const double hmax = geo.radius * spec.max_panel_fraction / (1 << level);

  // centers inside the disc; a center just outside grows the disc instead
  PlaneGeometry g = geo;
  std::vector<SingularCenter> active;
  for (const auto& c : geo.centers) {
    double dist = std::abs(c.c - geo.center);
    if (dist < geo.radius) {
      active.push_back(c);
    } else if (dist < 1.05 * geo.radius) {
      g.radius = std::max(g.radius, 1.05 * dist);
      active.push_back(c);
    }
  }
  if (active.empty()) active.push_back({g.center, 1.0});
  const std::size_t nc = active.size();
  const int m2 = 2 * std::max(1, g.pou_order);

  std::vector<QuadNode> nodes;
  for (std::size_t k = 0; k < nc; ++k) {
    const cdouble c = active[k].c;
    const double alpha = active[k].alpha;
    const cdouble rel = c - g.center;
    const double rref = g.radius + std::abs(rel);
    const int panels = std::max(1, static_cast<int>(std::ceil(std::log10(rref / spec.min_radius) * rpd)));
    for (int j = 0; j < nth; ++j) {
      const double th = 2.0 * kPi * j / nth;
      const cdouble e = std::polar(1.0, th);
      // |rel + r e| = radius
      const double b = (std::conj(rel) * e).real();
      const double disc = b * b - std::norm(rel) + g.radius * g.radius;
      if (disc <= 0.0) continue;
      const double rmax = -b + std::sqrt(disc);
      if (rmax <= 0.0) continue;
      const double wth = 2.0 * kPi / nth;
      // geometric breakpoints, with long panels split to at most hmax
      std::vector<double> breaks{rmax};
      for (int p = 0; p < panels; ++p) {
        const double next = breaks.back() * ratio;
        const int pieces = static_cast<int>(std::ceil((breaks.back() - next) / hmax));
        const double top = breaks.back();
        for (int q = 1; q <= pieces; ++q) breaks.push_back(top - (top - next) * q / pieces);
      }
      breaks.push_back(0.0);
      for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
        const double outer = breaks[p], inner = breaks[p + 1];
        const bool innermost = p + 2 == breaks.size();
        for (std::size_t i = 0; i < gl.x.size(); ++i) {
          double r, wr;
          if (innermost && !detail::is_integer(alpha)) {
            // r = outer * v^(1/(1+alpha)) removes the r^alpha endpoint behaviour
            const double v = gl.x[i];
            const double ex = 1.0 / (1.0 + alpha);
            r = outer * std::pow(v, ex);
            wr = gl.w[i] * outer * ex * std::pow(v, ex - 1.0);
          } else {
            r = inner + (outer - inner) * gl.x[i];
            wr = gl.w[i] * (outer - inner);
          }
          const cdouble u = c + r * e;
          double share = 1.0;
          if (nc > 1) {
            double num = 0.0, den = 0.0;
            for (std::size_t a = 0; a < nc; ++a) {
              double prod = 1.0;
              for (std::size_t l = 0; l < nc; ++l)
                if (l != a) prod *= ipow(std::abs(u - active[l].c), m2);
              den += prod;
              if (a == k) num = prod;
            }
            share = den > 0.0 ? num / den : 0.0;
          }
          if (share == 0.0) continue;
          nodes.push_back({u, wth * wr * r * share});
        }
      }
    }
  }
  return nodes;
}

template <class Vec>
double max_norm(const Vec& v) {
  double m = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) m = std::max(m, std::abs(v(i)));
  return m;
}

struct QuadResult {
  CVec value;
  QuadStats stats;
};

/// Integrates a vector-valued integrand F(u) (size `dim`) over the disc,
/// refining until two successive levels agree to target_rel_err relative to
/// max(|I|, 1e-2 * integral of |F|).
template <class F>
QuadResult integrate_plane(const PlaneGeometry& geo, const QuadratureSpec& spec, Eigen::Index dim, F&& integrand) {
  auto run = [&](int level, double& mass) {
    auto nodes = build_plane_rule(geo, spec, level);
    CVec acc = CVec::Zero(dim);
    CVec val(dim);
    mass = 0.0;
    for (const auto& nd : nodes) {
      integrand(nd.u, val);
      acc += nd.w * val;
      mass += nd.w * max_norm(val);
    }
    return std::make_pair(acc, nodes.size());
  };

  QuadResult res;
  double mass = 0.0;
  if (spec.fixed_level >= 0) {
    auto [v, cnt] = run(spec.fixed_level, mass);
    if (!v.allFinite()) fail(Errc::QuadratureNonConvergent, "non-finite quadrature sum");
    res.value = v;
    res.stats = {spec.fixed_level, cnt, 0.0};
    return res;
  }
  auto [prev, cnt0] = run(0, mass);
  std::size_t evals = cnt0;
  for (int level = 1; level <= spec.max_depth; ++level) {
    auto [cur, cnt] = run(level, mass);
    evals += cnt;
    if (!cur.allFinite()) fail(Errc::QuadratureNonConvergent, "non-finite quadrature sum");
    const double change = max_norm(CVec(cur - prev));
    const double scale = std::max(max_norm(cur), 1e-2 * mass);
    if (change <= spec.target_rel_err * scale || scale == 0.0) {
      res.value = cur;
      res.stats = {level, evals, change};
      return res;
    }
    prev = cur;
  }
  fail(Errc::QuadratureNonConvergent,
       "no convergence within " + std::to_string(spec.max_depth) + " refinements");
}

}  // namespace dbar
