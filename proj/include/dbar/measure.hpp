#pragma once

#include "dbar/core.hpp"
#include "dbar/forms.hpp"
#include "dbar/quadrature.hpp"
#include "dbar/variety.hpp"

#include <cmath>
#include <functional>

namespace dbar {

/// Resolution of the tensor rules used to integrate over Sigma.
struct MeasureResolution {
  int radial_panels = 6;
  int radial_order = 6;
  int angular_nodes = 24;

  MeasureResolution refined() const { return {radial_panels * 2, radial_order, angular_nodes * 2}; }
  MeasureResolution coarsened() const {
    return {std::max(1, radial_panels / 2), radial_order, std::max(4, angular_nodes / 2)};
  }
};

/// Node on Sigma with its volume weight (dV_Sigma) and a holomorphic tangent frame.
struct SigmaNode {
  CVec z;
  CMat frame;  // n x d
  double w;
};

namespace detail {

/// Gauss nodes for int_0^rmax g(r) r dr: uniform panels, plus a square-root
/// map on the first panel so r^alpha behaviour at 0 stays integrable.
inline void radial_nodes(double rmax, const MeasureResolution& res, std::vector<std::pair<double, double>>& out) {
  out.clear();
  const auto& gl = gauss_legendre(res.radial_order);
  const double h = rmax / res.radial_panels;
  for (int p = 0; p < res.radial_panels; ++p) {
    for (std::size_t i = 0; i < gl.x.size(); ++i) {
      if (p == 0) {
        // r = h v^2 clusters nodes at the origin
        double v = gl.x[i];
        double r = h * v * v;
        out.emplace_back(r, gl.w[i] * 2.0 * h * v * r);
      } else {
        double r = h * (p + gl.x[i]);
        out.emplace_back(r, gl.w[i] * h * r);
      }
    }
  }
}

/// Largest r in [0, rmax] along w + r e_last with |P| <= R, assuming |P|
/// increases along the ray.
inline double ray_cutoff(const Parametrization& P, CVec w, Eigen::Index last, cdouble dir, double rmax, double R) {
  auto inside = [&](double r) {
    w(last) = r * dir;
    return P.map(w).norm() <= R;
  };
  if (inside(rmax)) return rmax;
  double lo = 0.0, hi = rmax;
  for (int it = 0; it < 60; ++it) {
    double mid = 0.5 * (lo + hi);
    (inside(mid) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

/// Quadrature over Sigma cap B_R through the variety's parametrization
/// P : C^m -> Sigma: dV_Sigma = det(J_P^H J_P) dA(w) / covering_degree.
/// The last parameter is clipped exactly to |P(w)| <= R ray by ray.
class ParamAtlas {
 public:
  ParamAtlas(const WeightedVariety& V, double R, MeasureResolution res = {}) : V_(V), R_(R), res_(res) {
    if (!V.parametrization()) fail(Errc::AtlasIncomplete, "variety '" + V.name() + "' has no parametrization");
    if (!(R > 0.0)) fail(Errc::InvalidArgument, "atlas radius must be positive");
    const auto& P = *V.parametrization();
    if (P.dim != V.dim()) fail(Errc::AtlasIncomplete, "parametrization dimension differs from the variety dimension");
    if (P.dim < 1 || P.dim > 2) fail(Errc::AtlasIncomplete, "parametrizations of dimension 1 or 2 only");
    for (int i = 0; i < P.dim; ++i) radii_.push_back(P.parameter_radius(i, R));
  }

  const WeightedVariety& variety() const { return V_; }
  double radius() const { return R_; }
  const MeasureResolution& resolution() const { return res_; }

  std::vector<SigmaNode> nodes() const {
    const auto& P = *V_.parametrization();
    std::vector<SigmaNode> out;
    std::vector<std::pair<double, double>> rad;
    const int nth = res_.angular_nodes;
    const double wth = 2.0 * kPi / nth;
    auto emit = [&](const CVec& w, double weight) {
      CVec z = P.map(w);
      if (z.norm() > R_) return;
      CMat J = P.jacobian(w);
      double dens = std::abs((J.adjoint() * J).determinant());
      if (dens == 0.0) return;
      out.push_back({z, J, weight * dens / P.covering_degree});
    };
    auto inner = [&](CVec w, double outer_weight) {
      const Eigen::Index last = P.dim - 1;
      for (int j = 0; j < nth; ++j) {
        cdouble dir = std::polar(1.0, (j + 0.5) * wth);
        double rmax = detail::ray_cutoff(P, w, last, dir, radii_[static_cast<std::size_t>(last)], R_);
        if (rmax <= 0.0) continue;
        std::vector<std::pair<double, double>> rn;
        detail::radial_nodes(rmax, res_, rn);
        for (const auto& [r, wr] : rn) {
          w(last) = r * dir;
          emit(w, outer_weight * wr * wth);
        }
      }
    };
    if (P.dim == 1) {
      inner(CVec::Zero(1), 1.0);
    } else {
      detail::radial_nodes(radii_[0], res_, rad);
      for (int j = 0; j < nth; ++j) {
        cdouble dir = std::polar(1.0, (j + 0.5) * wth);
        for (const auto& [r, wr] : rad) {
          CVec w = CVec::Zero(2);
          w(0) = r * dir;
          inner(w, wr * wth);
        }
      }
    }
    return out;
  }

  ParamAtlas refined() const { return ParamAtlas(V_, R_, res_.refined()); }

 private:
  WeightedVariety V_;
  double R_;
  MeasureResolution res_;
  std::vector<double> radii_;
};

struct NormEstimate {
  double value = 0.0;
  double error = 0.0;  // difference to the rule with half the panels and angles
  std::size_t nodes = 0;
};

/// int_{Sigma cap B_R} F dV_Sigma on the given nodes.
inline double integrate_nodes(const std::vector<SigmaNode>& nodes, const std::function<double(const SigmaNode&)>& F) {
  std::vector<double> vals(nodes.size());
  parallel_for(nodes.size(), [&](std::size_t i) { vals[i] = F(nodes[i]); });
  double s = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) s += nodes[i].w * vals[i];
  return s;
}

/// L^p norm of a pointwise norm function on Sigma cap B_R; p = infinity
/// takes the largest sampled value.
inline NormEstimate lp_norm_of(const std::function<double(const SigmaNode&)>& pointwise, const ParamAtlas& atlas,
                               double p) {
  if (!(p >= 1.0)) fail(Errc::InvalidArgument, "p must be >= 1");
  auto eval = [&](const ParamAtlas& A) {
    auto nodes = A.nodes();
    if (nodes.empty()) fail(Errc::SamplerError, "sampler produced no nodes");
    double v;
    if (std::isinf(p)) {
      std::vector<double> vals(nodes.size());
      parallel_for(nodes.size(), [&](std::size_t i) { vals[i] = pointwise(nodes[i]); });
      v = *std::max_element(vals.begin(), vals.end());
    } else {
      v = std::pow(integrate_nodes(nodes, [&](const SigmaNode& nd) { return std::pow(pointwise(nd), p); }), 1.0 / p);
    }
    return std::make_pair(v, nodes.size());
  };
  auto [fine, n] = eval(atlas);
  auto [coarse, n0] = eval(ParamAtlas(atlas.variety(), atlas.radius(), atlas.resolution().coarsened()));
  (void)n0;
  return {fine, std::abs(fine - coarse), n};
}

/// ||omega||_{L^p(Sigma cap B_R)} with the induced pointwise norm.
inline NormEstimate lp_norm(const AntiForm& omega, const ParamAtlas& atlas, double p) {
  return lp_norm_of([&](const SigmaNode& nd) { return pointwise_norm(omega(nd.z), nd.frame); }, atlas, p);
}

// ---------------------------------------------------------------------------
// Projective / radial split on cones.

/// Nodes on the projectivisation of a cone with the Fubini-Study volume of
/// the Hopf quotient of the unit sphere, and unit representatives.
struct LinkNode {
  CVec zdot;   // |zdot| = 1
  double w;
  CMat frame;  // tangent frame of the cone along the line
};

/// Cones with a homogeneous parametrization of dimension d <= 2. For d = 2 the
/// projective line of parameters is covered by the charts (1, v) and (v, 1)
/// with |v| <= 1.
inline std::vector<LinkNode> link_nodes(const WeightedVariety& V, const MeasureResolution& res) {
  if (!V.is_cone()) fail(Errc::NotACone, "projective split needs a cone");
  if (!V.parametrization()) fail(Errc::AtlasIncomplete, "variety has no parametrization");
  const auto& P = *V.parametrization();
  const int k = P.homogeneous_degree();
  if (k < 1) fail(Errc::SamplerError, "projective split needs a homogeneous parametrization");
  if (P.covering_degree % k != 0) fail(Errc::SamplerError, "covering degree is not a multiple of the homogeneity");
  const double pdeg = static_cast<double>(P.covering_degree / k);
  std::vector<LinkNode> out;
  if (P.dim == 1) {
    CVec y = P.map(CVec::Constant(1, 1.0));
    out.push_back({y / y.norm(), 1.0 / pdeg, P.jacobian(CVec::Constant(1, 1.0))});
    return out;
  }
  if (P.dim != 2) fail(Errc::SamplerError, "projective split supports dimension 1 and 2");
  std::vector<std::pair<double, double>> rad;
  detail::radial_nodes(1.0, res, rad);
  const int nth = res.angular_nodes;
  const double wth = 2.0 * kPi / nth;
  for (int chart = 0; chart < 2; ++chart) {
    for (int j = 0; j < nth; ++j) {
      cdouble dir = std::polar(1.0, (j + 0.5) * wth);
      for (const auto& [r, wr] : rad) {
        cdouble v = r * dir;
        CVec w(2), dw(2);
        if (chart == 0) {
          w << 1.0, v;
          dw << 0.0, 1.0;
        } else {
          w << v, 1.0;
          dw << 1.0, 0.0;
        }
        CVec y = P.map(w);
        CVec D = P.jacobian(w) * dw;
        const double ny2 = y.squaredNorm();
        cdouble yd = y.dot(D);  // y^H D
        double g = D.squaredNorm() / ny2 - std::norm(yd) / (ny2 * ny2);
        out.push_back({y / std::sqrt(ny2), wr * wth * g / pdeg, P.jacobian(w)});
      }
    }
  }
  return out;
}

/// int_{[z]} int_{|t| < R} Phi(zdot t) |t|^(2d-2) dA(t) dV([z]).
inline double radial_first_integral(const WeightedVariety& V, const std::function<double(const CVec&)>& Phi, double R,
                                    const MeasureResolution& res) {
  const int d = V.dim();
  auto link = link_nodes(V, res);
  std::vector<std::pair<double, double>> rad;
  MeasureResolution tres = res;
  tres.radial_panels *= 2;
  detail::radial_nodes(R, tres, rad);
  const int nth = res.angular_nodes;
  const double wth = 2.0 * kPi / nth;
  std::vector<double> vals(link.size());
  parallel_for(link.size(), [&](std::size_t i) {
    double acc = 0.0;
    for (int j = 0; j < nth; ++j) {
      cdouble ph = std::polar(1.0, (j + 0.5) * wth);
      for (const auto& [r, wr] : rad) acc += wr * wth * Phi(CVec(link[i].zdot * (r * ph))) * std::pow(r, 2 * d - 2);
    }
    vals[i] = acc;
  });
  double s = 0.0;
  for (std::size_t i = 0; i < link.size(); ++i) s += link[i].w * vals[i];
  return s;
}

/// int_{Sigma cap B_R} Phi dV_Sigma through the parametrization.
inline double direct_integral(const WeightedVariety& V, const std::function<double(const CVec&)>& Phi, double R,
                              const MeasureResolution& res) {
  ParamAtlas A(V, R, res);
  return integrate_nodes(A.nodes(), [&](const SigmaNode& nd) { return Phi(nd.z); });
}

}  // namespace dbar
