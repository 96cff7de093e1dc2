#pragma once

#include "dbar/kernel.hpp"
#include "dbar/measure.hpp"
#include "dbar/solver.hpp"

#include <cmath>
#include <functional>
#include <vector>

namespace dbar {

/// Tensor grid on the disc |t| < R: Gauss panels in r, uniform in angle.
/// The innermost uniform panel is split geometrically toward 0 so weights
/// like |t|^(-2 delta) stay integrable.
struct PolarGrid {
  double R = 1.0;
  int order = 8;
  int M = 64;                      // angles, even
  int panels = 8;                  // uniform panels
  int grading = 16;                // geometric panels inside the first uniform one
  std::vector<double> breaks;      // panel ends, increasing, breaks[0] = 0
  std::vector<double> r, wr;       // radial nodes and weights for int g(r) dr

  double theta(int k) const { return 2.0 * kPi * (k + 0.5) / M; }
  std::size_t rings() const { return r.size(); }
  std::size_t size() const { return r.size() * static_cast<std::size_t>(M); }
  cdouble node(std::size_t ring, int k) const { return std::polar(r[ring], theta(k)); }
  /// Area weight of a node, including the Jacobian r.
  double area_weight(std::size_t ring) const { return wr[ring] * r[ring] * 2.0 * kPi / M; }
};

inline PolarGrid make_polar_grid(double R, int panels = 8, int order = 8, int M = 64, int grading = 16) {
  if (!(R > 0.0) || panels < 1 || order < 2 || M < 4 || M % 2 != 0 || grading < 0)
    fail(Errc::InvalidArgument, "invalid polar grid");
  PolarGrid g;
  g.R = R;
  g.order = order;
  g.M = M;
  g.panels = panels;
  g.grading = grading;
  const double h = R / panels;
  std::vector<double> b{0.0};
  for (int j = grading; j >= 1; --j) b.push_back(h * std::ldexp(1.0, -j));
  for (int p = 1; p <= panels; ++p) b.push_back(h * p);
  g.breaks = b;
  const auto& gl = detail::gauss_legendre(order);
  for (std::size_t p = 0; p + 1 < b.size(); ++p)
    for (std::size_t i = 0; i < gl.x.size(); ++i) {
      g.r.push_back(b[p] + (b[p + 1] - b[p]) * gl.x[i]);
      g.wr.push_back(gl.w[i] * (b[p + 1] - b[p]));
    }
  return g;
}

/// Radial weights w with sum_i w_i f(r_i) ~ int_0^R f(r) r^alpha dr for smooth
/// f and alpha > -1. The innermost panel integrates the power exactly against
/// the interpolant of f.
inline std::vector<double> radial_weights(const PolarGrid& g, double alpha) {
  if (!(alpha > -1.0)) fail(Errc::InvalidArgument, "radial weight exponent must exceed -1");
  const auto& gl = detail::gauss_legendre(g.order);
  const Eigen::Index n = static_cast<Eigen::Index>(gl.x.size());
  std::vector<double> w(g.rings());
  for (std::size_t i = static_cast<std::size_t>(n); i < g.rings(); ++i) w[i] = g.wr[i] * std::pow(g.r[i], alpha);
  Eigen::MatrixXd V(n, n);
  Eigen::VectorXd mom(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index i = 0; i < n; ++i) V(k, i) = std::pow(gl.x[static_cast<std::size_t>(i)], static_cast<double>(k));
    mom(k) = 1.0 / (static_cast<double>(k) + alpha + 1.0);
  }
  const Eigen::VectorXd u = V.colPivHouseholderQr().solve(mom);
  const double eps = g.breaks[1];
  for (Eigen::Index i = 0; i < n; ++i) w[static_cast<std::size_t>(i)] = u(i) * std::pow(eps, alpha + 1.0);
  return w;
}

inline PolarGrid refined(const PolarGrid& g) {
  return make_polar_grid(g.R, 2 * g.panels, g.order, 2 * g.M, g.grading + 1);
}

namespace detail {

/// Lagrange basis of the reference Gauss nodes evaluated at y.
inline std::vector<double> lagrange_row(const std::vector<double>& x, double y) {
  std::vector<double> row(x.size(), 1.0);
  for (std::size_t l = 0; l < x.size(); ++l)
    for (std::size_t m = 0; m < x.size(); ++m)
      if (m != l) row[l] *= (y - x[m]) / (x[l] - x[m]);
  return row;
}

}  // namespace detail

/// Solid Cauchy transform I G = (1/pi) int G(s) / (s - t) dA(s) at every grid
/// node, for G given at the grid nodes (ring-major) and zero for |s| >= R.
/// Angular Fourier modes G_m(s) give
///   m >= 1: 2 e^{i(m-1)theta} int_r^R G_m(s) (r/s)^(m-1) ds,
///   m <= 0: -2 e^{i(m-1)theta} int_0^r G_m(s) (s/r)^(1-m) ds,
/// split at r with Gauss rules on the partial panel fed by interpolation.
inline std::vector<cdouble> polar_cauchy(const PolarGrid& g, const std::vector<cdouble>& G) {
  const int M = g.M;
  const std::size_t nr = g.rings();
  if (G.size() != g.size()) fail(Errc::InvalidArgument, "grid values have the wrong size");
  const auto& gl = detail::gauss_legendre(g.order);
  const std::size_t n = gl.x.size();
  const int mlo = -M / 2, mhi = M / 2 - 1;
  const int nm = mhi - mlo + 1;

  // Fourier coefficients per ring
  std::vector<cdouble> Gm(nr * static_cast<std::size_t>(nm));
  parallel_for(nr, [&](std::size_t j) {
    for (int m = mlo; m <= mhi; ++m) {
      cdouble acc = 0.0;
      for (int k = 0; k < M; ++k) acc += G[j * M + k] * std::polar(1.0, -m * g.theta(k));
      Gm[j * nm + (m - mlo)] = acc / static_cast<double>(M);
    }
  });

  // interpolation onto the two halves of a panel split at its own node
  std::vector<std::vector<std::vector<double>>> lo(n), hi(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      lo[i].push_back(detail::lagrange_row(gl.x, gl.x[i] * gl.x[k]));
      hi[i].push_back(detail::lagrange_row(gl.x, gl.x[i] + (1.0 - gl.x[i]) * gl.x[k]));
    }

  std::vector<cdouble> out(g.size());
  parallel_for(nr, [&](std::size_t i) {
    const std::size_t p = i / n, li = i % n;
    const double a = g.breaks[p], b = g.breaks[p + 1];
    const double ri = g.r[i];
    std::vector<cdouble> C(static_cast<std::size_t>(nm), 0.0);
    // adds weight * Gm(s) * pow, with pow = (s/r)^(1-m) below and (r/s)^(m-1) above
    auto accumulate = [&](double s, double w, const cdouble* gm, bool below) {
      if (below) {
        const double x = s / ri;
        double pw = x;  // m = 0
        for (int m = 0; m >= mlo; --m) {
          C[static_cast<std::size_t>(m - mlo)] -= 2.0 * w * pw * gm[m - mlo];
          pw *= x;
        }
      } else {
        const double x = ri / s;
        double pw = 1.0;  // m = 1
        for (int m = 1; m <= mhi; ++m) {
          C[static_cast<std::size_t>(m - mlo)] += 2.0 * w * pw * gm[m - mlo];
          pw *= x;
        }
      }
    };
    for (std::size_t j = 0; j < p * n; ++j) accumulate(g.r[j], g.wr[j], &Gm[j * nm], true);
    for (std::size_t j = (p + 1) * n; j < nr; ++j) accumulate(g.r[j], g.wr[j], &Gm[j * nm], false);
    std::vector<cdouble> sub(static_cast<std::size_t>(nm));
    for (int half = 0; half < 2; ++half) {
      const double s0 = half == 0 ? a : ri, s1 = half == 0 ? ri : b;
      const auto& L = half == 0 ? lo[li] : hi[li];
      for (std::size_t k = 0; k < n; ++k) {
        std::fill(sub.begin(), sub.end(), cdouble(0.0));
        for (std::size_t l = 0; l < n; ++l) {
          const double c = L[k][l];
          const cdouble* src = &Gm[(p * n + l) * nm];
          for (int m = 0; m < nm; ++m) sub[static_cast<std::size_t>(m)] += c * src[m];
        }
        accumulate(s0 + (s1 - s0) * gl.x[k], (s1 - s0) * gl.w[k], sub.data(), half == 0);
      }
    }
    for (int k = 0; k < M; ++k) {
      cdouble acc = 0.0;
      for (int m = mlo; m <= mhi; ++m) acc += C[static_cast<std::size_t>(m - mlo)] * std::polar(1.0, (m - 1) * g.theta(k));
      out[i * M + k] = acc;
    }
  });
  return out;
}

/// Complex line t -> t * l through the origin of a cone, |l| = 1, with a
/// tangent frame of the cone along it.
struct ConeLine {
  CVec l;
  CMat frame;
  double w = 1.0;  // link weight
};

inline std::vector<ConeLine> cone_lines(const WeightedVariety& V, const MeasureResolution& res) {
  std::vector<ConeLine> out;
  for (const auto& nd : link_nodes(V, res)) out.push_back({nd.zdot, nd.frame, nd.w});
  return out;
}

/// Hermitian matrix K with |a|_Sigma^2 = a^H K a for (0,1)-covectors a at
/// points with tangent frame J, by polarisation of the induced norm.
inline CMat covector_gram(const CMat& J) {
  const Eigen::Index n = J.rows();
  auto Q = [&](const CVec& a) {
    Covector c;
    for (Eigen::Index j = 0; j < n; ++j)
      if (a(j) != 0.0) c[MultiIndex{static_cast<int>(j)}] = a(j);
    const double v = pointwise_norm(c, J);
    return v * v;
  };
  CMat K(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    CVec e = CVec::Zero(n);
    e(j) = 1.0;
    K(j, j) = Q(e);
  }
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index k = j + 1; k < n; ++k) {
      CVec a = CVec::Zero(n), b = CVec::Zero(n);
      a(j) = 1.0;
      a(k) = 1.0;
      b(j) = 1.0;
      b(k) = cdouble(0.0, 1.0);
      const double re = 0.5 * (Q(a) - K(j, j).real() - K(k, k).real());
      const double im = -0.5 * (Q(b) - K(j, j).real() - K(k, k).real());
      K(j, k) = cdouble(re, im);
      K(k, j) = std::conj(K(j, k));
    }
  return K;
}

/// Values of a (0,1)-form on the line t l at every grid node: the
/// coefficient vectors, ring-major, n per node.
inline std::vector<cdouble> line_coefficients(const AntiForm& omega, const CVec& l, const PolarGrid& g) {
  if (omega.degree() != 1) fail(Errc::InvalidArgument, "line solutions are implemented for q = 1");
  const std::size_t n = static_cast<std::size_t>(omega.n());
  std::vector<cdouble> out(g.size() * n, 0.0);
  for (std::size_t i = 0; i < g.rings(); ++i)
    for (int k = 0; k < g.M; ++k) {
      const CVec z = g.node(i, k) * l;
      for (const auto& [J, f] : omega.coefficients()) out[(i * g.M + k) * n + J[0]] = f(z);
    }
  return out;
}

/// S omega restricted to the line t l of a cone for q = 1:
/// S omega(t l) = t^(-sigma) I[G](t) with G(w) = sum_j conj(l_j) f_j(w l) w^sigma.
inline std::vector<cdouble> line_solution(const std::vector<cdouble>& coeffs, const CVec& l, int sigma,
                                          const PolarGrid& g) {
  const std::size_t n = static_cast<std::size_t>(l.size());
  if (coeffs.size() != g.size() * n) fail(Errc::InvalidArgument, "coefficient table has the wrong size");
  std::vector<cdouble> G(g.size());
  for (std::size_t i = 0; i < g.rings(); ++i)
    for (int k = 0; k < g.M; ++k) {
      const std::size_t at = i * g.M + k;
      cdouble acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += std::conj(l(static_cast<Eigen::Index>(j))) * coeffs[at * n + j];
      G[at] = acc * std::pow(g.node(i, k), sigma);
    }
  std::vector<cdouble> I = polar_cauchy(g, G);
  for (std::size_t i = 0; i < g.rings(); ++i)
    for (int k = 0; k < g.M; ++k) I[i * g.M + k] *= std::pow(g.node(i, k), -sigma);
  return I;
}

inline std::vector<cdouble> line_solution(const AntiForm& omega, const CVec& l, int sigma, const PolarGrid& g) {
  return line_solution(line_coefficients(omega, l, g), l, sigma, g);
}

/// ||S omega||_p and ||omega||_p on Sigma cap B_R of a cone, integrated line by
/// line with the projective split.
struct ConeNorms {
  double solution = 0.0;
  double form = 0.0;
  double ratio() const { return solution / form; }
};

struct NormSpec {
  double p = 2.0;
  int sigma = 0;
};

/// One pass over the lines for several (p, sigma) pairs; the form is
/// evaluated once per node.
inline std::vector<ConeNorms> cone_lp_norms(const AntiForm& omega, const WeightedVariety& V,
                                            const std::vector<NormSpec>& specs, double R,
                                            const MeasureResolution& link_res, const PolarGrid& g) {
  for (const auto& sp : specs)
    if (!(sp.p >= 1.0)) fail(Errc::InvalidArgument, "p must be >= 1");
  if (std::abs(g.R - R) > 1e-15 * R) fail(Errc::InvalidArgument, "grid radius must equal the ball radius");
  if (omega.support_radius() > R * (1.0 + 1e-12)) fail(Errc::SupportOverflow, "form support exceeds the ball");
  const int d = V.dim();
  const std::size_t n = static_cast<std::size_t>(V.n());
  const std::size_t ns = specs.size();
  const auto lines = cone_lines(V, link_res);
  std::vector<double> sol(lines.size() * ns), frm(lines.size() * ns);
  parallel_for(lines.size(), [&](std::size_t a) {
    const auto& L = lines[a];
    const CMat K = covector_gram(L.frame);
    const std::vector<cdouble> coeffs = line_coefficients(omega, L.l, g);
    std::vector<double> fv(g.size());
    for (std::size_t at = 0; at < g.size(); ++at) {
      const Eigen::Map<const CVec> c(coeffs.data() + at * n, static_cast<Eigen::Index>(n));
      fv[at] = std::sqrt(std::max(0.0, c.dot(K * c).real()));
    }
    for (std::size_t k = 0; k < ns; ++k) {
      const double p = specs[k].p;
      const std::vector<cdouble> S = line_solution(coeffs, L.l, specs[k].sigma, g);
      double s = 0.0, f = 0.0;
      for (std::size_t i = 0; i < g.rings(); ++i) {
        const double jac = std::pow(g.r[i], 2 * d - 2) * g.area_weight(i);
        for (int j = 0; j < g.M; ++j) {
          const std::size_t at = i * g.M + j;
          const double sv = std::abs(S[at]);
          if (std::isinf(p)) {
            s = std::max(s, sv);
            f = std::max(f, fv[at]);
          } else {
            s += jac * std::pow(sv, p);
            f += jac * std::pow(fv[at], p);
          }
        }
      }
      sol[a * ns + k] = s;
      frm[a * ns + k] = f;
    }
  });
  std::vector<ConeNorms> out(ns);
  for (std::size_t k = 0; k < ns; ++k) {
    const double p = specs[k].p;
    for (std::size_t a = 0; a < lines.size(); ++a) {
      if (std::isinf(p)) {
        out[k].solution = std::max(out[k].solution, sol[a * ns + k]);
        out[k].form = std::max(out[k].form, frm[a * ns + k]);
      } else {
        out[k].solution += lines[a].w * sol[a * ns + k];
        out[k].form += lines[a].w * frm[a * ns + k];
      }
    }
    if (!std::isinf(p)) {
      out[k].solution = std::pow(out[k].solution, 1.0 / p);
      out[k].form = std::pow(out[k].form, 1.0 / p);
    }
  }
  return out;
}

inline ConeNorms cone_lp_norms(const AntiForm& omega, const WeightedVariety& V, int sigma, double p, double R,
                               const MeasureResolution& link_res, const PolarGrid& g) {
  return cone_lp_norms(omega, V, std::vector<NormSpec>{{p, sigma}}, R, link_res, g).front();
}

/// ||T h||_p and ||h||_p on the disc |t| < R for the weighted kernel
/// T h(t) = |t|^-delta int h(w) dw^d(conj w) / (w - t).
inline ConeNorms weighted_cauchy_norms(const std::function<cdouble(cdouble)>& h, double delta, double p,
                                       const PolarGrid& g) {
  if (!(delta >= 0.0 && delta < 1.0)) fail(Errc::DeltaOutOfRange, "weighted kernel needs 0 <= delta < 1");
  std::vector<cdouble> H(g.size());
  for (std::size_t i = 0; i < g.rings(); ++i)
    for (int k = 0; k < g.M; ++k) H[i * g.M + k] = h(g.node(i, k));
  std::vector<cdouble> I = polar_cauchy(g, H);
  ConeNorms out;
  const double dth = 2.0 * kPi / g.M;
  const std::vector<double> ws = std::isinf(p) ? std::vector<double>() : radial_weights(g, 1.0 - p * delta);
  for (std::size_t i = 0; i < g.rings(); ++i) {
    for (int k = 0; k < g.M; ++k) {
      const double iv = 2.0 * kPi * std::abs(I[i * g.M + k]);
      const double hv = std::abs(H[i * g.M + k]);
      if (std::isinf(p)) {
        out.solution = std::max(out.solution, std::pow(g.r[i], -delta) * iv);
        out.form = std::max(out.form, hv);
      } else {
        out.solution += ws[i] * dth * std::pow(iv, p);
        out.form += g.area_weight(i) * std::pow(hv, p);
      }
    }
  }
  if (!std::isinf(p)) {
    out.solution = std::pow(out.solution, 1.0 / p);
    out.form = std::pow(out.form, 1.0 / p);
  }
  return out;
}

}  // namespace dbar
