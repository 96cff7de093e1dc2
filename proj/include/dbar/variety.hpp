#pragma once

#include "dbar/core.hpp"
#include "dbar/polynomial.hpp"

#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace dbar {

/// Positive integer weights of the scaling action s^beta * z.
class WeightVector {
 public:
  WeightVector() = default;
  explicit WeightVector(std::vector<int> beta) : beta_(std::move(beta)) {
    if (beta_.size() < 2) fail(Errc::InvalidArgument, "weight vector needs n >= 2 entries");
    for (int b : beta_)
      if (b < 1) fail(Errc::InvalidArgument, "weights must satisfy beta_k >= 1");
  }
  WeightVector(std::initializer_list<int> beta) : WeightVector(std::vector<int>(beta)) {}

  int n() const { return static_cast<int>(beta_.size()); }
  int operator[](int k) const { return beta_[static_cast<std::size_t>(k)]; }
  const std::vector<int>& values() const { return beta_; }
  int min() const { return *std::min_element(beta_.begin(), beta_.end()); }
  bool all_ones() const {
    return std::all_of(beta_.begin(), beta_.end(), [](int b) { return b == 1; });
  }
  static WeightVector ones(int n) { return WeightVector(std::vector<int>(static_cast<std::size_t>(n), 1)); }

 private:
  std::vector<int> beta_;
};

/// s^beta * z, componentwise s^{beta_k} z_k.
inline CVec scale_action(cdouble s, const CVec& z, const WeightVector& beta) {
  CVec out(z.size());
  for (Eigen::Index k = 0; k < z.size(); ++k) out(k) = ipow(s, beta[static_cast<int>(k)]) * z(k);
  return out;
}

/// Returns the weighted degree d of Q, i.e. sum a_k beta_k for every term.
/// Also spot-checks Q(s^beta * z) = s^d Q(z) at seeded random samples.
inline int check_weighted_homogeneous(const Polynomial& Q, const WeightVector& beta) {
  if (Q.num_vars() != beta.n()) fail(Errc::InvalidArgument, "polynomial/weight dimension mismatch");
  std::optional<int> degree;
  for (const auto& t : Q.terms()) {
    if (t.coeff == 0.0) continue;
    int d = 0;
    for (int k = 0; k < beta.n(); ++k) d += t.exps[static_cast<std::size_t>(k)] * beta[k];
    if (!degree) {
      degree = d;
    } else if (*degree != d) {
      fail(Errc::MixedDegree, "terms of weighted degree " + std::to_string(*degree) + " and " + std::to_string(d));
    }
  }
  if (!degree) fail(Errc::ZeroPolynomial, "polynomial has no nonzero terms");
  if (*degree < 1) fail(Errc::MixedDegree, "weighted degree must be >= 1");

  std::mt19937_64 rng(0x5eedULL);
  std::normal_distribution<double> nd(0.0, 1.0);
  for (int trial = 0; trial < 8; ++trial) {
    CVec z(beta.n());
    for (int k = 0; k < beta.n(); ++k) z(k) = cdouble(nd(rng), nd(rng)) * 0.7;
    cdouble s(nd(rng) * 0.8, nd(rng) * 0.8);
    cdouble lhs = Q(scale_action(s, z, beta));
    cdouble rhs = ipow(s, *degree) * Q(z);
    double scale = 1.0 + std::abs(lhs) + std::abs(rhs);
    if (std::abs(lhs - rhs) > 1e-10 * scale)
      fail(Errc::MixedDegree, "numeric homogeneity check failed");
  }
  return *degree;
}

/// Weighted homogeneous polynomial together with its weighted degree.
struct WPolynomial {
  Polynomial poly;
  int degree = 0;

  static WPolynomial make(Polynomial p, const WeightVector& beta) {
    int d = check_weighted_homogeneous(p, beta);
    return WPolynomial{std::move(p), d};
  }
};

/// Polynomial map w in C^m -> C^n onto the variety, generically
/// covering_degree-to-one. Used to sample and integrate over the variety.
struct Parametrization {
  int dim = 0;
  std::vector<Polynomial> components;
  int covering_degree = 1;

  CVec map(const CVec& w) const {
    CVec z(static_cast<Eigen::Index>(components.size()));
    for (std::size_t k = 0; k < components.size(); ++k) z(static_cast<Eigen::Index>(k)) = components[k](w);
    return z;
  }

  CMat jacobian(const CVec& w) const {
    CMat J(static_cast<Eigen::Index>(components.size()), dim);
    for (std::size_t k = 0; k < components.size(); ++k)
      J.row(static_cast<Eigen::Index>(k)) = components[k].gradient(w).transpose();
    return J;
  }

  /// Common total degree of all terms, or -1 when the map is not homogeneous.
  int homogeneous_degree() const {
    int deg = -1;
    for (const auto& c : components)
      for (const auto& t : c.terms()) {
        if (t.coeff == 0.0) continue;
        int d = std::accumulate(t.exps.begin(), t.exps.end(), 0);
        if (deg < 0) deg = d;
        else if (deg != d) return -1;
      }
    return deg;
  }

  /// Bound on |w_i| over the preimage of the ball B_R: some component must be
  /// a single monomial c * w_i^e in that parameter alone.
  double parameter_radius(int i, double R) const {
    double best = -1.0;
    for (const auto& c : components) {
      if (c.terms().size() != 1) continue;
      const auto& t = c.terms().front();
      bool pure = t.exps[static_cast<std::size_t>(i)] > 0;
      for (int k = 0; k < dim && pure; ++k)
        if (k != i && t.exps[static_cast<std::size_t>(k)] != 0) pure = false;
      if (!pure || t.coeff == 0.0) continue;
      double r = std::pow(R / std::abs(t.coeff), 1.0 / t.exps[static_cast<std::size_t>(i)]);
      best = (best < 0.0) ? r : std::min(best, r);
    }
    if (best < 0.0) fail(Errc::AtlasIncomplete, "parametrization gives no radius bound for parameter " + std::to_string(i));
    return best;
  }
};

class WeightedVariety {
 public:
  WeightedVariety() = default;
  WeightedVariety(std::string name, WeightVector beta, std::vector<Polynomial> generators,
                  std::optional<int> dim = std::nullopt)
      : name_(std::move(name)), beta_(std::move(beta)), dim_(dim) {
    if (generators.empty()) fail(Errc::InvalidArgument, "variety needs at least one generator");
    for (auto& g : generators) {
      if (g.num_vars() != beta_.n()) fail(Errc::InvalidArgument, "generator dimension mismatch");
      gens_.push_back(WPolynomial::make(std::move(g), beta_));
    }
    if (dim_ && (*dim_ < 1 || *dim_ >= beta_.n()))
      fail(Errc::InvalidArgument, "dimension hint must satisfy 1 <= d < n");
  }

  const std::string& name() const { return name_; }
  int n() const { return beta_.n(); }
  const WeightVector& weights() const { return beta_; }
  const std::vector<WPolynomial>& generators() const { return gens_; }
  std::optional<int> dim_hint() const { return dim_; }
  int dim() const {
    if (!dim_) fail(Errc::DimensionUnknown, "variety '" + name_ + "' has no dimension hint");
    return *dim_;
  }
  bool is_cone() const { return beta_.all_ones(); }

  const std::optional<Parametrization>& parametrization() const { return param_; }
  void set_parametrization(Parametrization p) {
    if (static_cast<int>(p.components.size()) != n())
      fail(Errc::InvalidArgument, "parametrization has wrong number of components");
    param_ = std::move(p);
  }

  /// Generator Jacobian dQ_k/dz_j.
  CMat jacobian(const CVec& z) const {
    CMat J(static_cast<Eigen::Index>(gens_.size()), n());
    for (std::size_t k = 0; k < gens_.size(); ++k)
      J.row(static_cast<Eigen::Index>(k)) = gens_[k].poly.gradient(z).transpose();
    return J;
  }

 private:
  std::string name_;
  WeightVector beta_;
  std::vector<WPolynomial> gens_;
  std::optional<int> dim_;
  std::optional<Parametrization> param_;
};

/// |Q_k(z)| <= tol * (1 + |z|^{d_k / min beta}) for every generator.
inline bool membership(const WeightedVariety& V, const CVec& z, double tol) {
  if (!(tol > 0.0)) fail(Errc::InvalidArgument, "membership tolerance must be positive");
  const double nz = z.norm();
  const double bmin = V.weights().min();
  for (const auto& g : V.generators()) {
    double bound = tol * (1.0 + std::pow(nz, g.degree / bmin));
    if (std::abs(g.poly(z)) > bound) return false;
  }
  return true;
}

inline constexpr double kRankThreshold = 1e-8;

inline int numeric_rank(const CMat& A, double rel = kRankThreshold) {
  if (A.size() == 0) return 0;
  Eigen::JacobiSVD<CMat> svd(A);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > rel * sv(0)) ++r;
  return r;
}

/// Regular iff the generator Jacobian has rank n - d.
inline bool is_regular_point(const WeightedVariety& V, const CVec& z) {
  const int d = V.dim();
  return numeric_rank(V.jacobian(z)) == V.n() - d;
}

/// Coordinate of largest modulus; the slice and charts are built on it.
inline int designated_coordinate(const CVec& xi) {
  Eigen::Index best = 0;
  xi.cwiseAbs().maxCoeff(&best);
  if (std::abs(xi(best)) == 0.0) fail(Errc::ZeroCoordinate, "every coordinate of the base point vanishes");
  return static_cast<int>(best);
}

/// Y = { y in C^{n-1} : Q_k(xi_c, y) = 0 } with coordinate c removed.
struct SliceVariety {
  int designated = 0;
  cdouble value;
  std::vector<Polynomial> generators;

  /// Full n-vector (value at position c, y elsewhere).
  CVec embed(const CVec& y) const {
    CVec z(y.size() + 1);
    for (Eigen::Index k = 0, j = 0; k < z.size(); ++k) z(k) = (k == designated) ? value : y(j++);
    return z;
  }
};

inline SliceVariety slice_variety(const WeightedVariety& V, const CVec& xi, int designated = -1) {
  int c = designated >= 0 ? designated : designated_coordinate(xi);
  if (std::abs(xi(c)) == 0.0) fail(Errc::ZeroCoordinate, "designated coordinate of base point is zero");
  SliceVariety Y{c, xi(c), {}};
  for (const auto& g : V.generators()) Y.generators.push_back(g.poly.substitute(c, xi(c)));
  return Y;
}

/// eta(s, y) = (s / xi_c)^beta * (xi_c, y), the map that spreads the slice
/// along the scaling orbits.
inline CVec slice_spread(const SliceVariety& Y, const WeightVector& beta, cdouble s, const CVec& y) {
  return scale_action(s / Y.value, Y.embed(y), beta);
}

/// Solution of the slice system near the chart center together with its
/// derivative in the chart parameters.
struct SlicePoint {
  CVec x;   // chart parameters (size d-1)
  CVec y;   // full n-vector: (xi_c, pi(x)) in original coordinate order
  CMat dy;  // n x (d-1), d y / d x
};

struct ChartOptions {
  int designated = -1;               // -1: largest modulus coordinate
  std::vector<int> dependent;        // empty: chosen by largest Jacobian minor
  double radius = 0.25;              // initial half-width of the parameter box
  int max_shrink = 16;
};

/// Generalised cone chart Pi(s, x) = s^beta * (xi_c, pi(x)) around a regular
/// point xi, with pi a Newton-corrected graph over d-1 slice coordinates.
class Chart {
 public:
  Chart(const WeightedVariety& V, const CVec& xi, const ChartOptions& opt = {}) : V_(V), xi_(xi) {
    if (xi.size() != V.n()) fail(Errc::InvalidArgument, "base point has wrong dimension");
    d_ = V.dim();
    const int n = V.n();
    c_ = opt.designated >= 0 ? opt.designated : designated_coordinate(xi);
    if (std::abs(xi(c_)) == 0.0) fail(Errc::ZeroCoordinate, "designated coordinate of base point is zero");
    if (!is_regular_point(V, xi)) fail(Errc::SingularSlice, "base point is not a regular point");

    std::vector<int> others;
    for (int k = 0; k < n; ++k)
      if (k != c_) others.push_back(k);
    const int ndep = n - d_;
    CMat J = V.jacobian(xi);

    if (!opt.dependent.empty()) {
      dep_ = opt.dependent;
      if (static_cast<int>(dep_.size()) != ndep) fail(Errc::InvalidArgument, "wrong number of dependent coordinates");
    } else {
      // pick the (n-d)-subset of slice columns with the largest Gram volume
      double best = -1.0;
      std::vector<int> choice(static_cast<std::size_t>(ndep));
      std::vector<bool> mask(others.size(), false);
      std::fill(mask.begin(), mask.begin() + ndep, true);
      do {
        std::vector<int> cand;
        for (std::size_t i = 0; i < others.size(); ++i)
          if (mask[i]) cand.push_back(others[i]);
        CMat JD = columns(J, cand);
        double vol = ndep == 0 ? 1.0 : std::sqrt(std::abs((JD.adjoint() * JD).determinant()));
        if (vol > best) {
          best = vol;
          choice = cand;
        }
      } while (std::prev_permutation(mask.begin(), mask.end()));
      const double jn = std::max(J.norm(), 1e-300);
      if (ndep > 0 && best <= 1e-10 * std::pow(jn, ndep))
        fail(Errc::SingularSlice, "slice Jacobian has no well-conditioned minor at the base point");
      dep_ = choice;
    }
    for (int k : others)
      if (std::find(dep_.begin(), dep_.end(), k) == dep_.end()) free_.push_back(k);

    zeta_ = CVec(static_cast<Eigen::Index>(free_.size()));
    for (std::size_t i = 0; i < free_.size(); ++i) zeta_(static_cast<Eigen::Index>(i)) = xi(free_[i]);

    radius_ = opt.radius * std::max(1.0, zeta_.size() ? zeta_.cwiseAbs().maxCoeff() : 1.0);
    for (int attempt = 0;; ++attempt) {
      if (box_is_valid()) break;
      if (attempt >= opt.max_shrink) fail(Errc::NewtonDivergence, "chart could not be built even after shrinking");
      radius_ *= 0.5;
    }
  }

  const WeightedVariety& variety() const { return V_; }
  int dim() const { return d_; }
  int designated() const { return c_; }
  const std::vector<int>& free_coordinates() const { return free_; }
  const std::vector<int>& dependent_coordinates() const { return dep_; }
  const CVec& center() const { return xi_; }
  const CVec& base_parameter() const { return zeta_; }
  double radius() const { return radius_; }

  bool in_domain(const CVec& x) const {
    for (Eigen::Index i = 0; i < x.size(); ++i)
      if (std::abs(x(i) - zeta_(i)) > radius_ * (1.0 + 1e-12)) return false;
    return true;
  }

  /// Newton-corrects the dependent coordinates so that (xi_c, y) lies on the slice.
  SlicePoint slice_point(const CVec& x) const {
    if (x.size() != zeta_.size()) fail(Errc::InvalidArgument, "chart parameter has wrong dimension");
    const int n = V_.n();
    CVec y = xi_;
    for (std::size_t i = 0; i < free_.size(); ++i) y(free_[i]) = x(static_cast<Eigen::Index>(i));
    if (!dep_.empty()) {
      // first-order predictor from the center
      CMat J0 = V_.jacobian(xi_);
      CMat JD0 = columns(J0, dep_);
      CMat JF0 = columns(J0, free_);
      if (!free_.empty()) {
        CVec dyd = -JD0.completeOrthogonalDecomposition().solve(JF0 * (x - zeta_));
        for (std::size_t i = 0; i < dep_.size(); ++i) y(dep_[i]) += dyd(static_cast<Eigen::Index>(i));
      }
      newton(y);
    }
    SlicePoint sp;
    sp.x = x;
    sp.y = y;
    sp.dy = CMat::Zero(n, static_cast<Eigen::Index>(free_.size()));
    for (std::size_t i = 0; i < free_.size(); ++i) sp.dy(free_[i], static_cast<Eigen::Index>(i)) = 1.0;
    if (!dep_.empty() && !free_.empty()) {
      CMat J = V_.jacobian(y);
      CMat dd = -columns(J, dep_).completeOrthogonalDecomposition().solve(columns(J, free_));
      for (std::size_t i = 0; i < dep_.size(); ++i) sp.dy.row(dep_[i]) = dd.row(static_cast<Eigen::Index>(i));
    }
    return sp;
  }

  CVec map(cdouble s, const SlicePoint& sp) const { return scale_action(s, sp.y, V_.weights()); }
  CVec map(cdouble s, const CVec& x) const { return map(s, slice_point(x)); }

  /// Holomorphic Jacobian of Pi, n x d: column 0 is d/ds, then d/dx_i.
  CMat jacobian(cdouble s, const SlicePoint& sp) const {
    const int n = V_.n();
    const auto& beta = V_.weights();
    CMat J(n, d_);
    for (int k = 0; k < n; ++k) {
      J(k, 0) = static_cast<double>(beta[k]) * ipow(s, beta[k] - 1) * sp.y(k);
      cdouble sb = ipow(s, beta[k]);
      for (int i = 0; i + 1 < d_; ++i) J(k, i + 1) = sb * sp.dy(k, i);
    }
    return J;
  }
  CMat jacobian(cdouble s, const CVec& x) const { return jacobian(s, slice_point(x)); }

 private:
  static CMat columns(const CMat& A, const std::vector<int>& cols) {
    CMat out(A.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < cols.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = A.col(cols[i]);
    return out;
  }

  void newton(CVec& y) const {
    const auto& gens = V_.generators();
    const double scale = 1.0 + y.norm();
    for (int it = 0; it < 60; ++it) {
      CVec F(static_cast<Eigen::Index>(gens.size()));
      double fscale = 0.0;
      for (std::size_t k = 0; k < gens.size(); ++k) {
        F(static_cast<Eigen::Index>(k)) = gens[k].poly(y);
        fscale = std::max(fscale, std::pow(scale, gens[k].degree));
      }
      CMat JD = columns(V_.jacobian(y), dep_);
      CVec step = -JD.completeOrthogonalDecomposition().solve(F);
      if (!step.allFinite()) fail(Errc::NewtonDivergence, "non-finite Newton step");
      for (std::size_t i = 0; i < dep_.size(); ++i) y(dep_[i]) += step(static_cast<Eigen::Index>(i));
      if (step.norm() > 10.0 * scale) fail(Errc::NewtonDivergence, "Newton step left the chart neighbourhood");
      if (step.norm() <= 1e-15 * scale && F.norm() <= 1e-12 * fscale) return;
      if (step.norm() <= 1e-14 * scale) return;
    }
    fail(Errc::NewtonDivergence, "Newton corrector did not converge");
  }

  bool box_is_valid() const {
    const Eigen::Index m = zeta_.size();
    if (m == 0) return true;
    try {
      double dmax = 0.0, dmin = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < m; ++i)
        for (int a = 0; a < 8; ++a) {
          CVec x = zeta_;
          x(i) += radius_ * std::polar(1.0, a * kPi / 4.0);
          SlicePoint sp = slice_point(x);
          for (const auto& g : V_.generators())
            if (std::abs(g.poly(sp.y)) > 1e-9 * std::pow(1.0 + sp.y.norm(), g.degree)) return false;
          // the cone density factor Theta must stay away from zero on the box
          CMat J = jacobian(1.0, sp);
          double dens = std::abs((J.adjoint() * J).determinant());
          dmax = std::max(dmax, dens);
          dmin = std::min(dmin, dens);
        }
      return dmin >= 1e-6 * dmax;
    } catch (const Error& e) {
      if (e.code() == Errc::NewtonDivergence) return false;
      throw;
    }
  }

  WeightedVariety V_;
  CVec xi_;
  int d_ = 0;
  int c_ = 0;
  std::vector<int> dep_, free_;
  CVec zeta_;
  double radius_ = 0.0;
};

inline Chart cone_chart(const WeightedVariety& V, const CVec& xi, const ChartOptions& opt = {}) {
  return Chart(V, xi, opt);
}

/// Density of Pi^* dV against Lebesgue measure on C x U: det(J^H J).
inline double gram_density(const CMat& J) {
  CMat G = J.adjoint() * J;
  Eigen::SelfAdjointEigenSolver<CMat> es(G);
  const auto& ev = es.eigenvalues();
  if (ev.size() && ev(0) <= 1e-13 * std::max(ev(ev.size() - 1), 1e-300))
    fail(Errc::RankDeficient, "Gram matrix of the chart differential is singular");
  return std::abs(G.determinant());
}

inline double chart_volume_density(const Chart& C, cdouble s, const CVec& x) {
  if (s == 0.0) fail(Errc::InvalidArgument, "chart density requires s != 0");
  return gram_density(C.jacobian(s, x));
}

}  // namespace dbar
