#pragma once

#include "dbar/core.hpp"
#include "dbar/expr.hpp"
#include "dbar/multi_index.hpp"
#include "dbar/variety.hpp"

#include <memory>
#include <random>
#include <string>

namespace dbar {

/// Tabulated coefficient on a box of C^m, multilinear in the 2m real
/// coordinates (re z_1, im z_1, re z_2, ...). Zero outside the box.
class GridCoefficient {
 public:
  GridCoefficient(CVec lower, double spacing, std::vector<int> counts, std::vector<cdouble> values)
      : lower_(std::move(lower)), h_(spacing), counts_(std::move(counts)), values_(std::move(values)) {
    const std::size_t dims = static_cast<std::size_t>(2 * lower_.size());
    if (counts_.size() != dims) fail(Errc::InvalidArgument, "grid needs one count per real dimension");
    if (!(h_ > 0.0)) fail(Errc::InvalidArgument, "grid spacing must be positive");
    std::size_t total = 1;
    for (int c : counts_) {
      if (c < 2) fail(Errc::InvalidArgument, "grid needs at least two nodes per dimension");
      total *= static_cast<std::size_t>(c);
    }
    if (values_.size() != total) fail(Errc::InvalidArgument, "grid value count mismatch");
  }

  /// Samples f on the grid.
  template <class F>
  static GridCoefficient tabulate(const CVec& lower, double spacing, const std::vector<int>& counts, F&& f) {
    std::size_t total = 1;
    for (int c : counts) total *= static_cast<std::size_t>(c);
    std::vector<cdouble> vals(total);
    const Eigen::Index m = lower.size();
    for (std::size_t flat = 0; flat < total; ++flat) {
      CVec z = lower;
      std::size_t rest = flat;
      for (std::size_t d = 0; d < counts.size(); ++d) {
        int i = static_cast<int>(rest % static_cast<std::size_t>(counts[d]));
        rest /= static_cast<std::size_t>(counts[d]);
        Eigen::Index k = static_cast<Eigen::Index>(d / 2);
        if (k < m) z(k) += (d % 2 == 0) ? cdouble(i * spacing, 0.0) : cdouble(0.0, i * spacing);
      }
      vals[flat] = f(z);
    }
    return GridCoefficient(lower, spacing, counts, std::move(vals));
  }

  cdouble operator()(const CVec& z) const {
    const std::size_t dims = counts_.size();
    std::vector<int> base(dims);
    std::vector<double> frac(dims);
    for (std::size_t d = 0; d < dims; ++d) {
      Eigen::Index k = static_cast<Eigen::Index>(d / 2);
      cdouble off = z(k) - lower_(k);
      double t = ((d % 2 == 0) ? off.real() : off.imag()) / h_;
      if (t < 0.0 || t > counts_[d] - 1) return 0.0;
      int i = std::min(static_cast<int>(std::floor(t)), counts_[d] - 2);
      base[d] = i;
      frac[d] = t - i;
    }
    cdouble acc = 0.0;
    for (std::size_t corner = 0; corner < (std::size_t{1} << dims); ++corner) {
      double w = 1.0;
      std::size_t flat = 0, stride = 1;
      for (std::size_t d = 0; d < dims; ++d) {
        bool up = (corner >> d) & 1U;
        w *= up ? frac[d] : 1.0 - frac[d];
        flat += static_cast<std::size_t>(base[d] + (up ? 1 : 0)) * stride;
        stride *= static_cast<std::size_t>(counts_[d]);
      }
      if (w != 0.0) acc += w * values_[flat];
    }
    return acc;
  }

 private:
  CVec lower_;
  double h_;
  std::vector<int> counts_;
  std::vector<cdouble> values_;
};

/// A scalar coefficient function C^n -> C: an expression, a grid, or a callable.
class Coefficient {
 public:
  using Fn = std::function<cdouble(const CVec&)>;

  Coefficient() = default;
  explicit Coefficient(CoeffExpr e) : expr_(std::make_shared<CoeffExpr>(std::move(e))) {}
  explicit Coefficient(GridCoefficient g) : grid_(std::make_shared<GridCoefficient>(std::move(g))) {}
  explicit Coefficient(Fn f) : fn_(std::move(f)) {}

  cdouble operator()(const CVec& z) const {
    if (expr_) return (*expr_)(z);
    if (grid_) return (*grid_)(z);
    if (fn_) return fn_(z);
    return 0.0;
  }

  const CoeffExpr* expression() const { return expr_.get(); }

 private:
  std::shared_ptr<const CoeffExpr> expr_;
  std::shared_ptr<const GridCoefficient> grid_;
  Fn fn_;
};

/// (0,q)-form sum_J f_J d(conj z)_J on C^n with declared support radius R.
class AntiForm {
 public:
  AntiForm() = default;
  AntiForm(int n, int q, double R) : n_(n), q_(q), R_(R) {
    if (q < 0 || q > n) fail(Errc::InvalidArgument, "form degree must satisfy 0 <= q <= n");
    if (!(R > 0.0)) fail(Errc::InvalidArgument, "support radius must be positive");
  }

  static AntiForm from_strings(int n, int q, double R, const std::map<std::string, std::string>& coeffs) {
    AntiForm w(n, q, R);
    for (const auto& [key, text] : coeffs) w.set(MultiIndex::parse(key), Coefficient(CoeffExpr(text, n)));
    return w;
  }

  void set(const MultiIndex& J, Coefficient f) {
    if (static_cast<int>(J.size()) != q_) fail(Errc::InvalidArgument, "coefficient key has wrong length");
    for (int j : J)
      if (j >= n_) fail(Errc::InvalidArgument, "coefficient key exceeds ambient dimension");
    coeffs_[J] = std::move(f);
  }

  int n() const { return n_; }
  int degree() const { return q_; }
  double support_radius() const { return R_; }
  const std::map<MultiIndex, Coefficient>& coefficients() const { return coeffs_; }
  std::string id;

  Covector operator()(const CVec& z) const {
    Covector out;
    for (const auto& [J, f] : coeffs_) out[J] = f(z);
    return out;
  }

  cdouble coefficient(const MultiIndex& J, const CVec& z) const {
    auto it = coeffs_.find(J);
    return it == coeffs_.end() ? cdouble(0.0) : it->second(z);
  }

  AntiForm scaled(cdouble c) const {
    AntiForm out(n_, q_, R_);
    out.id = id;
    for (const auto& [J, f] : coeffs_) out.set(J, Coefficient([f, c](const CVec& z) { return c * f(z); }));
    return out;
  }

  AntiForm plus(const AntiForm& o) const {
    if (o.n_ != n_ || o.q_ != q_) fail(Errc::InvalidArgument, "cannot add forms of different shape");
    AntiForm out(n_, q_, std::max(R_, o.R_));
    std::map<MultiIndex, std::pair<Coefficient, Coefficient>> parts;
    Coefficient zero([](const CVec&) { return cdouble(0.0); });
    for (const auto& [J, f] : coeffs_) parts.emplace(J, std::make_pair(f, zero));
    for (const auto& [J, f] : o.coeffs_) {
      auto it = parts.find(J);
      if (it == parts.end()) parts.emplace(J, std::make_pair(zero, f));
      else it->second.second = f;
    }
    for (const auto& [J, fg] : parts)
      out.set(J, Coefficient([f = fg.first, g = fg.second](const CVec& z) { return f(z) + g(z); }));
    return out;
  }

  /// Sampled check that every coefficient vanishes outside the ball B_R.
  void audit_support(std::uint64_t seed = 7, int samples = 200) const {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    std::uniform_real_distribution<double> ud(1.0 + 1e-9, 3.0);
    for (int s = 0; s < samples; ++s) {
      CVec z(n_);
      for (int k = 0; k < n_; ++k) z(k) = cdouble(nd(rng), nd(rng));
      z *= R_ * ud(rng) / z.norm();
      for (const auto& [J, f] : coeffs_)
        if (f(z) != 0.0) fail(Errc::SupportOverflow, "coefficient " + J.to_string() + " is nonzero outside radius R");
    }
  }

 private:
  int n_ = 0, q_ = 0;
  double R_ = 1.0;
  std::map<MultiIndex, Coefficient> coeffs_;
};

enum class AlephMode { Weighted, ConeLiteral };

/// Multiplier sum_{j in J} c_j conj(z_j) sign(j, K) d(conj z)_K with K = J \ {j};
/// c_j = beta_j in weighted mode and c_j = q in the literal cone mode.
inline Covector aleph_multiplier(const MultiIndex& J, const CVec& z, const WeightVector& beta,
                                 AlephMode mode = AlephMode::Weighted) {
  if (J.empty()) fail(Errc::InvalidArgument, "aleph multiplier needs |J| >= 1");
  Covector out;
  const double q = static_cast<double>(J.size());
  for (int j : J) {
    MultiIndex K = J.without(j);
    double c = mode == AlephMode::Weighted ? static_cast<double>(beta[j]) : q;
    out[K] += c * std::conj(z(j)) * static_cast<double>(sign_perm(j, K));
  }
  return out;
}

/// Determinant of a small complex matrix; 1 for the empty matrix.
inline cdouble small_det(const CMat& A) {
  if (A.rows() == 0) return 1.0;
  if (A.rows() == 1) return A(0, 0);
  if (A.rows() == 2) return A(0, 0) * A(1, 1) - A(0, 1) * A(1, 0);
  return A.determinant();
}

inline CMat submatrix(const CMat& A, const MultiIndex& rows, const MultiIndex& cols) {
  CMat S(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < cols.size(); ++c)
      S(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = A(rows[r], cols[c]);
  return S;
}

/// Pulls the covector a (keyed by multi-indices in the target) back along a
/// holomorphic map with Jacobian J (target x source):
/// d(conj z)_I maps to sum_A det(conj J[I, A]) d(conj w)_A.
inline Covector pullback_covector(const Covector& a, const CMat& J) {
  const int m = static_cast<int>(J.cols());
  Covector out;
  int q = -1;
  for (const auto& [I, v] : a) {
    q = static_cast<int>(I.size());
    break;
  }
  if (q < 0) return out;
  if (q > m) fail(Errc::DegreeOverflow, "form degree exceeds source dimension");
  for (const auto& A : all_multi_indices(m, q)) {
    cdouble acc = 0.0;
    for (const auto& [I, v] : a) {
      if (v == 0.0) continue;
      acc += v * std::conj(small_det(submatrix(J, I, A)));
    }
    out[A] = acc;
  }
  return out;
}

/// Pullback of a form on Sigma through a chart, as coefficients in the basis
/// d(conj s), d(conj x_1), ... of C x U (index 0 is s).
inline Covector pullback(const AntiForm& omega, const Chart& C, cdouble s, const SlicePoint& sp) {
  if (omega.degree() > C.dim()) fail(Errc::DegreeOverflow, "form degree exceeds variety dimension");
  CVec z = C.map(s, sp);
  if (omega.degree() == 0) return Covector{{MultiIndex{}, omega.coefficient(MultiIndex{}, z)}};
  Covector out = pullback_covector(omega(z), C.jacobian(s, sp));
  if (out.empty())
    for (const auto& A : all_multi_indices(C.dim(), omega.degree())) out[A] = 0.0;
  return out;
}

inline Covector pullback(const AntiForm& omega, const Chart& C, cdouble s, const CVec& x) {
  return pullback(omega, C, s, C.slice_point(x));
}

/// Norm of a covector c given in the coordinates of a parametrised
/// neighbourhood with holomorphic Jacobian J (n x d), measured in the metric
/// induced from C^n: sum conj(c_A) det(G^-1[A, B]) c_B with G = J^H J.
inline double induced_norm(const Covector& c, const CMat& J) {
  if (c.empty()) return 0.0;
  CMat G = J.adjoint() * J;
  Eigen::FullPivLU<CMat> lu(G);
  if (!lu.isInvertible()) fail(Errc::RankDeficient, "tangent frame is rank deficient");
  CMat Ginv = lu.inverse();
  cdouble acc = 0.0;
  for (const auto& [A, ca] : c) {
    if (ca == 0.0) continue;
    for (const auto& [B, cb] : c) {
      if (cb == 0.0) continue;
      acc += std::conj(ca) * small_det(submatrix(Ginv, A, B)) * cb;
    }
  }
  return std::sqrt(std::max(acc.real(), 0.0));
}

/// Norm of the restriction of a covector a on C^n to the complex subspace
/// spanned by the columns of the frame J (n x d).
inline double pointwise_norm(const Covector& a, const CMat& J) { return induced_norm(pullback_covector(a, J), J); }

inline double pointwise_norm(const AntiForm& omega, const Chart& C, cdouble s, const CVec& x) {
  if (s == 0.0) fail(Errc::InvalidArgument, "pointwise norm requires s != 0");
  SlicePoint sp = C.slice_point(x);
  return pointwise_norm(omega(C.map(s, sp)), C.jacobian(s, sp));
}

/// A form on an open subset of C^m given pointwise, as used for chart-level
/// verification.
struct LocalForm {
  int m = 0;
  int q = 0;
  std::function<Covector(const CVec&)> eval;
  std::function<bool(const CVec&)> in_domain;
};

/// Central-difference dbar of a local form at w, of order 4 (default) or 6:
/// (dbar F)_A = sum_{i in A} sign(i, A\i) dF_{A\i}/d(conj w_i).
inline Covector dbar_fd(const LocalForm& F, const CVec& w, double h, int order = 4) {
  if (!(h > 0.0)) fail(Errc::InvalidArgument, "finite-difference step must be positive");
  if (F.q + 1 > F.m) fail(Errc::DegreeOverflow, "dbar of a top-degree form");
  if (order != 4 && order != 6) fail(Errc::InvalidArgument, "finite-difference order must be 4 or 6");
  const int m = F.m;
  static const std::vector<std::pair<double, double>> kFour{{-2.0, 1.0}, {-1.0, -8.0}, {1.0, 8.0}, {2.0, -1.0}};
  static const std::vector<std::pair<double, double>> kSix{{-3.0, -1.0}, {-2.0, 9.0}, {-1.0, -45.0},
                                                           {1.0, 45.0},  {2.0, -9.0}, {3.0, 1.0}};
  const auto& stencil = order == 4 ? kFour : kSix;
  const double denom = order == 4 ? 12.0 : 60.0;
  std::vector<Covector> dre(static_cast<std::size_t>(m)), dim(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    for (int part = 0; part < 2; ++part) {
      Covector acc;
      for (const auto& [off, wt] : stencil) {
        CVec p = w;
        p(i) += part == 0 ? cdouble(off * h, 0.0) : cdouble(0.0, off * h);
        if (F.in_domain && !F.in_domain(p)) fail(Errc::StencilOutOfDomain, "stencil leaves the chart domain");
        for (const auto& [K, v] : F.eval(p)) acc[K] += wt * v;
      }
      for (auto& [K, v] : acc) v /= denom * h;
      (part == 0 ? dre : dim)[static_cast<std::size_t>(i)] = std::move(acc);
    }
  }
  Covector out;
  for (const auto& A : all_multi_indices(m, F.q + 1)) out[A] = 0.0;
  for (int i = 0; i < m; ++i) {
    const auto& a = dre[static_cast<std::size_t>(i)];
    const auto& b = dim[static_cast<std::size_t>(i)];
    for (const auto& [K, va] : a) {
      if (K.contains(i)) continue;
      cdouble vb = b.count(K) ? b.at(K) : cdouble(0.0);
      cdouble d = 0.5 * (va + kI * vb);
      out[K.with(i)] += static_cast<double>(sign_perm(i, K)) * d;
    }
  }
  return out;
}

}  // namespace dbar
