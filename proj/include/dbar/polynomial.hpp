#pragma once

#include "dbar/core.hpp"

#include <vector>

namespace dbar {

struct Monomial {
  std::vector<int> exps;
  cdouble coeff;
};

/// Sparse holomorphic polynomial in n complex variables.
class Polynomial {
 public:
  Polynomial() = default;
  Polynomial(int n, std::vector<Monomial> terms) : n_(n), terms_(std::move(terms)) {
    for (const auto& t : terms_) {
      if (static_cast<int>(t.exps.size()) != n_)
        fail(Errc::InvalidArgument, "monomial exponent list has wrong length");
      for (int e : t.exps)
        if (e < 0) fail(Errc::InvalidArgument, "negative exponent");
    }
    max_exp_ = 0;
    for (const auto& t : terms_)
      for (int e : t.exps) max_exp_ = std::max(max_exp_, e);
  }

  int num_vars() const { return n_; }
  const std::vector<Monomial>& terms() const { return terms_; }
  bool is_zero() const {
    for (const auto& t : terms_)
      if (t.coeff != 0.0) return false;
    return true;
  }

  template <class Vec>
  cdouble operator()(const Vec& z) const {
    std::vector<cdouble> pw = powers(z);
    cdouble s = 0.0;
    const int stride = max_exp_ + 1;
    for (const auto& t : terms_) {
      cdouble m = t.coeff;
      for (int k = 0; k < n_; ++k) m *= pw[static_cast<std::size_t>(k * stride + t.exps[k])];
      s += m;
    }
    return s;
  }

  /// Holomorphic gradient (d/dz_k).
  template <class Vec>
  CVec gradient(const Vec& z) const {
    std::vector<cdouble> pw = powers(z);
    const int stride = max_exp_ + 1;
    CVec g = CVec::Zero(n_);
    for (const auto& t : terms_) {
      for (int j = 0; j < n_; ++j) {
        if (t.exps[j] == 0) continue;
        cdouble m = t.coeff * static_cast<double>(t.exps[j]);
        for (int k = 0; k < n_; ++k) {
          int e = (k == j) ? t.exps[k] - 1 : t.exps[k];
          m *= pw[static_cast<std::size_t>(k * stride + e)];
        }
        g(j) += m;
      }
    }
    return g;
  }

  /// Substitutes z_c = value and drops variable c.
  Polynomial substitute(int c, cdouble value) const {
    std::vector<Monomial> out;
    for (const auto& t : terms_) {
      Monomial m;
      m.coeff = t.coeff * ipow(value, t.exps[c]);
      for (int k = 0; k < n_; ++k)
        if (k != c) m.exps.push_back(t.exps[k]);
      out.push_back(std::move(m));
    }
    return Polynomial(n_ - 1, std::move(out));
  }

  /// Q(x_1^{b_1}, ..., x_n^{b_n}).
  Polynomial compose_powers(const std::vector<int>& b) const {
    std::vector<Monomial> out;
    for (const auto& t : terms_) {
      Monomial m{t.exps, t.coeff};
      for (int k = 0; k < n_; ++k) m.exps[k] *= b[static_cast<std::size_t>(k)];
      out.push_back(std::move(m));
    }
    return Polynomial(n_, std::move(out));
  }

 private:
  template <class Vec>
  std::vector<cdouble> powers(const Vec& z) const {
    const int stride = max_exp_ + 1;
    std::vector<cdouble> pw(static_cast<std::size_t>(n_ * stride));
    for (int k = 0; k < n_; ++k) {
      cdouble p = 1.0;
      for (int e = 0; e <= max_exp_; ++e) {
        pw[static_cast<std::size_t>(k * stride + e)] = p;
        p *= z[k];
      }
    }
    return pw;
  }

  int n_ = 0;
  int max_exp_ = 0;
  std::vector<Monomial> terms_;
};

}  // namespace dbar
