#pragma once

#include "dbar/core.hpp"

#include <array>
#include <cctype>
#include <memory>
#include <string>
#include <type_traits>
#include <vector>

namespace dbar {

/// Forward-mode Wirtinger jet: value with d/dz_k and d/d(conj z_k) for one
/// seeded coordinate k. Nesting Jet<Jet<cdouble>> gives mixed second order.
template <class S>
struct Jet {
  S v{}, dz{}, dzb{};
};

template <class T> struct jet_depth : std::integral_constant<int, 0> {};
template <class S> struct jet_depth<Jet<S>> : std::integral_constant<int, 1 + jet_depth<S>::value> {};

template <class S> Jet<S> operator+(const Jet<S>& a, const Jet<S>& b) { return {a.v + b.v, a.dz + b.dz, a.dzb + b.dzb}; }
template <class S> Jet<S> operator-(const Jet<S>& a, const Jet<S>& b) { return {a.v - b.v, a.dz - b.dz, a.dzb - b.dzb}; }
template <class S> Jet<S> operator-(const Jet<S>& a) { return {-a.v, -a.dz, -a.dzb}; }
template <class S> Jet<S> operator*(const Jet<S>& a, const Jet<S>& b) {
  return {a.v * b.v, a.dz * b.v + a.v * b.dz, a.dzb * b.v + a.v * b.dzb};
}
template <class S> Jet<S> operator/(const Jet<S>& a, const Jet<S>& b) {
  S inv = S(1.0) / b.v;
  S q = a.v * inv;
  return {q, (a.dz - q * b.dz) * inv, (a.dzb - q * b.dzb) * inv};
}

namespace detail {

template <class T> T constant(cdouble c) {
  if constexpr (std::is_same_v<T, cdouble>) return c;
  else return T{constant<decltype(T::v)>(c), constant<decltype(T::v)>(0.0), constant<decltype(T::v)>(0.0)};
}

template <class T> T conj_of(const T& a) {
  if constexpr (std::is_same_v<T, cdouble>) return std::conj(a);
  else return T{conj_of(a.v), conj_of(a.dzb), conj_of(a.dz)};
}

template <class T> T exp_of(const T& a) {
  if constexpr (std::is_same_v<T, cdouble>) return std::exp(a);
  else {
    auto e = exp_of(a.v);
    return T{e, e * a.dz, e * a.dzb};
  }
}

template <class T> cdouble base_value(const T& a) {
  if constexpr (std::is_same_v<T, cdouble>) return a;
  else return base_value(a.v);
}

/// Second-order real Taylor number used to get f, f', f'' of scalar cutoffs.
struct Taylor2 {
  double f, f1, f2;
};
inline Taylor2 operator+(Taylor2 a, Taylor2 b) { return {a.f + b.f, a.f1 + b.f1, a.f2 + b.f2}; }
inline Taylor2 operator-(Taylor2 a, Taylor2 b) { return {a.f - b.f, a.f1 - b.f1, a.f2 - b.f2}; }
inline Taylor2 operator*(Taylor2 a, Taylor2 b) {
  return {a.f * b.f, a.f1 * b.f + a.f * b.f1, a.f2 * b.f + 2.0 * a.f1 * b.f1 + a.f * b.f2};
}
inline Taylor2 recip(Taylor2 a) {
  double r = 1.0 / a.f;
  return {r, -a.f1 * r * r, (2.0 * a.f1 * a.f1 * r - a.f2) * r * r};
}
inline Taylor2 texp(Taylor2 a) {
  double e = std::exp(a.f);
  return {e, e * a.f1, e * (a.f2 + a.f1 * a.f1)};
}

/// psi(x) = exp(-1/x) for x > 0, else 0.
inline Taylor2 psi(Taylor2 x) {
  if (x.f <= 0.0) return {0.0, 0.0, 0.0};
  Taylor2 r = recip(x);
  return texp(Taylor2{-r.f, -r.f1, -r.f2});
}

/// Smooth step: 1 for t <= a, 0 for t >= b.
inline Taylor2 smooth_step(double t, double a, double b) {
  if (t <= a) return {1.0, 0.0, 0.0};
  if (t >= b) return {0.0, 0.0, 0.0};
  Taylor2 x{t, 1.0, 0.0};
  Taylor2 p = psi(Taylor2{b, 0.0, 0.0} - x);
  Taylor2 m = psi(x - Taylor2{a, 0.0, 0.0});
  return p * recip(p + m);
}

/// Applies a real function given by derivatives d[off], d[off+1], ... at the
/// base value to a real-valued jet.
template <class T> T lift_real(const std::array<double, 3>& d, int off, const T& t) {
  if constexpr (std::is_same_v<T, cdouble>) return cdouble(d[static_cast<std::size_t>(off)], 0.0);
  else {
    using S = decltype(T::v);
    S f = lift_real<S>(d, off, t.v);
    S f1 = lift_real<S>(d, off + 1, t.v);
    return T{f, f1 * t.dz, f1 * t.dzb};
  }
}

}  // namespace detail

/// Parsed coefficient expression over z1..zn and their conjugates.
class CoeffExpr {
 public:
  static constexpr int kMaxDerivativeNesting = 2;

  CoeffExpr() = default;
  CoeffExpr(const std::string& text, int n) : text_(text), n_(n) {
    Parser p{text, n, nodes_};
    root_ = p.parse();
  }

  const std::string& text() const { return text_; }
  int num_vars() const { return n_; }

  cdouble operator()(const cdouble* z) const {
    Seeds s{};
    return eval<cdouble>(root_, z, s);
  }
  cdouble operator()(const CVec& z) const { return (*this)(z.data()); }

  /// d/d(conj z_k) of the expression, by forward differentiation.
  cdouble dbar(int k, const CVec& z) const {
    Seeds s{};
    s[0] = k;
    return eval<Jet<cdouble>>(root_, z.data(), s).dzb;
  }
  cdouble dz(int k, const CVec& z) const {
    Seeds s{};
    s[0] = k;
    return eval<Jet<cdouble>>(root_, z.data(), s).dz;
  }

 private:
  enum class Op {
    Num, Var, ConjVar, Norm2, Add, Sub, Mul, Div, Neg, Pow,
    Conj, Exp, Abs2, Re, Im, Cutoff, Dbar, Dz,
  };
  struct Node {
    Op op;
    cdouble num{};
    int index = 0;
    int power = 0;
    double r0 = 0.0, r1 = 0.0;
    int a = -1, b = -1;
  };
  using Seeds = std::array<int, kMaxDerivativeNesting>;

  template <class T>
  T var(int m, bool conjugate, const cdouble* z, const Seeds& seeds) const {
    if constexpr (std::is_same_v<T, cdouble>) {
      return conjugate ? std::conj(z[m]) : z[m];
    } else {
      using S = decltype(T::v);
      const int level = jet_depth<T>::value - 1;
      const bool hit = seeds[static_cast<std::size_t>(level)] == m;
      S one = detail::constant<S>(hit ? 1.0 : 0.0);
      S zero = detail::constant<S>(0.0);
      S v = var<S>(m, conjugate, z, seeds);
      return conjugate ? T{v, zero, one} : T{v, one, zero};
    }
  }

  template <class T>
  T eval(int id, const cdouble* z, Seeds& seeds) const {
    const Node& nd = nodes_[static_cast<std::size_t>(id)];
    switch (nd.op) {
      case Op::Num: return detail::constant<T>(nd.num);
      case Op::Var: return var<T>(nd.index, false, z, seeds);
      case Op::ConjVar: return var<T>(nd.index, true, z, seeds);
      case Op::Norm2: {
        T s = detail::constant<T>(0.0);
        for (int m = 0; m < n_; ++m) s = s + var<T>(m, false, z, seeds) * var<T>(m, true, z, seeds);
        return s;
      }
      case Op::Add: return eval<T>(nd.a, z, seeds) + eval<T>(nd.b, z, seeds);
      case Op::Sub: return eval<T>(nd.a, z, seeds) - eval<T>(nd.b, z, seeds);
      case Op::Mul: return eval<T>(nd.a, z, seeds) * eval<T>(nd.b, z, seeds);
      case Op::Div: return eval<T>(nd.a, z, seeds) / eval<T>(nd.b, z, seeds);
      case Op::Neg: return -eval<T>(nd.a, z, seeds);
      case Op::Pow: {
        T base = eval<T>(nd.a, z, seeds);
        int e = nd.power;
        bool invert = e < 0;
        if (invert) e = -e;
        T r = detail::constant<T>(1.0);
        while (e) {
          if (e & 1) r = r * base;
          base = base * base;
          e >>= 1;
        }
        return invert ? detail::constant<T>(1.0) / r : r;
      }
      case Op::Conj: return detail::conj_of(eval<T>(nd.a, z, seeds));
      case Op::Exp: return detail::exp_of(eval<T>(nd.a, z, seeds));
      case Op::Abs2: {
        T v = eval<T>(nd.a, z, seeds);
        return v * detail::conj_of(v);
      }
      case Op::Re: {
        T v = eval<T>(nd.a, z, seeds);
        return (v + detail::conj_of(v)) * detail::constant<T>(0.5);
      }
      case Op::Im: {
        T v = eval<T>(nd.a, z, seeds);
        return (v - detail::conj_of(v)) * detail::constant<T>(cdouble(0.0, -0.5));
      }
      case Op::Cutoff: {
        T v = eval<T>(nd.a, z, seeds);
        T t = (v + detail::conj_of(v)) * detail::constant<T>(0.5);
        detail::Taylor2 c = detail::smooth_step(detail::base_value(t).real(), nd.r0 * nd.r0, nd.r1 * nd.r1);
        return detail::lift_real<T>({c.f, c.f1, c.f2}, 0, t);
      }
      case Op::Dbar:
      case Op::Dz: {
        if constexpr (jet_depth<T>::value >= kMaxDerivativeNesting) {
          fail(Errc::InvalidArgument, "derivative nesting too deep");
        } else {
          const std::size_t level = static_cast<std::size_t>(jet_depth<T>::value);
          int saved = seeds[level];
          seeds[level] = nd.index;
          Jet<T> j = eval<Jet<T>>(nd.a, z, seeds);
          seeds[level] = saved;
          return nd.op == Op::Dbar ? j.dzb : j.dz;
        }
      }
    }
    fail(Errc::InvalidArgument, "corrupt expression node");
  }

  struct Parser {
    const std::string& s;
    int n;
    std::vector<Node>& nodes;
    std::size_t pos = 0;
    int depth = 0;

    [[noreturn]] void error(const std::string& msg) const {
      fail(Errc::ParseError, msg + " at offset " + std::to_string(pos) + " in '" + s + "'");
    }
    void skip() {
      while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool accept(char c) {
      skip();
      if (pos < s.size() && s[pos] == c) {
        ++pos;
        return true;
      }
      return false;
    }
    void expect(char c) {
      if (!accept(c)) error(std::string("expected '") + c + "'");
    }
    int add(Node nd) {
      nodes.push_back(nd);
      return static_cast<int>(nodes.size()) - 1;
    }

    int parse() {
      int r = expr();
      skip();
      if (pos != s.size()) error("unexpected trailing input");
      return r;
    }
    int expr() {
      int l = term();
      for (;;) {
        if (accept('+')) l = add(Node{Op::Add, {}, 0, 0, 0, 0, l, term()});
        else if (accept('-')) l = add(Node{Op::Sub, {}, 0, 0, 0, 0, l, term()});
        else return l;
      }
    }
    int term() {
      int l = unary();
      for (;;) {
        if (accept('*')) l = add(Node{Op::Mul, {}, 0, 0, 0, 0, l, unary()});
        else if (accept('/')) l = add(Node{Op::Div, {}, 0, 0, 0, 0, l, unary()});
        else return l;
      }
    }
    int unary() {
      if (accept('-')) return add(Node{Op::Neg, {}, 0, 0, 0, 0, unary(), -1});
      if (accept('+')) return unary();
      return power();
    }
    int power() {
      int base = primary();
      if (accept('^')) {
        skip();
        bool neg = accept('-');
        skip();
        double e = number();
        if (e != std::floor(e) || std::abs(e) > 64) error("exponent must be an integer of modest size");
        return add(Node{Op::Pow, {}, 0, static_cast<int>(neg ? -e : e), 0, 0, base, -1});
      }
      return base;
    }
    double number() {
      skip();
      std::size_t start = pos;
      while (pos < s.size() && (std::isdigit(static_cast<unsigned char>(s[pos])) || s[pos] == '.')) ++pos;
      if (pos < s.size() && (s[pos] == 'e' || s[pos] == 'E')) {
        std::size_t save = pos++;
        if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) ++pos;
        if (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
          while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
        } else {
          pos = save;
        }
      }
      if (start == pos) error("expected a number");
      try {
        return std::stod(s.substr(start, pos - start));
      } catch (const std::exception&) {
        error("malformed number");
      }
    }
    double signed_number() {
      bool neg = accept('-');
      double v = number();
      return neg ? -v : v;
    }
    std::string ident() {
      skip();
      std::size_t start = pos;
      while (pos < s.size() && std::isalpha(static_cast<unsigned char>(s[pos]))) ++pos;
      return s.substr(start, pos - start);
    }
    int var_index() {
      std::size_t start = pos;
      while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
      if (start == pos) error("variable needs an index");
      int k = std::stoi(s.substr(start, pos - start));
      if (k < 1 || k > n) error("variable index out of range 1.." + std::to_string(n));
      return k - 1;
    }
    int unary_call(Op op) {
      expect('(');
      int a = expr();
      expect(')');
      return add(Node{op, {}, 0, 0, 0, 0, a, -1});
    }
    int primary() {
      skip();
      if (pos >= s.size()) error("unexpected end of input");
      if (accept('(')) {
        int r = expr();
        expect(')');
        return r;
      }
      if (std::isdigit(static_cast<unsigned char>(s[pos])) || s[pos] == '.')
        return add(Node{Op::Num, cdouble(number(), 0.0)});
      std::string id = ident();
      if (id.empty()) error("unexpected character");
      if (id == "i") return add(Node{Op::Num, cdouble(0.0, 1.0)});
      if (id == "pi") return add(Node{Op::Num, cdouble(kPi, 0.0)});
      if (id == "z") return add(Node{Op::Var, {}, var_index()});
      if (id == "zb") return add(Node{Op::ConjVar, {}, var_index()});
      if (id == "norm") {
        if (pos < s.size() && s[pos] == '2') {
          ++pos;
          return add(Node{Op::Norm2});
        }
        error("unknown identifier 'norm'");
      }
      if (id == "conj") return unary_call(Op::Conj);
      if (id == "exp") return unary_call(Op::Exp);
      if (id == "abs") {
        if (pos < s.size() && s[pos] == '2') {
          ++pos;
          return unary_call(Op::Abs2);
        }
        error("unknown identifier 'abs'");
      }
      if (id == "re") return unary_call(Op::Re);
      if (id == "im") return unary_call(Op::Im);
      if (id == "bump" || id == "cutoff") {
        expect('(');
        double r0 = signed_number();
        expect(',');
        double r1 = signed_number();
        int arg;
        if (id == "cutoff") {
          expect(',');
          arg = expr();
        } else {
          arg = add(Node{Op::Norm2});
        }
        expect(')');
        if (!(r0 >= 0.0 && r1 > r0)) error("cutoff radii must satisfy 0 <= r0 < r1");
        return add(Node{Op::Cutoff, {}, 0, 0, r0, r1, arg, -1});
      }
      if (id == "dbar" || id == "dz") {
        expect('(');
        skip();
        double k = number();
        if (k != std::floor(k) || k < 1 || k > n) error("derivative index out of range");
        expect(',');
        if (++depth > kMaxDerivativeNesting) error("derivatives nested deeper than " + std::to_string(kMaxDerivativeNesting));
        int arg = expr();
        --depth;
        expect(')');
        return add(Node{id == "dbar" ? Op::Dbar : Op::Dz, {}, static_cast<int>(k) - 1, 0, 0, 0, arg, -1});
      }
      error("unknown identifier '" + id + "'");
    }
  };

  std::string text_;
  int n_ = 0;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace dbar
