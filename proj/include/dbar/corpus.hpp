#pragma once

#include "dbar/forms.hpp"
#include "dbar/variety.hpp"

#include <string>
#include <vector>

namespace dbar {

/// A closed test form dbar(g) or dbar(g d(conj z_1)) with the potential kept.
struct TestForm {
  std::string id;
  std::string potential;   // g, as an expression
  int potential_degree = 0;
  AntiForm form;
};

struct CorpusEntry {
  WeightedVariety variety;
  std::vector<TestForm> forms;
};

namespace detail {

inline Polynomial poly(int n, std::vector<std::pair<std::vector<int>, cdouble>> terms) {
  std::vector<Monomial> ms;
  for (auto& [e, c] : terms) ms.push_back({std::move(e), c});
  return Polynomial(n, std::move(ms));
}

}  // namespace detail

/// dbar(g) for a function g with support in B_R.
inline TestForm exact_form(const std::string& id, int n, double R, const std::string& g) {
  std::map<std::string, std::string> coeffs;
  for (int k = 1; k <= n; ++k) coeffs[std::to_string(k)] = "dbar(" + std::to_string(k) + ", " + g + ")";
  TestForm t{id, g, 0, AntiForm::from_strings(n, 1, R, coeffs)};
  t.form.id = id;
  return t;
}

/// dbar(g d(conj z_1)) = -sum_{k > 1} dg/d(conj z_k) d(conj z)_{1,k}.
inline TestForm exact_form_q2(const std::string& id, int n, double R, const std::string& g) {
  std::map<std::string, std::string> coeffs;
  for (int k = 2; k <= n; ++k) coeffs["1," + std::to_string(k)] = "-dbar(" + std::to_string(k) + ", " + g + ")";
  TestForm t{id, g, 1, AntiForm::from_strings(n, 2, R, coeffs)};
  t.form.id = id;
  return t;
}

inline WeightedVariety line_variety() {
  WeightedVariety V("line", WeightVector{1, 1}, {detail::poly(2, {{{0, 1}, 1.0}})}, 1);
  Parametrization P;
  P.dim = 1;
  P.components = {detail::poly(1, {{{1}, 1.0}}), Polynomial(1, {})};
  V.set_parametrization(P);
  return V;
}

inline WeightedVariety cusp_variety() {
  WeightedVariety V("cusp", WeightVector{3, 2}, {detail::poly(2, {{{2, 0}, 1.0}, {{0, 3}, -1.0}})}, 1);
  Parametrization P;
  P.dim = 1;
  P.components = {detail::poly(1, {{{3}, 1.0}}), detail::poly(1, {{{2}, 1.0}})};
  V.set_parametrization(P);
  return V;
}

inline WeightedVariety cone_variety() {
  WeightedVariety V("cone", WeightVector{1, 1, 1},
                    {detail::poly(3, {{{1, 1, 0}, 1.0}, {{0, 0, 2}, -1.0}})}, 2);
  Parametrization P;
  P.dim = 2;
  P.components = {detail::poly(2, {{{2, 0}, 1.0}}), detail::poly(2, {{{0, 2}, 1.0}}),
                  detail::poly(2, {{{1, 1}, 1.0}})};
  P.covering_degree = 2;
  V.set_parametrization(P);
  return V;
}

/// z^2 = w_1^2 w_2, a member of the z^m = prod w_k^{b_k} family.
inline WeightedVariety fgr_variety() {
  WeightedVariety V("fgr", WeightVector{3, 2, 2},
                    {detail::poly(3, {{{2, 0, 0}, 1.0}, {{0, 2, 1}, -1.0}})}, 2);
  Parametrization P;
  P.dim = 2;
  P.components = {detail::poly(2, {{{1, 1}, 1.0}}), detail::poly(2, {{{0, 1}, 1.0}}),
                  detail::poly(2, {{{2, 0}, 1.0}})};
  V.set_parametrization(P);
  return V;
}

inline std::vector<CorpusEntry> corpus() {
  std::vector<CorpusEntry> out;
  out.push_back({line_variety(),
                 {exact_form("line-bump", 2, 1.0, "bump(0.1, 0.9)"),
                  exact_form("line-poly", 2, 1.0, "bump(0.2, 0.8) * (z1 + 2*zb1^2)"),
                  exact_form("line-offset", 2, 1.2, "cutoff(0.3, 0.9, abs2(z1 - 0.2) + abs2(z2)) * exp(i*re(z1))")}});
  out.push_back({cusp_variety(),
                 {exact_form("cusp-bump", 2, 1.0, "bump(0.2, 0.9)"),
                  exact_form("cusp-mixed", 2, 1.0, "bump(0.1, 0.7) * (z2 + zb1)")}});
  out.push_back({cone_variety(),
                 {exact_form("cone-bump", 3, 1.0, "bump(0.2, 0.9) * (1 + zb3)"),
                  exact_form("cone-mixed", 3, 1.0, "bump(0.3, 0.8) * z1 * zb2"),
                  exact_form_q2("cone-q2", 3, 1.0, "bump(0.2, 0.9) * z3")}});
  out.push_back({fgr_variety(),
                 {exact_form("fgr-bump", 3, 1.2, "bump(0.0, 1.2)"),
                  exact_form("fgr-mixed", 3, 1.2, "bump(0.0, 1.2) * (zb2 + z3)")}});
  return out;
}

}  // namespace dbar
