#pragma once

#include "dbar/corpus.hpp"
#include "dbar/forms.hpp"
#include "dbar/variety.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace dbar {

using json = nlohmann::json;

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::ConfigError, "cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    fail(Errc::ConfigError, "'" + path + "' is not valid JSON: " + e.what());
  }
}

inline void write_text_file(const std::string& path, const std::string& text) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Errc::ConfigError, "cannot write '" + path + "'");
  out << text;
}

// ---------------------------------------------------------------------------
// Polynomials and varieties

inline json to_json(const Polynomial& P) {
  json terms = json::array();
  for (const auto& m : P.terms()) terms.push_back({{"exps", m.exps}, {"re", m.coeff.real()}, {"im", m.coeff.imag()}});
  return {{"terms", terms}};
}

inline Polynomial polynomial_from_json(const json& j, int n, const std::string& where) {
  if (!j.contains("terms") || !j["terms"].is_array()) fail(Errc::ConfigError, where + ": polynomial needs a terms array");
  std::vector<Monomial> ms;
  for (const auto& t : j["terms"]) {
    auto exps = t.at("exps").get<std::vector<int>>();
    if (static_cast<int>(exps.size()) != n)
      fail(Errc::ConfigError, where + ": monomial has " + std::to_string(exps.size()) + " exponents, expected " +
                                  std::to_string(n));
    ms.push_back({std::move(exps), cdouble(t.value("re", 0.0), t.value("im", 0.0))});
  }
  return Polynomial(n, std::move(ms));
}

inline json to_json(const WeightedVariety& V) {
  json j{{"name", V.name()}, {"beta", V.weights().values()}};
  if (V.dim_hint()) j["dim"] = *V.dim_hint();
  json gens = json::array();
  for (const auto& g : V.generators()) gens.push_back(to_json(g.poly));
  j["generators"] = gens;
  if (const auto& P = V.parametrization()) {
    json comps = json::array();
    for (const auto& c : P->components) comps.push_back(to_json(c));
    j["parametrization"] = {{"dim", P->dim}, {"covering_degree", P->covering_degree}, {"components", comps}};
  }
  return j;
}

inline const CorpusEntry* find_corpus_entry(const std::vector<CorpusEntry>& entries, const std::string& name) {
  for (const auto& e : entries)
    if (e.variety.name() == name) return &e;
  return nullptr;
}

/// A variety from JSON; {"corpus": "cusp"} names a built-in one.
inline WeightedVariety variety_from_json(const json& j, const std::string& where) {
  try {
    if (j.contains("corpus")) {
      const auto name = j["corpus"].get<std::string>();
      const auto entries = corpus();
      const CorpusEntry* e = find_corpus_entry(entries, name);
      if (!e) fail(Errc::ConfigError, where + ": no corpus variety named '" + name + "'");
      return e->variety;
    }
    const auto beta = j.at("beta").get<std::vector<int>>();
    const int n = static_cast<int>(beta.size());
    std::vector<Polynomial> gens;
    for (const auto& g : j.at("generators")) gens.push_back(polynomial_from_json(g, n, where));
    std::optional<int> dim;
    if (j.contains("dim")) dim = j["dim"].get<int>();
    WeightedVariety V(j.value("name", std::filesystem::path(where).stem().string()), WeightVector(beta),
                      std::move(gens), dim);
    if (j.contains("parametrization")) {
      const auto& pj = j["parametrization"];
      Parametrization P;
      P.dim = pj.at("dim").get<int>();
      P.covering_degree = pj.value("covering_degree", 1);
      for (const auto& c : pj.at("components")) P.components.push_back(polynomial_from_json(c, P.dim, where));
      V.set_parametrization(P);
    }
    return V;
  } catch (const json::exception& e) {
    fail(Errc::ConfigError, where + ": " + e.what());
  }
}

inline WeightedVariety load_variety(const std::string& path) { return variety_from_json(read_json_file(path), path); }

// ---------------------------------------------------------------------------
// Forms

inline json to_json(const TestForm& t) {
  return {{"id", t.id}, {"q", t.form.degree()}, {"R", t.form.support_radius()}, {"potential", t.potential}};
}

/// A form from JSON on C^n. Either explicit coefficients
///   {"q": 1, "R": 1.0, "coeffs": {"1": "...", "3": "..."}}
/// or the dbar of a potential g (q = 1) or of g d(conj z_1) (q = 2)
///   {"q": 1, "R": 1.0, "potential": "..."}.
inline AntiForm form_from_json(const json& j, int n, const std::string& where) {
  try {
    const int q = j.value("q", 1);
    const double R = j.at("R").get<double>();
    const std::string id = j.value("id", std::filesystem::path(where).stem().string());
    AntiForm out;
    if (j.contains("potential")) {
      const auto g = j["potential"].get<std::string>();
      if (q == 1) out = exact_form(id, n, R, g).form;
      else if (q == 2) out = exact_form_q2(id, n, R, g).form;
      else fail(Errc::ConfigError, where + ": potentials are supported for q = 1 and q = 2");
    } else {
      out = AntiForm::from_strings(n, q, R, j.at("coeffs").get<std::map<std::string, std::string>>());
    }
    out.id = id;
    return out;
  } catch (const json::exception& e) {
    fail(Errc::ConfigError, where + ": " + e.what());
  } catch (const Error& e) {
    if (e.code() == Errc::ConfigError) throw;
    fail(Errc::ConfigError, where + ": " + e.what());
  }
}

inline AntiForm load_form(const std::string& path, int n) { return form_from_json(read_json_file(path), n, path); }

// ---------------------------------------------------------------------------
// Points

inline json to_json(const CVec& z) {
  json a = json::array();
  for (Eigen::Index k = 0; k < z.size(); ++k) a.push_back({z(k).real(), z(k).imag()});
  return a;
}

/// {"points": [[[re, im], ...], ...]}
inline std::vector<CVec> points_from_json(const json& j, int n, const std::string& where) {
  try {
    std::vector<CVec> out;
    for (const auto& p : j.at("points")) {
      if (static_cast<int>(p.size()) != n)
        fail(Errc::ConfigError, where + ": point with " + std::to_string(p.size()) + " coordinates, expected " +
                                    std::to_string(n));
      CVec z(n);
      for (int k = 0; k < n; ++k) z(k) = cdouble(p[k].at(0).get<double>(), p[k].at(1).get<double>());
      out.push_back(z);
    }
    return out;
  } catch (const json::exception& e) {
    fail(Errc::ConfigError, where + ": " + e.what());
  }
}

inline std::vector<CVec> load_points(const std::string& path, int n) {
  return points_from_json(read_json_file(path), n, path);
}

}  // namespace dbar
