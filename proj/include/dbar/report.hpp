#pragma once

#include "dbar/io.hpp"
#include "dbar/solver.hpp"
#include "dbar/verify.hpp"

#include <cstdio>
#include <optional>

namespace dbar {

struct SolvePoint {
  CVec z;
  std::optional<cdouble> param;  // grid parameter when the point came from a chart grid
  SolveResult result;
  std::string error;
};

struct LpEntry {
  std::string form_id;
  double p = 2.0;
  int sigma = 0;
  double delta = 0.0;
  double solution = 0.0;
  double form = 0.0;
  double ratio() const { return solution / form; }
};

/// One pass/fail line with the tolerance it was judged against.
struct CheckEntry {
  std::string name;
  double value = 0.0;
  double tol = 0.0;
  bool pass = false;
  std::string note;
};

/// Everything a run produced. The record is deterministic given the config and
/// seed, so it holds no timing.
struct SolveReport {
  std::string variety_id;
  std::string form_id;
  json config;
  std::vector<SolvePoint> solutions;
  std::optional<ResidualTable> residuals;
  std::vector<LpEntry> lp;
  std::vector<CheckEntry> checks;

  bool pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    for (const auto& s : solutions)
      if (!s.error.empty()) return false;
    for (const auto& l : lp)
      if (!std::isfinite(l.ratio())) return false;
    return !residuals || residuals->failures == 0;
  }
};

namespace detail {

inline std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string column_key(const MultiIndex& K) {
  std::string s = "S";
  for (int k : K) s += "_" + std::to_string(k + 1);
  return s;
}

inline json covector_json(const Covector& c) {
  json j = json::object();
  for (const auto& [K, v] : c) j[K.to_string()] = {v.real(), v.imag()};
  return j;
}

inline json stats_json(const QuadStats& s) {
  return {{"level", s.level}, {"evaluations", s.evaluations}, {"change", s.change}};
}

inline std::string coords_header(int n) {
  std::string h;
  for (int k = 1; k <= n; ++k) h += ",z" + std::to_string(k) + "_re,z" + std::to_string(k) + "_im";
  return h;
}

inline std::string coords(const CVec& z) {
  std::string s;
  for (Eigen::Index k = 0; k < z.size(); ++k) s += "," + fmt(z(k).real()) + "," + fmt(z(k).imag());
  return s;
}

}  // namespace detail

inline json to_json(const SolveReport& r) {
  json j{{"variety", r.variety_id}, {"form", r.form_id}, {"config", r.config}, {"pass", r.pass()}};
  json sols = json::array();
  for (const auto& s : r.solutions) {
    json e{{"z", to_json(s.z)}};
    if (s.param) e["param"] = {s.param->real(), s.param->imag()};
    if (s.error.empty()) {
      e["value"] = detail::covector_json(s.result.value);
      e["sigma"] = s.result.sigma;
      e["u_radius"] = s.result.u_radius;
      e["quadrature"] = detail::stats_json(s.result.stats);
    } else {
      e["error"] = s.error;
    }
    sols.push_back(e);
  }
  j["solutions"] = sols;
  if (r.residuals) {
    const auto& t = *r.residuals;
    json rows = json::array();
    for (const auto& row : t.rows) {
      json e{{"z", to_json(row.z)}};
      if (row.error.empty()) {
        e["residual"] = row.residual;
        e["form_norm"] = row.form_norm;
        e["closed_defect"] = row.closed_defect;
        e["closed"] = row.closed;
        e["quadrature"] = detail::stats_json(row.stats);
      } else {
        e["error"] = row.error;
      }
      rows.push_back(e);
    }
    j["residuals"] = {{"max", t.max},         {"mean", t.mean},         {"quad_tol", t.quad_tol}, {"h", t.h},
                      {"fd_order", t.fd_order}, {"all_closed", t.all_closed}, {"failures", t.failures}, {"rows", rows}};
  }
  json lp = json::array();
  for (const auto& e : r.lp)
    lp.push_back({{"form", e.form_id},
                  {"p", std::isinf(e.p) ? json("inf") : json(e.p)},
                  {"sigma", e.sigma},
                  {"delta", e.delta},
                  {"solution_norm", e.solution},
                  {"form_norm", e.form},
                  {"ratio", e.ratio()}});
  j["lp"] = lp;
  json checks = json::array();
  for (const auto& c : r.checks) {
    json e{{"name", c.name}, {"value", c.value}, {"tol", c.tol}, {"pass", c.pass}};
    if (!c.note.empty()) e["note"] = c.note;
    checks.push_back(e);
  }
  j["checks"] = checks;
  return j;
}

/// Point coordinates and solution coefficients, one row per point.
inline std::string solutions_csv(const SolveReport& r, int n) {
  std::vector<MultiIndex> keys;
  for (const auto& s : r.solutions)
    for (const auto& [K, v] : s.result.value)
      if (std::find(keys.begin(), keys.end(), K) == keys.end()) keys.push_back(K);
  std::sort(keys.begin(), keys.end());
  std::string out = "index" + detail::coords_header(n);
  for (const auto& K : keys) out += "," + detail::column_key(K) + "_re," + detail::column_key(K) + "_im";
  out += ",sigma,level,evaluations,error\n";
  for (std::size_t i = 0; i < r.solutions.size(); ++i) {
    const auto& s = r.solutions[i];
    out += std::to_string(i) + detail::coords(s.z);
    for (const auto& K : keys) {
      auto it = s.result.value.find(K);
      const cdouble v = it == s.result.value.end() ? cdouble(0.0) : it->second;
      out += s.error.empty() ? "," + detail::fmt(v.real()) + "," + detail::fmt(v.imag()) : ",,";
    }
    out += "," + std::to_string(s.result.sigma) + "," + std::to_string(s.result.stats.level) + "," +
           std::to_string(s.result.stats.evaluations) + "," + s.error + "\n";
  }
  return out;
}

inline std::string residuals_csv(const ResidualTable& t, int n) {
  std::string out = "index" + detail::coords_header(n) + ",residual,form_norm,closed_defect,quad_tol,h,error\n";
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    out += std::to_string(i) + detail::coords(row.z) + "," + detail::fmt(row.residual) + "," +
           detail::fmt(row.form_norm) + "," + detail::fmt(row.closed_defect) + "," + detail::fmt(t.quad_tol) + "," +
           detail::fmt(t.h) + "," + row.error + "\n";
  }
  return out;
}

inline std::string lp_csv(const SolveReport& r) {
  std::string out = "form,p,sigma,delta,solution_norm,form_norm,ratio\n";
  for (const auto& e : r.lp)
    out += e.form_id + "," + (std::isinf(e.p) ? std::string("inf") : detail::fmt(e.p)) + "," +
           std::to_string(e.sigma) + "," + detail::fmt(e.delta) + "," + detail::fmt(e.solution) + "," +
           detail::fmt(e.form) + "," + detail::fmt(e.ratio()) + "\n";
  return out;
}

inline std::string checks_csv(const SolveReport& r) {
  std::string out = "name,value,tol,pass\n";
  for (const auto& c : r.checks)
    out += c.name + "," + detail::fmt(c.value) + "," + detail::fmt(c.tol) + "," + (c.pass ? "1" : "0") + "\n";
  return out;
}

/// x, y, value triples: the grid parameter when there is one, else z_1, against
/// the largest coefficient modulus of the solution.
inline std::string plot_data(const SolveReport& r) {
  std::string out = "x,y,value\n";
  for (const auto& s : r.solutions) {
    if (!s.error.empty()) continue;
    const cdouble xy = s.param ? *s.param : s.z(0);
    out += detail::fmt(xy.real()) + "," + detail::fmt(xy.imag()) + "," + detail::fmt(max_abs(s.result.value)) + "\n";
  }
  return out;
}

}  // namespace dbar
