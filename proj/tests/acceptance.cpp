// Acceptance run: one PASS/FAIL line per criterion. Pass criterion numbers as
// arguments to run a subset; the exit status is nonzero if any line fails.

#include "dbar/corpus.hpp"
#include "dbar/kernel.hpp"
#include "dbar/probes.hpp"
#include "dbar/solver.hpp"
#include "dbar/verify.hpp"

#include <boost/rational.hpp>

#include <chrono>
#include <cstdio>
#include <random>
#include <set>

using namespace dbar;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [fail]");
  }
};

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", x);
  return buf;
}

std::function<cdouble(cdouble)> scalar(const std::string& text) {
  auto e = std::make_shared<CoeffExpr>(text, 1);
  return [e](cdouble t) { return (*e)(CVec::Constant(1, t)); };
}

double rel_change(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), 1e-300); }

std::vector<WeightedVariety> cones() { return {line_variety(), cone_variety()}; }

// ---------------------------------------------------------------------------

Outcome solution_property() {
  Outcome o;
  for (const auto& e : corpus()) {
    const auto pts = sample_points(e.variety, 10, 2024, 0.2, 0.9);
    double worst = 0.0;
    int failures = 0;
    bool closed = true;
    for (const auto& t : e.forms) {
      const auto tab = residual_check(e.variety, t.form, SolverConfig{}, pts);
      worst = std::max(worst, tab.max);
      failures += tab.failures;
      closed = closed && tab.all_closed;
    }
    o.require(worst <= 1e-4 && failures == 0 && closed, e.variety.name() + " " + sci(worst));
  }
  return o;
}

Outcome cauchy_pompeiu() {
  Outcome o;
  QuadratureSpec spec;
  spec.outer_radius = 1.0;
  spec.fixed_level = 2;
  std::vector<std::pair<std::string, std::function<cdouble(cdouble)>>> fs;
  for (const char* text : {"bump(0.1, 0.9)", "bump(0.2, 0.8) * (z1 + 2*zb1^2)",
                           "cutoff(0.2, 0.9, abs2(z1 - 0.05)) * exp(i*re(z1))"})
    fs.emplace_back(text, scalar(text));
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  std::vector<cdouble> pts;
  while (pts.size() < 50) {
    const cdouble z(U(rng), U(rng));
    if (std::abs(z) < 0.9) pts.push_back(z);
  }
  double worst = 0.0;
  bool same_sign = true;
  for (const auto& row : cauchy_pompeiu_audit(fs, pts, spec, 2.5e-3)) {
    worst = std::max(worst, row.max_err);
    same_sign = same_sign && std::abs(row.epsilon - kOrientationSign) < 1e-3;
  }
  o.require(worst <= 1e-6 && same_sign, "pointwise " + sci(worst));

  // Polar midpoint sum with 1000 x 1000 cells; the cell holding the interior
  // point is skipped, its principal value vanishing by symmetry.
  auto indicator = [](cdouble t) { return std::abs(t) < 1.0 ? cdouble(1.0) : cdouble(0.0); };
  QuadratureSpec disc;
  disc.outer_radius = 1.0;
  const int N = 1000;
  const double dr = 1.0 / N, dth = 2.0 * kPi / N;
  const cdouble inside = std::polar(360.5 * dr, 100.5 * dth);
  double brute = 0.0;
  for (cdouble z : {inside, cdouble(1.4, -0.3)}) {
    cdouble acc = 0.0;
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) {
        if (z == inside && i == 360 && j == 100) continue;
        const double r = (i + 0.5) * dr;
        acc += r / (std::polar(r, (j + 0.5) * dth) - z);
      }
    acc *= dr * dth / kPi;
    const cdouble v = cauchy_transform(indicator, z, disc).value;
    brute = std::max(brute, std::abs(v - acc) / std::abs(v));
  }
  o.require(brute <= 1e-4, "riemann " + sci(brute));
  return o;
}

Outcome cone_coincidence() {
  Outcome o;
  const auto V = cone_variety();
  std::vector<AntiForm> forms;
  for (const auto& t : random_exact_forms(V, 1.0, 20, 2024)) forms.push_back(t.form);
  const auto tab = cone_weighted_agreement(V, forms, sample_points(V, 20, 2024, 0.2, 0.9), SolverConfig{});
  o.require(tab.failures == 0 && tab.max_rel < 1e-10, "max rel " + sci(tab.max_rel));
  return o;
}

Outcome sign_cancellation() {
  Outcome o;
  const auto audit = sign_cancellation_audit(4, 6);
  o.require(audit.failures == 0 && audit.checked > 0,
            std::to_string(audit.checked) + " cases, " + std::to_string(audit.failures) + " failures");
  double worst = 0.0;
  for (const auto& e : corpus()) {
    for (const auto& z : sample_points(e.variety, 5, 2024, 0.3, 0.8)) {
      Chart C(e.variety, z);
      worst = std::max(worst, aleph_pullback_deviation(C, cdouble(0.8, 0.3), C.base_parameter()));
    }
  }
  o.require(worst <= 1e-8, "chart " + sci(worst));
  return o;
}

Outcome commutation() {
  Outcome o;
  SolverConfig cfg;
  cfg.quad.target_rel_err = 1e-8;
  double comm = 0.0;
  int failures = 0;
  for (const auto& e : corpus()) {
    const auto pts = sample_points(e.variety, 3, 77, 0.2, 0.9);
    for (const auto& t : e.forms) {
      const auto tab = commutation_check(e.variety, t.form, cfg, pts);
      comm = std::max(comm, tab.max_rel);
      failures += tab.failures;
    }
  }
  o.require(comm <= 1e-5 && failures == 0, "commutation " + sci(comm));
  double phi = 0.0;
  failures = 0;
  for (const auto& e : corpus()) {
    if (e.variety.is_cone()) continue;
    std::vector<CVec> xs;
    for (const auto& z : sample_points(e.variety, 5, 31, 0.2, 0.9)) xs.push_back(phi_root(z, e.variety.weights()));
    for (const auto& t : e.forms) {
      const auto tab = phi_commutation_check(e.variety, t.form, cfg, xs);
      phi = std::max(phi, tab.max_rel);
      failures += tab.failures;
    }
  }
  o.require(phi <= 1e-6 && failures == 0, "phi " + sci(phi));
  return o;
}

Outcome lp_machinery() {
  Outcome o;
  using boost::rational;
  int bad = 0, cases = 0;
  const std::vector<std::optional<rational<long>>> ps{rational<long>(1), rational<long>(3, 2), rational<long>(2),
                                                      rational<long>(4), std::nullopt};
  for (int d = 1; d <= 5; ++d)
    for (int q = 1; q <= d; ++q)
      for (const auto& p : ps) {
        const int sigma = p ? sigma_min(d, *p, q).sigma : sigma_min(d, kInfinity, q).sigma;
        const rational<long> delta = lp_delta(sigma, q, d, p);
        ++cases;
        if (delta < rational<long>(0) || !(delta < rational<long>(1))) ++bad;
      }
  o.require(bad == 0, "delta in [0,1) for " + std::to_string(cases) + " cases");

  const auto densities = random_densities(1.0, 20, 2024);
  double wc = 0.0;
  bool wc_finite = true;
  for (double delta : {0.0, 0.5, 0.9}) {
    const auto pr = weighted_cauchy_probe(densities, delta, 2.0, 1.0);
    wc = std::max(wc, std::abs(pr.doubling_change()));
    wc_finite = wc_finite && pr.finite();
  }
  o.require(wc_finite && wc < 0.05, "weighted cauchy doubling " + sci(wc));

  for (const auto& V : cones()) {
    std::vector<AntiForm> family;
    for (const auto& t : random_exact_forms(V, 1.0, 20, 2024)) family.push_back(t.form);
    const std::vector<NormSpec> specs{{2.0, sigma_min(V.dim(), 2.0, 1).sigma},
                                      {kInfinity, sigma_min(V.dim(), kInfinity, 1).sigma}};
    for (const auto& pr : lp_bound_probes(V, family, specs, 1.0)) {
      const double ch = std::abs(pr.doubling_change());
      o.require(pr.finite() && ch < 0.05, V.name() + " p=" + (std::isinf(pr.p) ? std::string("inf") : sci(pr.p)) +
                                              " C=" + sci(pr.constant()) + " doubling " + sci(ch));
    }
  }

  const auto small = sigma_too_small_probe({0.4, 0.2, 0.1, 0.05, 0.025});
  o.require(small.finite() && small.growth() >= 10.0, "sigma too small growth " + sci(small.growth()));
  return o;
}

std::vector<std::pair<std::string, std::pair<std::function<double(const CVec&)>, double>>> fubini_integrands() {
  return {{"gaussian", {[](const CVec& z) { return std::exp(-z.squaredNorm()); }, 1.0}},
          {"indicator", {[](const CVec&) { return 1.0; }, 0.6}},
          {"bump",
           {[](const CVec& z) {
              const double r = z.norm();
              return r < 0.9 ? std::exp(-1.0 / (1.0 - r * r / 0.81)) * (1.0 + std::norm(z(0))) : 0.0;
            },
            1.0}}};
}

Outcome fubini() {
  Outcome o;
  for (const auto& V : cones()) {
    double worst = 0.0;
    for (const auto& [name, f] : fubini_integrands())
      worst = std::max(worst, nested_integral_check(V, f.first, f.second).rel_err());
    o.require(worst <= 1e-3, V.name() + " " + sci(worst));
  }
  return o;
}

Outcome self_convergence() {
  Outcome o;
  // Solutions: doubled rings and angles against the default rule.
  double sol = 0.0;
  for (const auto& e : corpus()) {
    const auto pts = sample_points(e.variety, 3, 2024, 0.2, 0.9);
    SolverConfig base, fine;
    fine.quad.rings_per_decade *= 2;
    fine.quad.angular_nodes *= 2;
    for (const auto& t : e.forms)
      for (const auto& z : pts) {
        const Covector a = solve(t.form, e.variety, z, base).value;
        const Covector b = solve(t.form, e.variety, z, fine).value;
        sol = std::max(sol, max_abs(difference(a, b)) / std::max(max_abs(a), 1e-2));
      }
  }
  o.require(sol <= 1e-6, "solutions " + sci(sol) + " (tol 1e-6)");

  // Lp constants on a smaller family.
  const ProbeResolution res, fine = res.refined();
  for (const auto& V : cones()) {
    std::vector<AntiForm> family;
    for (const auto& t : random_exact_forms(V, 1.0, 4, 2024)) family.push_back(t.form);
    const std::vector<NormSpec> specs{{2.0, sigma_min(V.dim(), 2.0, 1).sigma},
                                      {kInfinity, sigma_min(V.dim(), kInfinity, 1).sigma}};
    const auto a = lp_bound_probes(V, family, specs, 1.0, res);
    const auto b = lp_bound_probes(V, family, specs, 1.0, fine);
    const double c2 = rel_change(a[0].constant(), b[0].constant());
    const double ci = rel_change(a[1].constant(), b[1].constant());
    o.require(c2 <= 1e-3, V.name() + " C_2 " + sci(c2) + " (tol 1e-3)");
    o.require(ci <= 2e-2, V.name() + " C_inf " + sci(ci) + " (tol 2e-2)");
  }

  const auto densities = random_densities(1.0, 10, 2024);
  double wc = 0.0;
  for (double delta : {0.0, 0.5, 0.9})
    wc = std::max(wc, rel_change(weighted_cauchy_probe(densities, delta, 2.0, 1.0, res).constant(),
                                 weighted_cauchy_probe(densities, delta, 2.0, 1.0, fine).constant()));
  o.require(wc <= 1e-3, "weighted cauchy " + sci(wc) + " (tol 1e-3)");

  double fb = 0.0;
  const MeasureResolution mres;
  for (const auto& V : cones())
    for (const auto& [name, f] : fubini_integrands()) {
      fb = std::max(fb, rel_change(direct_integral(V, f.first, f.second, mres),
                                   direct_integral(V, f.first, f.second, mres.refined())));
      fb = std::max(fb, rel_change(radial_first_integral(V, f.first, f.second, mres),
                                   radial_first_integral(V, f.first, f.second, mres.refined())));
    }
  o.require(fb <= 1e-3, "fubini " + sci(fb) + " (tol 1e-3)");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, Outcome (*)()>> criteria{
      {"solution property", solution_property}, {"cauchy-pompeiu", cauchy_pompeiu},
      {"cone/weighted coincidence", cone_coincidence}, {"sign cancellation", sign_cancellation},
      {"commutation and phi identities", commutation}, {"lp machinery", lp_machinery},
      {"fubini split", fubini}, {"self-convergence", self_convergence}};
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  bool all = true;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("threw: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %d %s: %s  %s  (%.1f s)\n", id, criteria[k].first, o.pass ? "PASS" : "FAIL",
                o.detail.c_str(), secs);
    std::fflush(stdout);
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
