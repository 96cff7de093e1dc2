#include "dbar/corpus.hpp"
#include "dbar/io.hpp"
#include "dbar/probes.hpp"
#include "dbar/report.hpp"
#include "dbar/solver.hpp"
#include "dbar/verify.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <iostream>

using namespace dbar;

namespace {

constexpr int kCheckFailed = 1;
constexpr int kUsage = 2;
constexpr int kUnexpected = 3;

int exit_code(Errc e) { return 10 + static_cast<int>(e); }

std::string exit_code_table() {
  std::string s =
      "Exit codes:\n"
      "  0   success, every check within tolerance\n"
      "  1   a check exceeded its tolerance\n"
      "  2   bad command line\n"
      "  3   unexpected internal error\n";
  for (int k = 0; k <= static_cast<int>(Errc::ConfigError); ++k) {
    const auto e = static_cast<Errc>(k);
    s += "  " + std::to_string(exit_code(e)) + (exit_code(e) < 100 ? "  " : " ") + errc_name(e) + "\n";
  }
  s += "Environment: DBAR_THREADS caps the number of worker threads.\n";
  return s;
}

struct Options {
  std::string variety;
  std::vector<std::string> forms;
  std::string points;
  std::string grid;
  std::uint64_t seed = 2024;
  int count = 10;
  double rmin = 0.2;
  double rmax = 0.9;
  std::optional<int> sigma;
  std::string p = "2";
  std::optional<int> q;
  std::optional<int> rings;
  std::optional<int> angles;
  std::optional<double> tol;
  std::optional<int> max_depth;
  std::string mode = "auto";
  double radius = 1.0;
  bool corpus = false;
  std::string out_dir;
  std::string format = "csv";
};

double parse_p(const std::string& text) {
  if (text == "inf" || text == "infinity") return kInfinity;
  try {
    std::size_t used = 0;
    const double p = std::stod(text, &used);
    if (used != text.size() || !(p >= 1.0)) throw std::invalid_argument(text);
    return p;
  } catch (const std::exception&) {
    fail(Errc::ConfigError, "--p expects a number >= 1 or 'inf', got '" + text + "'");
  }
}

struct Job {
  WeightedVariety variety;
  AntiForm form;
};

WeightedVariety variety_of(const Options& o) {
  if (o.variety.empty()) fail(Errc::ConfigError, "--variety is required");
  return load_variety(o.variety);
}

std::vector<Job> jobs_of(const Options& o) {
  std::vector<Job> jobs;
  if (o.corpus) {
    for (const auto& e : corpus())
      for (const auto& t : e.forms) jobs.push_back({e.variety, t.form});
    return jobs;
  }
  const WeightedVariety V = variety_of(o);
  if (o.forms.empty()) fail(Errc::ConfigError, "--form is required (or --corpus)");
  for (const auto& path : o.forms) {
    AntiForm f = load_form(path, V.n());
    if (o.q && f.degree() != *o.q)
      fail(Errc::ConfigError, "'" + path + "' has degree " + std::to_string(f.degree()) + ", --q asks for " +
                                  std::to_string(*o.q));
    jobs.push_back({V, std::move(f)});
  }
  return jobs;
}

SolverConfig solver_config(const Options& o, const WeightedVariety& V) {
  SolverConfig c;
  c.sigma = o.sigma;
  c.p = parse_p(o.p);
  if (o.mode == "cone") c.mode = SolverMode::Cone;
  else if (o.mode == "weighted") c.mode = SolverMode::Weighted;
  else c.mode = V.is_cone() && V.dim() > 1 ? SolverMode::Cone : SolverMode::Weighted;
  if (o.rings) c.quad.rings_per_decade = *o.rings;
  if (o.angles) c.quad.angular_nodes = *o.angles;
  if (o.tol) c.quad.target_rel_err = *o.tol;
  if (o.max_depth) c.quad.max_depth = *o.max_depth;
  return c;
}

json config_echo(const Options& o, const SolverConfig& c, const std::string& command) {
  json j{{"command", command},
         {"seed", o.seed},
         {"mode", c.mode == SolverMode::Cone ? "cone" : "weighted"},
         {"p", o.p},
         {"quadrature",
          {{"rings_per_decade", c.quad.rings_per_decade},
           {"angular_nodes", c.quad.angular_nodes},
           {"radial_order", c.quad.radial_order},
           {"target_rel_err", c.quad.target_rel_err},
           {"max_depth", c.quad.max_depth}}}};
  if (o.sigma) j["sigma"] = *o.sigma;
  if (!o.points.empty()) j["points"] = {{"file", o.points}};
  else if (!o.grid.empty()) j["points"] = {{"grid", o.grid}, {"rmin", o.rmin}, {"rmax", o.rmax}};
  else j["points"] = {{"random", o.count}, {"rmin", o.rmin}, {"rmax", o.rmax}};
  return j;
}

struct PointSet {
  std::vector<CVec> z;
  std::vector<std::optional<cdouble>> param;
};

PointSet points_of(const Options& o, const WeightedVariety& V) {
  PointSet ps;
  if (!o.points.empty()) {
    ps.z = load_points(o.points, V.n());
  } else if (!o.grid.empty()) {
    int rings = 0, angles = 0;
    char x = 0;
    std::istringstream in(o.grid);
    if (!(in >> rings >> x >> angles) || x != 'x' || rings < 1 || angles < 1)
      fail(Errc::ConfigError, "--grid expects RINGSxANGLES, got '" + o.grid + "'");
    for (const auto& g : grid_points(V, rings, angles, o.rmin, o.rmax)) {
      ps.z.push_back(g.z);
      ps.param.push_back(g.param);
    }
  } else {
    ps.z = sample_points(V, o.count, o.seed, o.rmin, o.rmax);
  }
  ps.param.resize(ps.z.size());
  return ps;
}

void write_outputs(const SolveReport& r, int n, const std::string& dir, double seconds) {
  if (dir.empty()) return;
  write_text_file(dir + "/report.json", to_json(r).dump(2) + "\n");
  if (!r.solutions.empty()) write_text_file(dir + "/solutions.csv", solutions_csv(r, n));
  if (r.residuals) write_text_file(dir + "/residuals.csv", residuals_csv(*r.residuals, n));
  if (!r.lp.empty()) write_text_file(dir + "/lp.csv", lp_csv(r));
  write_text_file(dir + "/checks.csv", checks_csv(r));
  write_text_file(dir + "/plot.csv", plot_data(r));
  write_text_file(dir + "/timing.json", json{{"wall_seconds", seconds}}.dump(2) + "\n");
}

std::string job_dir(const Options& o, const std::vector<Job>& jobs, const Job& j) {
  if (o.out_dir.empty() || jobs.size() == 1) return o.out_dir;
  return o.out_dir + "/" + j.variety.name() + "-" + j.form.id;
}

void print_summary(const Options& o, const SolveReport& r, int n) {
  if (o.format == "json") {
    std::cout << to_json(r).dump(2) << "\n";
    return;
  }
  if (!r.solutions.empty()) std::cout << solutions_csv(r, n);
  if (r.residuals) std::cout << residuals_csv(*r.residuals, n);
  if (!r.lp.empty()) std::cout << lp_csv(r);
  if (!r.checks.empty()) std::cout << checks_csv(r);
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int run_solve(const Options& o) {
  bool ok = true;
  const auto jobs = jobs_of(o);
  for (const auto& job : jobs) {
    const auto t0 = Clock::now();
    const SolverConfig cfg = solver_config(o, job.variety);
    const PointSet ps = points_of(o, job.variety);
    SolveReport r{job.variety.name(), job.form.id, config_echo(o, cfg, "solve"), {}, {}, {}, {}};
    r.solutions.resize(ps.z.size());
    parallel_for(ps.z.size(), [&](std::size_t i) {
      SolvePoint& s = r.solutions[i];
      s.z = ps.z[i];
      s.param = ps.param[i];
      try {
        s.result = solve(job.form, job.variety, s.z, cfg);
      } catch (const Error& e) {
        s.error = std::string(errc_name(e.code())) + ": " + e.what();
      }
    });
    ok = ok && r.pass();
    write_outputs(r, job.variety.n(), job_dir(o, jobs, job), seconds_since(t0));
    print_summary(o, r, job.variety.n());
  }
  return ok ? 0 : kCheckFailed;
}

int run_verify(const Options& o) {
  bool ok = true;
  const auto jobs = jobs_of(o);
  const double tol = 1e-4;
  for (const auto& job : jobs) {
    const auto t0 = Clock::now();
    const SolverConfig cfg = solver_config(o, job.variety);
    const PointSet ps = points_of(o, job.variety);
    SolveReport r{job.variety.name(), job.form.id, config_echo(o, cfg, "verify"), {}, {}, {}, {}};
    r.residuals = residual_check(job.variety, job.form, cfg, ps.z);
    const auto& t = *r.residuals;
    r.checks.push_back({"residual", t.max, tol, t.failures == 0 && t.max <= tol,
                        std::to_string(t.failures) + " failed points"});
    r.checks.push_back({"closed", t.all_closed ? 0.0 : 1.0, 0.0, t.all_closed, "dbar-closedness audit"});
    ok = ok && r.pass();
    write_outputs(r, job.variety.n(), job_dir(o, jobs, job), seconds_since(t0));
    print_summary(o, r, job.variety.n());
    std::cerr << job.variety.name() << "/" << job.form.id << ": max residual " << t.max << (r.pass() ? " ok" : " FAIL")
              << "\n";
  }
  return ok ? 0 : kCheckFailed;
}

int run_identity(const Options& o) {
  bool ok = true;
  const auto jobs = jobs_of(o);
  for (const auto& job : jobs) {
    const auto t0 = Clock::now();
    const auto& V = job.variety;
    SolverConfig cfg = solver_config(o, V);
    // both sides of an identity are quadratures; the default tolerance would dominate
    if (!o.tol) cfg.quad.target_rel_err = 1e-8;
    const PointSet ps = points_of(o, V);
    SolveReport r{V.name(), job.form.id, config_echo(o, cfg, "identity-check"), {}, {}, {}, {}};
    auto add = [&](const std::string& name, double value, double tol, bool pass, int failures) {
      r.checks.push_back({name, value, tol, pass, std::to_string(failures) + " failed points"});
    };
    const auto comm = commutation_check(V, job.form, cfg, ps.z);
    add("commutation", comm.max_rel, comm.tol, comm.pass(), comm.failures);
    if (!V.is_cone()) {
      std::vector<CVec> xs;
      for (const auto& z : ps.z) xs.push_back(phi_root(z, V.weights()));
      const auto phi = phi_commutation_check(V, job.form, cfg, xs);
      add("phi-commutation", phi.max_rel, phi.tol, phi.pass(), phi.failures);
    } else if (job.form.degree() >= 1) {
      const auto agree = cone_weighted_agreement(V, std::vector<AntiForm>(ps.z.size(), job.form), ps.z, cfg);
      add("cone-weighted-agreement", agree.max_rel, agree.tol, agree.pass(), agree.failures);
    }
    const auto signs = sign_cancellation_audit();
    add("sign-cancellation", static_cast<double>(signs.failures), 0.0, signs.failures == 0, 0);
    ok = ok && r.pass();
    write_outputs(r, V.n(), job_dir(o, jobs, job), seconds_since(t0));
    print_summary(o, r, V.n());
  }
  return ok ? 0 : kCheckFailed;
}

int run_lp_probe(const Options& o) {
  const auto t0 = Clock::now();
  const WeightedVariety V = variety_of(o);
  if (!V.is_cone()) fail(Errc::NotACone, "lp-probe needs a cone; '" + V.name() + "' is weighted");
  const double p = parse_p(o.p);
  const int q = o.q.value_or(1);
  if (q != 1) fail(Errc::ConfigError, "lp-probe supports q = 1");
  std::vector<AntiForm> family;
  if (o.forms.empty()) {
    for (auto& t : random_exact_forms(V, o.radius, o.count, o.seed)) family.push_back(t.form);
  } else {
    for (const auto& path : o.forms) family.push_back(load_form(path, V.n()));
  }
  const int sigma = o.sigma.value_or(sigma_min(V.dim(), p, q).sigma);
  const LpProbe probe = lp_bound_probe(V, family, p, sigma, o.radius);
  SolverConfig cfg = solver_config(o, V);
  SolveReport r{V.name(), o.forms.empty() ? "random-family" : "files", config_echo(o, cfg, "lp-probe"), {}, {}, {}, {}};
  r.config["radius"] = o.radius;
  r.config["count"] = family.size();
  for (const auto& row : probe.rows) r.lp.push_back({row.id, p, sigma, probe.delta, row.solution, row.form});
  r.checks.push_back({"finite", probe.constant(), 0.0, probe.finite(), "largest ratio"});
  if (probe.rows.size() >= 2)
    r.checks.push_back({"family-doubling", probe.doubling_change(), 0.05, probe.doubling_change() < 0.05,
                        "relative change of the largest ratio from the first half of the family to all of it"});
  write_outputs(r, V.n(), o.out_dir, seconds_since(t0));
  print_summary(o, r, V.n());
  return r.pass() ? 0 : kCheckFailed;
}

int run_corpus_list(const Options& o) {
  for (const auto& e : corpus()) {
    const auto& V = e.variety;
    std::cout << V.name() << "  n=" << V.n() << " d=" << V.dim() << " beta=(";
    for (int k = 0; k < V.n(); ++k) std::cout << (k ? "," : "") << V.weights()[k];
    std::cout << ")" << (V.is_cone() ? " cone" : "") << "\n";
    for (const auto& t : e.forms)
      std::cout << "  " << t.id << "  q=" << t.form.degree() << " R=" << t.form.support_radius() << "  " << t.potential
                << "\n";
    if (!o.out_dir.empty()) {
      write_text_file(o.out_dir + "/varieties/" + V.name() + ".json", to_json(V).dump(2) + "\n");
      for (const auto& t : e.forms) write_text_file(o.out_dir + "/forms/" + t.id + ".json", to_json(t).dump(2) + "\n");
    }
  }
  return 0;
}

void add_common(CLI::App* cmd, Options& o, bool points) {
  cmd->add_option("--variety", o.variety, "Variety JSON file");
  cmd->add_option("--form", o.forms, "Form JSON file (repeatable)");
  cmd->add_option("--q", o.q, "Expected form degree");
  cmd->add_option("--sigma", o.sigma, "Kernel exponent (default: weighted max(-q,0), cone sigma_min)");
  cmd->add_option("--p", o.p, "Lebesgue exponent, a number >= 1 or 'inf'")->capture_default_str();
  cmd->add_option("--seed", o.seed, "Seed for random points and families")->capture_default_str();
  cmd->add_option("--out-dir", o.out_dir, "Directory for report.json, CSV tables and plot data");
  cmd->add_option("--format", o.format, "Summary printed to stdout")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  cmd->add_option("--rings", o.rings, "Quadrature rings per decade");
  cmd->add_option("--angles", o.angles, "Quadrature angular nodes");
  cmd->add_option("--tol", o.tol, "Quadrature target relative error");
  cmd->add_option("--max-depth", o.max_depth, "Quadrature refinement depth");
  cmd->add_option("--mode", o.mode, "Solver formula")
      ->check(CLI::IsMember({"auto", "weighted", "cone"}))
      ->capture_default_str();
  if (!points) return;
  cmd->add_option("--points", o.points, "Points JSON file {\"points\": [[[re, im], ...], ...]}");
  cmd->add_option("--grid", o.grid, "Chart grid RINGSxANGLES instead of random points");
  cmd->add_option("--count", o.count, "Number of random points")->capture_default_str();
  cmd->add_option("--rmin", o.rmin, "Smallest |z| of generated points")->capture_default_str();
  cmd->add_option("--rmax", o.rmax, "Largest |z| of generated points")->capture_default_str();
  cmd->add_flag("--corpus", o.corpus, "Run every built-in variety and form");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Integral solution operators for dbar on weighted homogeneous varieties"};
  app.footer(exit_code_table());
  app.require_subcommand(1);
  Options o;

  auto* solve_cmd = app.add_subcommand("solve", "Evaluate S omega at points of the variety");
  add_common(solve_cmd, o, true);
  auto* verify_cmd = app.add_subcommand("verify", "Check dbar(S omega) = omega by chart finite differences");
  add_common(verify_cmd, o, true);
  auto* probe_cmd = app.add_subcommand("lp-probe", "Measure ||S omega||_p / ||omega||_p on a cone");
  add_common(probe_cmd, o, false);
  probe_cmd->add_option("--count", o.count, "Size of the random family when no --form is given")->capture_default_str();
  probe_cmd->add_option("--radius", o.radius, "Ball radius R")->capture_default_str();
  auto* identity_cmd = app.add_subcommand("identity-check", "Commutation, Phi and cone/weighted identities");
  add_common(identity_cmd, o, true);
  auto* list_cmd = app.add_subcommand("corpus-list", "List the built-in varieties and forms");
  list_cmd->add_option("--out-dir", o.out_dir, "Also write them as JSON configs here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kUsage;
  }

  try {
    if (*solve_cmd) return run_solve(o);
    if (*verify_cmd) return run_verify(o);
    if (*probe_cmd) return run_lp_probe(o);
    if (*identity_cmd) return run_identity(o);
    if (*list_cmd) return run_corpus_list(o);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUnexpected;
  }
  return kUsage;
}
