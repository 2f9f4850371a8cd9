#include "robin/runner.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <thread>

#include "robin/distance.hpp"
#include "robin/eigenproblem.hpp"
#include "robin/fields.hpp"
#include "robin/poisson.hpp"
#include "robin/viscosity.hpp"

namespace robin {

namespace fs = std::filesystem;

namespace {

/// Runs fn(i) for i in [0, n) on up to `threads` workers.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  const auto workers = static_cast<std::size_t>(std::max(1, std::min<int>(threads, static_cast<int>(n))));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  for (auto& t : pool) t.join();
}

class Report {
 public:
  explicit Report(fs::path dir) : dir_(std::move(dir)) {}

  template <typename... Args>
  void line(fmt::format_string<Args...> f, Args&&... args) {
    text_ += fmt::format(f, std::forward<Args>(args)...) + "\n";
  }
  void value(const std::string& key, double v) { line("{} = {:.10g}", key, v); }
  void artifact(const std::string& file, const std::string& kind) {
    line("artifact = {} {}", file, kind);
  }
  void check(const std::string& name, bool pass, const std::string& detail) {
    assertions_.push_back({name, pass, detail});
  }
  const fs::path& dir() const { return dir_; }
  const std::vector<Assertion>& assertions() const { return assertions_; }

  void finish(const std::string& status) {
    std::string summary;
    for (const auto& a : assertions_) {
      line("assert {} = {} ({})", a.name, a.pass ? "pass" : "fail", a.detail);
      summary += fmt::format("{} {}: {}\n", a.pass ? "PASS" : "FAIL", a.name, a.detail);
    }
    line("status = {}", status);
    summary += "status = " + status + "\n";
    std::ofstream(dir_ / "report.txt") << text_;
    std::ofstream(dir_ / "summary.txt") << summary;
  }

 private:
  fs::path dir_;
  std::string text_;
  std::vector<Assertion> assertions_;
};

std::string num(double x) { return fmt::format("{}", x); }

void write_table(const fs::path& path, const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << r[i];
    out << '\n';
  }
}

Point centre_of(const Domain& dom) {
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (int v = 0; v < static_cast<int>(dom.num_vertices()); ++v) {
    const Point p = dom.position(v);
    x0 = std::min(x0, p.x), x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y), y1 = std::max(y1, p.y);
  }
  return {0.5 * (x0 + x1), 0.5 * (y0 + y1)};
}

ScalarField make_source(const Domain& dom, const SourceSpec& f) {
  const Point c = centre_of(dom);
  return sample(dom, [&](Point x) {
    const double r = norm(x - c);
    if (f.kind == "zero") return 0.0;
    if (f.kind == "ball") return r < f.radius ? 1.0 : 0.0;
    if (f.kind == "annulus") return r > f.inner && r < f.outer ? 1.0 : 0.0;
    return 1.0;
  });
}

bool unit_disk(const RunConfig& cfg) { return cfg.domain.shape == "disk" && cfg.domain.radius == 1.0; }

/// Radial closed form for the configured source, when one applies.
std::optional<std::function<double(double)>> radial_oracle(const RunConfig& cfg, double p) {
  if (!unit_disk(cfg)) return std::nullopt;
  const double beta = cfg.beta;
  if (cfg.f.kind == "one") return [=](double r) { return radial_oracle_ball(2, p, beta, r); };
  if (cfg.f.kind == "ball" && cfg.f.radius < 1.0 && p > 2.0) {
    const double eps = cfg.f.radius;
    return [=](double r) { return radial_oracle_annular(2, p, beta, eps, r); };
  }
  return std::nullopt;
}

double oracle_rel_error(const Domain& dom, const ScalarField& v, const std::function<double(double)>& oracle) {
  double err = 0.0, ref = 0.0;
  for (int i = 0; i < static_cast<int>(v.size()); ++i) {
    const double o = oracle(std::min(1.0, norm(dom.position(i))));
    err = std::max(err, std::abs(v[i] - o));
    ref = std::max(ref, std::abs(o));
  }
  return err / ref;
}

int centre_vertex(const Domain& dom) {
  const Point c = centre_of(dom);
  int best = 0;
  double bd = 1e300;
  for (int v = 0; v < static_cast<int>(dom.num_vertices()); ++v) {
    const double d = norm(dom.position(v) - c);
    if (d < bd) bd = d, best = v;
  }
  return best;
}

PoissonOptions poisson_options(const RunConfig& cfg) {
  PoissonOptions o;
  if (cfg.tol) o.tol = *cfg.tol;
  if (cfg.max_iter) o.max_iter = *cfg.max_iter;
  if (cfg.method == "cg") {
    o.method = PoissonMethod::ConjugateGradient;
    if (!cfg.max_iter) o.max_iter = 200000;
  }
  return o;
}

struct PoissonPoint {
  double p = 0.0;
  PoissonResult res;
  bool converged = false;
  std::string error;
};

std::vector<PoissonPoint> poisson_points(const Domain& dom, const ScalarField& f, const RunConfig& cfg,
                                         int threads) {
  std::vector<PoissonPoint> pts(cfg.p_list.size());
  const auto opts = poisson_options(cfg);
  parallel_for(pts.size(), threads, [&](std::size_t i) {
    pts[i].p = cfg.p_list[i];
    try {
      pts[i].res = solve_p_poisson(dom, f, RobinParams(cfg.beta, cfg.p_list[i]), opts);
      pts[i].converged = true;
    } catch (const NotConverged<PoissonResult>& e) {
      pts[i].res = e.partial();
      pts[i].error = e.what();
    }
  });
  return pts;
}

/// Writes the p-Poisson table and per-p fields; returns false on nonconvergence.
bool report_poisson_points(Report& rep, const Domain& dom, const RunConfig& cfg, const std::vector<PoissonPoint>& pts,
                           const ScalarField& vbar) {
  std::vector<std::vector<std::string>> rows;
  bool all = true;
  double prev_gap = kInfinity;
  bool decreasing = true;
  double worst_envelope = -kInfinity;
  bool oracle_ok = true;
  std::string oracle_detail;
  const int centre = centre_vertex(dom);
  for (const auto& pt : pts) {
    all = all && pt.converged;
    const double gap = (pt.res.v - vbar).sup_abs();
    const double env = upper_envelope_check(pt.res.v, dom, cfg.beta);
    const auto oracle = radial_oracle(cfg, pt.p);
    const double oerr = oracle ? oracle_rel_error(dom, pt.res.v, *oracle) : std::nan("");
    rows.push_back({num(pt.p), std::to_string(pt.res.iterations), num(pt.res.residual_norm), num(pt.res.j_value),
                    num(gap), num(env), num(pt.res.v[centre]), oracle ? num(oerr) : "nan", pt.converged ? "1" : "0"});
    const std::string file = fmt::format("poisson_p{}.csv", pt.p);
    write_field_csv((rep.dir() / file).string(), dom, pt.res.v);
    rep.artifact(file, "field");
    rep.line("poisson p = {:g}: iterations = {}, residual = {:.3e}, sup_gap = {:.6g}, centre = {:.6g}, envelope = {:.3e}{}",
             pt.p, pt.res.iterations, pt.res.residual_norm, gap, pt.res.v[centre], env,
             oracle ? fmt::format(", oracle_rel_error = {:.4g}", oerr) : "");
    if (!pt.converged) rep.line("poisson p = {:g}: not converged: {}", pt.p, pt.error);
    if (gap > 1.1 * prev_gap) decreasing = false;
    prev_gap = gap;
    if (pt.p >= 20) worst_envelope = std::max(worst_envelope, env);
    if (oracle) {
      const double bound = pt.p <= 2 ? 0.02 : 0.04;
      if (pt.p <= 10 && oerr > bound) oracle_ok = false;
      oracle_detail += fmt::format("{}p={:g}: {:.4g}", oracle_detail.empty() ? "" : ", ", pt.p, oerr);
    }
  }
  write_table(rep.dir() / "poisson_sweep.csv",
              {"p", "iters", "residual", "j_value", "sup_gap", "envelope", "centre", "oracle_rel_error", "converged"},
              rows);
  rep.artifact("poisson_sweep.csv", "table");
  rep.check("poisson_converged", all, all ? "every p converged" : "some p did not converge");
  rep.check("sup_gap_decreasing", decreasing, "sup-gap to 1/beta + d non-increasing within 10%");
  if (worst_envelope > -kInfinity)
    rep.check("upper_envelope", worst_envelope <= 0.05, fmt::format("max violation {:.4g} for p >= 20", worst_envelope));
  if (!oracle_detail.empty()) rep.check("radial_oracle", oracle_ok, oracle_detail);
  return all;
}

void write_residuals(Report& rep, const Domain& dom, const std::string& stem, const ResidualReport& r) {
  write_residual_csvs((rep.dir() / stem).string(), dom, r);
  rep.artifact(stem + "_interior.csv", "field");
  rep.artifact(stem + "_mask.csv", "field");
  rep.artifact(stem + "_faces.csv", "table");
  rep.line("{} interior: count = {}, q50 = {:.4g}, q95 = {:.4g}, sup = {:.4g}", stem, r.interior.count, r.interior.q50,
           r.interior.q95, r.interior.sup);
  rep.line("{} boundary: count = {}, q50 = {:.4g}, q95 = {:.4g}, sup = {:.4g}", stem, r.boundary.count, r.boundary.q50,
           r.boundary.q95, r.boundary.sup);
  rep.line("{} masked vertices = {}", stem, r.masked_vertices.size());
}

struct ContinuumDistance {
  std::function<double(Point)> d;
  double inradius = 0.0;
};

/// Signed distance to the boundary of the continuum shape the grid approximates.
std::optional<ContinuumDistance> continuum_distance(const DomainSpec& s) {
  if (s.shape == "disk") return ContinuumDistance{[r = s.radius](Point x) { return r - norm(x); }, s.radius};
  if (s.shape == "square" || s.shape == "rectangle") {
    const double w = s.shape == "square" ? s.side : s.width;
    const double ht = s.shape == "square" ? s.side : s.height;
    return ContinuumDistance{[w, ht](Point x) { return std::min({x.x, x.y, w - x.x, ht - x.y}); },
                             0.5 * std::min(w, ht)};
  }
  if (s.shape == "annulus")
    return ContinuumDistance{[a = s.inner, b = s.outer](Point x) { return std::min(norm(x) - a, b - norm(x)); },
                             0.5 * (s.outer - s.inner)};
  return std::nullopt;
}

int run_eigen_sweep(Report& rep, const Domain& dom, const RunConfig& cfg, std::ostream& log) {
  EigenOptions opts;
  if (cfg.tol) opts.tol = *cfg.tol;
  if (cfg.max_iter) opts.max_iter = *cfg.max_iter;
  log << "eigen sweep over " << cfg.p_list.size() << " values of p\n";
  const auto table = eigen_sweep(dom, cfg.beta, cfg.p_list, opts);
  write_sweep_csv((rep.dir() / "eigen_sweep.csv").string(), table);
  rep.artifact("eigen_sweep.csv", "table");
  const auto dist = distance_field(dom);
  ScalarField cand(dist.d.vec());
  for (std::size_t i = 0; i < cand.size(); ++i) cand[i] += 1.0 / cfg.beta;
  bool all = true, below = true;
  for (const auto& r : table.rows) {
    all = all && r.converged;
    const double cr = rayleigh_root(dom, cand, RobinParams(cfg.beta, r.p));
    if (r.converged && r.lambda_root > cr + 1e-12) below = false;
    rep.line("eigen p = {:g}: lambda_p = {:.10g}, lambda_root = {:.10g}, gap = {:.6g}, candidate_root = {:.10g}, "
             "iterations = {}{}",
             r.p, r.lambda_p, r.lambda_root, r.gap, cr, r.iterations, r.note.empty() ? "" : ", note: " + r.note);
  }
  bool trend = true;
  const std::size_t n = table.rows.size();
  for (std::size_t i = n >= 3 ? n - 2 : 1; i < n; ++i)
    if (std::abs(table.rows[i].gap) > 1.1 * std::abs(table.rows[i - 1].gap)) trend = false;
  rep.check("eigen_converged", all, all ? "every p converged" : "some p did not converge");
  rep.check("below_candidate", below, "lambda_root <= root of the quotient of 1/beta + d");
  rep.check("gap_trend", trend, "|gap| non-increasing over the last three p within 10%");
  if (table.last) {
    const auto& u = *table.last;
    write_field_csv((rep.dir() / "eigenfunction.csv").string(), dom, u.u);
    rep.artifact("eigenfunction.csv", "field");
    const auto lc = eigenfunction_limit_check(u, dom, cfg.beta);
    rep.line("eigenfunction p = {:g}: limit scale = {:.6g}, envelope violation = {:.4g}", u.p, lc.scale, lc.violation);
    if (u.u.min() > 0.0) {
      const auto res = limit_pde_residual(dom, lc.scale * u.u, u.lambda_root, cfg.beta);
      write_residuals(rep, dom, "eigen_residual", res);
    } else {
      rep.line("eigen_residual skipped: eigenfunction vanishes somewhere");
    }
  }
  return all ? kExitOk : kExitNotConverged;
}

int run_limit_solve(Report& rep, const Domain& dom, const RunConfig& cfg, std::ostream& log) {
  log << "limit solve\n";
  const auto vbar = limit_maximal_solution(dom, cfg.beta);
  write_field_csv((rep.dir() / "limit_field.csv").string(), dom, vbar);
  rep.artifact("limit_field.csv", "field");
  const double viol = feasibility_violation(dom, vbar, cfg.beta);
  double bdry = 0.0;
  for (int v : dom.boundary_vertices()) bdry = std::max(bdry, std::abs(std::abs(vbar[v]) - 1.0 / cfg.beta));
  const auto f = make_source(dom, cfg.f);
  rep.value("feasibility_violation", viol);
  rep.value("boundary_deviation", bdry);
  rep.value("limit_max", vbar.max());
  rep.value("j_infinity", j_infinity(dom, f, vbar));
  rep.check("feasible", viol <= 1e-12, fmt::format("violation {:.3g}", viol));
  rep.check("boundary_values", bdry <= 1e-12, fmt::format("max ||v| - 1/beta| on boundary vertices {:.3g}", bdry));
  const double lam = lambda_infinity(dom, cfg.beta);
  const auto res = limit_pde_residual(dom, vbar, lam, cfg.beta);
  write_residuals(rep, dom, "limit_residual", res);
  if (const auto cd = continuum_distance(cfg.domain)) {
    const auto u = sample(dom, [&](Point x) { return 1.0 / cfg.beta + cd->d(x); });
    const double lam_c = lambda_infinity_from_inradius(cd->inradius, cfg.beta);
    rep.value("continuum_lambda_infinity", lam_c);
    const auto rc = limit_pde_residual(dom, u, lam_c, cfg.beta);
    write_residuals(rep, dom, "continuum_residual", rc);
    const double bound = 5 * dom.h();
    rep.check("continuum_residual", rc.interior.q95 <= bound && rc.boundary.q95 <= bound,
              fmt::format("interior q95 {:.4g}, boundary q95 {:.4g}, bound 5h = {:.4g}", rc.interior.q95,
                          rc.boundary.q95, bound));
  }
  return kExitOk;
}

int run_poisson_sweep(Report& rep, const Domain& dom, const RunConfig& cfg, std::ostream& log, int threads) {
  const auto f = make_source(dom, cfg.f);
  rep.line("source = {}", cfg.f.kind);
  log << "p-Poisson sweep over " << cfg.p_list.size() << " values of p on " << threads << " thread(s)\n";
  const auto vbar = limit_maximal_solution(dom, cfg.beta);
  const auto pts = poisson_points(dom, f, cfg, threads);
  return report_poisson_points(rep, dom, cfg, pts, vbar) ? kExitOk : kExitNotConverged;
}

int run_uniqueness(Report& rep, const Domain& dom, const RunConfig& cfg, std::ostream& log, int threads) {
  const auto f = make_source(dom, cfg.f);
  rep.line("source = {}", cfg.f.kind);
  log << "uniqueness certificate\n";
  const auto vbar = limit_maximal_solution(dom, cfg.beta);
  try {
    const auto cert = uniqueness_certificate(dom, f, cfg.beta);
    rep.line("ridge members = {}", cert.ridge.members.size());
    rep.line("support vertices = {}", cert.support.size());
    rep.line("uncovered ridge members = {}", cert.uncovered.size());
    rep.line("included = {}", cert.included ? "true" : "false");
    rep.line("verdict = {}", cert.included ? "unique: the limit is 1/beta + d"
                                          : "not unique: a different feasible field attains J_inf");
    if (cert.witness) {
      write_field_csv((rep.dir() / "witness.csv").string(), dom, *cert.witness);
      rep.artifact("witness.csv", "field");
      rep.value("witness_objective_gap", cert.witness_objective_gap);
      rep.value("witness_max_difference", cert.witness_max_difference);
      rep.value("witness_violation", cert.witness_violation);
      rep.line("witness region vertices = {}", cert.witness_region.size());
      const double h = dom.h();
      const bool valid = cert.witness_objective_gap <= 1e-8 && cert.witness_max_difference >= 10 * h &&
                         cert.witness_violation <= 2 * h;
      rep.check("witness_valid", valid,
                fmt::format("objective gap {:.3g}, max difference {:.4g}, violation {:.3g}", cert.witness_objective_gap,
                            cert.witness_max_difference, cert.witness_violation));
      const auto lap = infinity_laplacian(dom, *cert.witness);
      std::vector<std::uint8_t> in(dom.num_vertices(), 0);
      for (int v : cert.witness_region) in[v] = 1;
      std::vector<double> vals;
      for (int v : cert.witness_region) {
        const auto [ix, iy] = dom.lattice(v);
        bool interior = true;
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            const int w = dom.vertex_at(ix + dx, iy + dy);
            interior = interior && w >= 0 && in[w];
          }
        if (interior) vals.push_back(lap.value[v]);
      }
      const auto q = abs_quantiles(vals);
      rep.line("witness infinity-laplacian interior: count = {}, q95 = {:.4g}, sup = {:.4g}", q.count, q.q95, q.sup);
    } else {
      rep.check("witness_valid", cert.included, cert.included ? "no witness needed" : "no witness produced");
    }
  } catch (const WitnessConstructionFailed& e) {
    rep.line("witness construction failed: {}", e.what());
    rep.check("witness_valid", false, e.what());
  }
  if (cfg.p_list.empty()) return kExitOk;
  const auto pts = poisson_points(dom, f, cfg, threads);
  return report_poisson_points(rep, dom, cfg, pts, vbar) ? kExitOk : kExitNotConverged;
}

int run_check(Report& rep, const RunConfig& cfg, std::ostream& log, int threads) {
  const auto results = check_suite(cfg.seed, threads);
  for (const auto& r : results) {
    log << fmt::format("{} {} ({:.2f} s)\n", r.pass ? "PASS" : "FAIL", r.name, r.seconds);
    rep.check(r.name, r.pass, r.detail);
  }
  return kExitOk;
}

}  // namespace

int thread_budget() {
  const char* env = std::getenv("ROBIN_LAB_THREADS");
  if (!env || !*env) return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  try {
    const double n = parse_number(env);
    if (n >= 1 && n == std::floor(n) && n <= 4096) return static_cast<int>(n);
  } catch (const std::invalid_argument&) {
  }
  throw ConfigError("ROBIN_LAB_THREADS", 0, fmt::format("must be a positive integer, got '{}'", env));
}

RunOutcome run_experiment(const RunConfig& cfg, std::ostream& log, int threads) {
  RunOutcome out;
  const Domain dom = cfg.mode == Mode::Check ? Domain{} : build_domain(cfg.domain);
  out.dir = fs::path(cfg.output) / cfg.name;
  fs::create_directories(out.dir);
  std::ofstream(out.dir / "config.txt") << cfg.text;

  Report rep(out.dir);
  rep.line("name = {}", cfg.name);
  rep.line("mode = {}", mode_name(cfg.mode));
  rep.line("seed = {}", cfg.seed);
  rep.artifact("config.txt", "config");
  int code = kExitOk;
  if (cfg.mode == Mode::Check) {
    code = run_check(rep, cfg, log, threads);
  } else {
    rep.line("domain = {}", describe(cfg.domain));
    rep.line("vertices = {}", dom.num_vertices());
    rep.line("triangles = {}", dom.num_triangles());
    rep.value("h", dom.h());
    rep.value("area", dom.area());
    rep.value("beta", cfg.beta);
    rep.value("inradius", inradius(dom));
    rep.value("lambda_infinity", lambda_infinity(dom, cfg.beta));
    switch (cfg.mode) {
      case Mode::EigenSweep: code = run_eigen_sweep(rep, dom, cfg, log); break;
      case Mode::PoissonSweep: code = run_poisson_sweep(rep, dom, cfg, log, threads); break;
      case Mode::LimitSolve: code = run_limit_solve(rep, dom, cfg, log); break;
      case Mode::Uniqueness: code = run_uniqueness(rep, dom, cfg, log, threads); break;
      case Mode::Check: break;
    }
  }
  const bool passed = std::all_of(rep.assertions().begin(), rep.assertions().end(),
                                  [](const Assertion& a) { return a.pass; });
  if (code == kExitOk && !passed) code = kExitFailed;
  rep.finish(code == kExitOk ? "pass" : code == kExitNotConverged ? "not converged" : "fail");
  out.assertions = rep.assertions();
  out.exit_code = code;
  return out;
}

std::string check_summary(std::uint64_t seed, const std::vector<CheckResult>& results) {
  std::string s = fmt::format("check suite seed = {}\n", seed);
  std::size_t passed = 0;
  for (const auto& r : results) {
    s += fmt::format("{} {}: {}\n", r.pass ? "PASS" : "FAIL", r.name, r.detail);
    passed += r.pass;
  }
  s += fmt::format("{} of {} checks passed\n", passed, results.size());
  return s;
}

namespace {

bool parse_table(const fs::path& path, std::string& why) {
  std::ifstream in(path);
  if (!in) {
    why = "missing";
    return false;
  }
  std::string line;
  if (!std::getline(in, line) || line.empty()) {
    why = "no header";
    return false;
  }
  const auto cols = std::count(line.begin(), line.end(), ',') + 1;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++rows;
    if (std::count(line.begin(), line.end(), ',') + 1 != cols) {
      why = fmt::format("row {} has the wrong number of columns", rows);
      return false;
    }
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      if (cell == "nan" || cell == "inf" || cell == "-inf") continue;
      try {
        parse_number(cell);
      } catch (const std::invalid_argument&) {
        why = fmt::format("row {}: '{}' is not a number", rows, cell);
        return false;
      }
    }
  }
  why = fmt::format("{} rows", rows);
  return true;
}

}  // namespace

ReportVerification verify_report(const fs::path& dir) {
  ReportVerification out;
  std::ifstream in(dir / "report.txt");
  if (!in) {
    out.ok = false;
    out.lines.push_back("missing report.txt in " + dir.string());
    return out;
  }
  std::optional<Domain> dom;
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("artifact = ", 0) != 0) continue;
    std::istringstream ss(line.substr(11));
    std::string file, kind;
    ss >> file >> kind;
    const fs::path path = dir / file;
    bool ok = fs::exists(path);
    std::string why = ok ? "" : "missing";
    try {
      if (ok && kind == "config") {
        const auto cfg = load_config(path.string());
        if (cfg.mode != Mode::Check) dom = build_domain(cfg.domain);
        why = "parses";
      } else if (ok && kind == "field") {
        if (!dom) throw std::runtime_error("no domain to read fields against");
        const auto f = read_field_csv(path.string(), *dom);
        why = fmt::format("{} values", f.size());
      } else if (ok && kind == "table") {
        ok = parse_table(path, why);
      }
    } catch (const std::exception& e) {
      ok = false;
      why = e.what();
    }
    out.ok = out.ok && ok;
    out.lines.push_back(fmt::format("{} {} ({}): {}", ok ? "ok" : "BAD", file, kind, why));
  }
  return out;
}

}  // namespace robin
