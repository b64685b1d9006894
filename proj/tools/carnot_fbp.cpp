// Command-line driver: solve | continuation | eig | singular | oracle | verify | sweep.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

#include "CLI11.hpp"

#include "carnot_fbp/auxiliary.hpp"
#include "carnot_fbp/config.hpp"
#include "carnot_fbp/continuation.hpp"
#include "carnot_fbp/errors.hpp"
#include "carnot_fbp/io.hpp"
#include "carnot_fbp/oracle.hpp"
#include "carnot_fbp/parallel.hpp"
#include "carnot_fbp/suite.hpp"

#ifndef CFBP_DEFAULT_CONFIG
#define CFBP_DEFAULT_CONFIG "configs/default.cfg"
#endif

namespace fs = std::filesystem;
using namespace cfbp;

namespace {

enum Exit { kOk = 0, kUnexpected = 1, kConfig = 2, kSolver = 3, kVerify = 4 };

struct Ctx {
  RunConfig cfg;
  std::string hash;
  fs::path out;
  bool debug = false;
  std::ofstream log_file;

  void log(const std::string& s) {
    std::cerr << s << '\n';
    if (log_file) log_file << s << '\n';
  }
  void debug_log(const std::string& s) {
    if (debug) std::cerr << s << '\n';
    if (log_file) log_file << s << '\n';
  }
  std::string path(const std::string& name) const { return (out / name).string(); }
};

Table table(const Ctx& c, std::string title, std::vector<std::string> columns) {
  Table t;
  t.title = std::move(title);
  t.config_hash = c.hash;
  t.columns = std::move(columns);
  return t;
}

std::vector<std::string> report_columns() {
  return {"branch", "energy_eps", "energy_exact", "residual_sup", "tolerance", "iterations",
          "newton_steps", "morse_index", "m1_estimate", "m2_estimate", "level"};
}
std::vector<double> report_row(int branch, const SolveReport& r) {
  return {static_cast<double>(branch), r.energy_eps, r.energy_exact, r.residual_sup, r.tolerance,
          static_cast<double>(r.iterations), static_cast<double>(r.newton_steps), static_cast<double>(r.morse_index),
          r.m1_estimate, r.m2_estimate, r.level};
}

ContinuationOptions continuation_options(Ctx& c) {
  ContinuationOptions co;
  co.minimize.max_iter = c.cfg.max_iter;
  co.minimize.tol = c.cfg.tol;
  co.mountain.path_points = c.cfg.path_points;
  co.mountain.max_iter = c.cfg.mp_max_iter;
  co.mountain.tol = c.cfg.tol;
  co.seed = c.cfg.seed;
  co.log = [&c](const std::string& s) { c.log(s); };
  return co;
}

void write_stages(Ctx& c, const ContinuationResult& r) {
  Table t = table(c, "continuation stages", stage_table_columns());
  for (const auto& s : r.stages) t.add_row(stage_table_row(s));
  t.write(c.path("stages.csv"));
  write_field_csv(c.path("u0.csv"), r.u0, c.hash, "u0");
  if (r.u1.size()) write_field_csv(c.path("u1.csv"), r.u1, c.hash, "u1");
}

void write_free_boundary(Ctx& c, const Problem& pb, const ContinuationResult& r) {
  const int d = pb.disc->grid->dim();
  std::vector<std::string> cols{"branch"};
  for (int a = 0; a < d; ++a) cols.push_back("x" + std::to_string(a + 1));
  for (int a = 0; a < d; ++a) cols.push_back("n" + std::to_string(a + 1));
  cols.insert(cols.end(), {"grad_plus_sq", "grad_minus_sq", "deviation"});
  Table t = table(c, "free boundary crossings", cols);
  const double eps = r.stages.back().eps;
  for (int b = 0; b < 2; ++b) {
    const ScalarField& u = b ? r.u1 : r.u0;
    if (!u.size()) continue;
    for (const auto& p : extract_free_boundary(pb.disc->group, u, eps).points) {
      std::vector<double> row{static_cast<double>(b)};
      row.insert(row.end(), p.location.begin(), p.location.end());
      row.insert(row.end(), p.normal.begin(), p.normal.end());
      row.insert(row.end(), {p.grad_plus_sq, p.grad_minus_sq, std::abs(p.grad_plus_sq - p.grad_minus_sq - 2.0)});
      t.add_row(row);
    }
  }
  t.write(c.path("free_boundary.csv"));
}

int cmd_solve(Ctx& c) {
  Problem pb = make_problem(c.cfg);
  const double eps = c.cfg.solve_eps > 0.0 ? c.cfg.solve_eps : c.cfg.eps0;
  ContinuationSchedule s;
  s.eps = {eps};
  ContinuationResult r = run_continuation(pb.disc, pb.params, pb.singular, s, continuation_options(c));
  const M1Estimate m1 = estimate_m1(pb.disc, pb.params, pb.ctx, r.v0, {eps}, c.cfg.restarts, c.cfg.seed);
  r.report_u0.m1_estimate = r.report_u1.m1_estimate = m1.m1;
  Table t = table(c, "solve report", report_columns());
  t.add_row(report_row(0, r.report_u0));
  t.add_row(report_row(1, r.report_u1));
  t.write(c.path("solve.csv"));
  write_field_csv(c.path("u0.csv"), r.u0, c.hash, "u0");
  write_field_csv(c.path("u1.csv"), r.u1, c.hash, "u1");
  c.log("m1 estimate " + format_number(m1.m1));
  return kOk;
}

int cmd_continuation(Ctx& c) {
  Problem pb = make_problem(c.cfg);
  ContinuationSchedule s;
  s.eps = c.cfg.schedule();
  const ContinuationResult r = run_continuation(pb.disc, pb.params, pb.singular, s, continuation_options(c));
  write_stages(c, r);
  write_free_boundary(c, pb, r);
  return kOk;
}

int cmd_eig(Ctx& c) {
  const auto disc = make_discretization(c.cfg);
  const Eigenpair e = principal_eigenpair(*disc);
  Table t = table(c, "principal eigenpair", {"lambda1", "residual", "iterations"});
  t.add_row({e.lambda1, e.residual, static_cast<double>(e.iterations)});
  t.write(c.path("eig.csv"));
  write_field_csv(c.path("phi1.csv"), e.phi1, c.hash, "phi1");
  c.log("lambda1 = " + format_number(e.lambda1));
  return kOk;
}

int cmd_singular(Ctx& c) {
  Problem pb = make_problem(c.cfg);
  Table t = table(c, "singular auxiliary solution",
                  {"beta", "delta", "max_u_beta", "residual", "iterations", "lambda1", "beta_star"});
  t.add_row({pb.params.beta, pb.params.delta, pb.singular.u_beta.values().maxCoeff(), pb.singular.residual_norm,
             static_cast<double>(pb.singular.iterations), pb.eig.lambda1, pb.beta_star});
  t.write(c.path("singular.csv"));
  write_field_csv(c.path("u_beta.csv"), pb.singular.u_beta, c.hash, "u_beta");
  return kOk;
}

int cmd_oracle(Ctx& c) {
  if (c.cfg.group != GroupKind::euclid1) throw ConfigError("oracle: only group = euclid1 has a shooting oracle");
  const double L = c.cfg.hi[0] - c.cfg.lo[0];
  const auto disc = make_discretization(c.cfg);
  auto sample = [&](const Profile& p) {
    ScalarField f(disc->grid);
    for (std::size_t n = 0; n < f.size(); ++n) f[n] = p(disc->grid->coord(n, 0) - c.cfg.lo[0]);
    f.apply_dirichlet();
    return f;
  };
  const Profile ps = shoot_singular(c.cfg.model.beta, c.cfg.model.delta, 4000, L);
  write_field_csv(c.path("oracle_u_beta.csv"), sample(ps), c.hash, "u_beta");
  const FreeBoundaryPair fb = shoot_free_boundary(c.cfg.model, 4000, L);
  write_field_csv(c.path("oracle_u0.csv"), sample(fb.u0.profile), c.hash, "u0");
  write_field_csv(c.path("oracle_u1.csv"), sample(fb.u1.profile), c.hash, "u1");
  Table t = table(c, "shooting oracle branches",
                  {"branch", "slope0", "crossing", "slope_outer", "slope_inner", "jump_residual", "max"});
  int b = 0;
  for (const FreeBoundaryShot* s : {&fb.u0, &fb.u1})
    t.add_row({static_cast<double>(b++), s->slope0, s->crossing, s->slope_outer, s->slope_inner, s->jump_residual,
               s->profile.max_value()});
  t.write(c.path("oracle.csv"));
  return kOk;
}

int cmd_verify(Ctx& c) {
  const SuiteReport rep = run_invariant_suite(c.cfg, [&c](const std::string& s) { c.log(s); });
  write_stages(c, rep.run);
  std::ofstream f(c.path("verify.txt"));
  f << "# invariant suite; config_hash=" << c.hash << '\n';
  for (const auto& ch : rep.checks) f << format_check(ch) << '\n';
  const bool ok = rep.passed();
  f << (ok ? "PASSED" : "FAILED") << '\n';
  c.log(ok ? "verify: all gating checks passed" : "verify: FAILED");
  return ok ? kOk : kVerify;
}

int cmd_sweep(Ctx& c) {
  std::vector<double> betas{c.cfg.model.beta};
  betas.insert(betas.end(), c.cfg.betas.begin(), c.cfg.betas.end());
  std::vector<double> lambdas;
  for (int i = 0; i < c.cfg.lambda_count; ++i)
    lambdas.push_back(c.cfg.lambda_min *
                      std::pow(c.cfg.lambda_max / c.cfg.lambda_min, static_cast<double>(i) / (c.cfg.lambda_count - 1)));
  Table scan = table(c, "m1 sweep", {"beta", "lambda", "m1"});
  Table summary = table(c, "lambda* brackets and solution pairs",
                        {"beta", "beta_star", "found", "lambda_lo", "lambda_hi", "lambda_pair", "E_u0", "E_u1",
                         "sup_difference", "ordering_ok"});
  for (double beta : betas) {
    RunConfig cb = c.cfg;
    cb.model.beta = beta;
    Problem pb = make_problem(cb);
    const LambdaSweep sw = locate_lambda_star(pb.disc, pb.params, pb.ctx, pb.singular.u_beta, lambdas, cb.schedule(),
                                              cb.restarts, cb.rel_width, cb.seed);
    for (std::size_t i = 0; i < sw.lambdas.size(); ++i) scan.add_row({beta, sw.lambdas[i], sw.m1[i]});
    std::vector<double> row{beta, pb.beta_star, sw.found ? 1.0 : 0.0, sw.bracket_lo, sw.bracket_hi};
    const double nan = std::nan("");
    if (sw.found) {
      pb.params.lambda = 2.0 * sw.bracket_hi;
      ContinuationSchedule s;
      s.eps = cb.schedule();
      try {
        const ContinuationResult r = run_continuation(pb.disc, pb.params, pb.singular, s, continuation_options(c));
        const OrderingReport o = ordering_check(r.u1, r.u0);
        row.insert(row.end(), {pb.params.lambda, r.stages.back().E_u0, r.stages.back().E_u1, o.sup_difference,
                               o.passed() ? 1.0 : 0.0});
      } catch (const SolverError& e) {
        c.log(std::string("pair run failed: ") + e.what());
        row.insert(row.end(), {pb.params.lambda, nan, nan, nan, 0.0});
      }
    } else {
      row.insert(row.end(), {nan, nan, nan, nan, 0.0});
    }
    summary.add_row(row);
    c.log("beta " + format_number(beta) + ": lambda* in [" + format_number(sw.bracket_lo) + ", " +
          format_number(sw.bracket_hi) + "]" + (sw.found ? "" : " (not found)"));
  }
  scan.write(c.path("sweep.csv"));
  summary.write(c.path("sweep_summary.csv"));
  return kOk;
}

int resolve_threads(std::optional<int> flag, const RunConfig& cfg) {
  if (flag) return *flag;
  if (const char* env = std::getenv("CARNOT_FBP_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*env && *end == '\0' && v > 0) return static_cast<int>(v);
    throw ConfigError(std::string("CARNOT_FBP_THREADS must be a positive integer, got '") + env + "'");
  }
  if (cfg.threads > 0) return cfg.threads;
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-solution free boundary solver on stratified groups"};
  app.require_subcommand(1);
  app.fallthrough(true);
  std::string config_path = CFBP_DEFAULT_CONFIG;
  std::optional<std::string> out;
  std::optional<int> threads;
  std::optional<std::uint64_t> seed;
  std::string level = "";
  app.add_option("--config", config_path, "run configuration (key = value with [sections])");
  app.add_option("--out", out, "output directory");
  app.add_option("--threads", threads, "worker threads (fallback: CARNOT_FBP_THREADS)")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "random seed");
  app.add_option("--log-level", level, "info or debug")->check(CLI::IsMember({"info", "debug"}));

  using Handler = int (*)(Ctx&);
  const std::vector<std::tuple<const char*, const char*, Handler>> cmds = {
      {"solve", "minimizer and mountain-pass point at one eps", cmd_solve},
      {"continuation", "eps continuation with stage table and free boundary", cmd_continuation},
      {"eig", "principal eigenpair", cmd_eig},
      {"singular", "auxiliary singular solution and beta* estimate", cmd_singular},
      {"oracle", "1-D shooting reference profiles", cmd_oracle},
      {"verify", "full invariant suite; exit 4 on failure", cmd_verify},
      {"sweep", "lambda sweep: m1, lambda* bracket, solution pair", cmd_sweep},
  };
  for (const auto& [name, help, fn] : cmds) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    Ctx c;
    c.cfg = parse_config(config_path);
    if (out) c.cfg.out = *out;
    if (seed) c.cfg.seed = *seed;
    if (!level.empty()) c.cfg.log_level = level;
    c.debug = c.cfg.log_level == "debug";
    const int nthreads = resolve_threads(threads, c.cfg);
    set_thread_count(nthreads);
    c.hash = c.cfg.hash();
    c.out = c.cfg.out;
    fs::create_directories(c.out);
    c.log_file.open(c.path("run.log"));
    c.log("config " + config_path + " hash " + c.hash + ", threads " + std::to_string(nthreads));
    c.debug_log(c.cfg.to_text());
    for (const auto& [name, help, fn] : cmds)
      if (app.got_subcommand(name)) return fn(c);
    return kUnexpected;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const InvalidArgument& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return kConfig;
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return kSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUnexpected;
  }
}
