#include "spt/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "spt/analysis.hpp"
#include "spt/applications.hpp"
#include "spt/errors.hpp"
#include "spt/format.hpp"
#include "spt/io.hpp"
#include "spt/solvers.hpp"

namespace spt {

namespace {

using nlohmann::json;

struct Common {
  std::string format = "json";
  std::string output;
};

struct SolveArgs {
  double n = 0.0;
  double m = 0.0;
  double eps = 0.0;
  std::string method = "ear";
  double tol = 0.0;
  std::size_t max_iter = 0;
};

struct CompareArgs {
  double n = 320.0;
  double m = 1000.0;
  double eps = 1e-5;
  std::vector<std::string> methods{"ear", "bisection", "fixed-point"};
  double tol = 1e-14;
  double target = 1e-10;
};

struct AnalyzeArgs {
  double m = 0.0;
  double eps = 0.0;
  std::optional<double> n;
};

struct AppArgs {
  std::string scenario;
  bool oracle = false;
  std::size_t grid_steps = 400;
  unsigned threads = 0;
  std::string update = "one-step";
};

struct SweepArgs {
  std::vector<double> n;
  std::vector<double> m;
  std::vector<double> eps;
  std::string method = "ear";
  double tol = 0.0;
  unsigned threads = 0;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

double default_tol() {
  const char* env = std::getenv("SPT_SNR_TOL");
  if (!env || !*env) return 1e-10;
  char* end = nullptr;
  const double v = std::strtod(env, &end);
  if (end == env || *end != '\0' || !(v > 0.0) || !(v < 1.0)) {
    throw UsageError(std::string("SPT_SNR_TOL must be a number in (0, 1), got '") + env + "'");
  }
  return v;
}

// Writes to --output when given, else to the data stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : out_(&fallback) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw UsageError("cannot open output file '" + path + "'");
      out_ = &file_;
    }
  }
  std::ostream& os() { return *out_; }

 private:
  std::ofstream file_;
  std::ostream* out_;
};

void emit_json(Sink& sink, const json& j) { sink.os() << j.dump(2) << '\n'; }

int cmd_solve(const SolveArgs& a, const Common& c, std::ostream& out) {
  const TransmissionParams p(a.n, a.m, a.eps);
  const Method method = parse_method(a.method);
  const std::size_t max_iter = a.max_iter ? a.max_iter : default_max_iter(method);
  SolverTrace t = method == Method::Reference ? solve_reference(p) : solve(method, p, a.tol, max_iter);
  Sink sink(c.output, out);
  if (c.format == "csv") {
    t.set_reference(minimum_snr(p));
    const std::vector<SolverTrace> traces{t};
    write_trace_csv(sink.os(), traces);
  } else {
    json j = solve_summary(p, t);
    j["tol"] = method == Method::Reference ? kDefaultTolerances.reference_rel : a.tol;
    emit_json(sink, j);
  }
  return kExitOk;
}

int cmd_compare(const CompareArgs& a, const Common& c, std::ostream& out) {
  const TransmissionParams p(a.n, a.m, a.eps);
  const Snr reference = minimum_snr(p);
  std::vector<SolverTrace> traces;
  for (const auto& name : a.methods) {
    const Method m = parse_method(name);
    SolverTrace t = m == Method::Reference ? solve_reference(p) : solve(m, p, a.tol, default_max_iter(m));
    t.set_reference(reference);
    traces.push_back(std::move(t));
  }
  Sink sink(c.output, out);
  if (c.format == "csv") {
    write_trace_csv(sink.os(), traces);
    return kExitOk;
  }
  json methods = json::array();
  for (const auto& t : traces) {
    json iterates = json::array();
    for (const auto& e : t.iterates) {
      iterates.push_back({{"iter", e.iter}, {"gamma", e.gamma}, {"abs_error", e.abs_error}, {"flops", e.flops}});
    }
    const auto hit = t.first_within(a.target);
    methods.push_back({{"method", std::string(to_string(t.method))},
                       {"iterations", t.iterations()},
                       {"flops", t.total_flops},
                       {"final", t.final.linear()},
                       {"iterations_to_target", hit ? json(hit->iter) : json(nullptr)},
                       {"flops_to_target", hit ? json(hit->flops) : json(nullptr)},
                       {"trace", iterates}});
  }
  emit_json(sink, {{"n", a.n},
                   {"m", a.m},
                   {"eps", a.eps},
                   {"reference", reference.linear()},
                   {"target", a.target},
                   {"tol", a.tol},
                   {"methods", methods}});
  return kExitOk;
}

int cmd_analyze(const AnalyzeArgs& a, const Common& c, std::ostream& out) {
  const TransmissionParams p(a.n.value_or(0.0), a.m, a.eps);
  const ConvexityCertificate cert = convexity_certificate(p);
  json j = to_json(cert);
  j["m"] = a.m;
  j["eps"] = a.eps;
  j["n"] = a.n ? json(*a.n) : json(nullptr);
  if (!a.n) {
    j["root"] = nullptr;
    j["g1_at_root"] = nullptr;
    j["corollary_region"] = nullptr;
  }
  Sink sink(c.output, out);
  if (c.format == "csv") {
    sink.os() << "m,eps,q,gamma_star,sqrt_m_bound,jointly_convex\n"
              << format_double(a.m) << ',' << format_double(a.eps) << ',' << format_double(cert.q)
              << ',' << format_double(cert.gamma_star) << ',' << format_double(cert.sqrt_m_bound)
              << ',' << (cert.jointly_convex ? "true" : "false") << '\n';
  } else {
    emit_json(sink, j);
  }
  return kExitOk;
}

int cmd_app(const AppArgs& a, const Common& c, std::istream& in, std::ostream& out) {
  std::string text;
  if (a.scenario == "-") {
    text.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  } else {
    std::ifstream f(a.scenario, std::ios::binary);
    if (!f) throw UsageError("cannot read scenario file '" + a.scenario + "'");
    text.assign(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
  }
  const Scenario s = parse_scenario(std::string_view(text));
  MmOptions opts;
  if (a.update == "full") {
    opts.update = GammaUpdate::FullRecursion;
  } else if (a.update != "one-step") {
    throw UsageError("--update must be one-step or full");
  }
  AllocationResult r = solve_scenario(s, opts);
  std::optional<AllocationResult> o;
  if (a.oracle) {
    o = oracle_scenario(s, a.grid_steps, a.threads);
    r.oracle_gap = oracle_gap(r, *o);
  }
  Sink sink(c.output, out);
  if (c.format == "csv") {
    write_allocation_csv(sink.os(), r);
    if (o) write_allocation_csv(sink.os(), *o, false);
  } else {
    json j{{"scenario", to_json(s)}, {"result", to_json(r)}};
    j["oracle"] = o ? to_json(*o) : json(nullptr);
    emit_json(sink, j);
  }
  return kExitOk;
}

struct SweepRow {
  double n, m, eps;
  std::optional<SolverTrace> trace;
  double residual = 0.0;
  std::string error;
};

int cmd_sweep(const SweepArgs& a, const Common& c, std::ostream& out) {
  const Method method = parse_method(a.method);
  std::vector<SweepRow> rows;
  for (double n : a.n) {
    for (double m : a.m) {
      for (double e : a.eps) rows.push_back({n, m, e, std::nullopt, 0.0, {}});
    }
  }
  unsigned threads = a.threads ? a.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(threads, rows.size())));
  const auto work = [&](unsigned t) {
    for (std::size_t i = t; i < rows.size(); i += threads) {
      SweepRow& r = rows[i];
      try {
        const TransmissionParams p(r.n, r.m, r.eps);
        r.trace = method == Method::Reference ? solve_reference(p)
                                              : solve(method, p, a.tol, default_max_iter(method));
        r.residual = rate_residual(p, r.trace->final);
      } catch (const Error& e) {
        r.error = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(work, t);
  work(0);
  for (auto& th : pool) th.join();

  Sink sink(c.output, out);
  if (c.format == "csv") {
    sink.os() << "index,n,m,eps,method,snr_linear,snr_db,iterations,flops,residual,status\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const SweepRow& r = rows[i];
      sink.os() << i << ',' << format_double(r.n) << ',' << format_double(r.m) << ','
                << format_double(r.eps) << ',' << to_string(method) << ',';
      if (r.trace) {
        sink.os() << format_double(r.trace->final.linear()) << ',' << format_double(r.trace->final.db())
                  << ',' << r.trace->iterations() << ',' << r.trace->total_flops << ','
                  << format_double(r.residual) << ",ok\n";
      } else {
        sink.os() << ",,,,,error\n";
      }
    }
  } else {
    json arr = json::array();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const SweepRow& r = rows[i];
      json j{{"index", i}, {"n", r.n}, {"m", r.m}, {"eps", r.eps}, {"method", std::string(to_string(method))}};
      if (r.trace) {
        j["snr_linear"] = r.trace->final.linear();
        j["snr_db"] = r.trace->final.db();
        j["iterations"] = r.trace->iterations();
        j["flops"] = r.trace->total_flops;
        j["residual"] = r.residual;
        j["error"] = nullptr;
      } else {
        j["error"] = r.error;
      }
      arr.push_back(j);
    }
    emit_json(sink, {{"points", arr}});
  }
  return kExitOk;
}

const CLI::IsMember kMethods({"ear", "bisection", "fixed-point", "reference"});

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
  sub->add_option("--output,-o", c.output, "Write to this file instead of standard output");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Minimum SNR for short-packet transmission: solvers, certificates and allocation", "spt-snr"};
  app.require_subcommand(1, 1);

  Common common;
  SolveArgs solve_args;
  CompareArgs compare_args;
  AnalyzeArgs analyze_args;
  AppArgs app_args;
  SweepArgs sweep_args;
  double analyze_n = 0.0;

  double tol_default = 0.0;
  try {
    tol_default = default_tol();
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  solve_args.tol = tol_default;
  sweep_args.tol = tol_default;

  CLI::App* solve_cmd = app.add_subcommand("solve", "Minimum SNR at one (N, m, eps) point");
  solve_cmd->add_option("--n", solve_args.n, "Packet size in bits")->required();
  solve_cmd->add_option("--m", solve_args.m, "Blocklength in channel uses")->required();
  solve_cmd->add_option("--eps", solve_args.eps, "Target block error rate")->required();
  solve_cmd->add_option("--method", solve_args.method, "ear, bisection, fixed-point or reference")
      ->capture_default_str()
      ->check(kMethods);
  solve_cmd->add_option("--tol", solve_args.tol, "Relative stopping tolerance (default: SPT_SNR_TOL or 1e-10)");
  solve_cmd->add_option("--max-iter", solve_args.max_iter, "Iteration cap (0 = method default)");
  add_common(solve_cmd, common);

  CLI::App* compare_cmd = app.add_subcommand("compare", "Per-iteration error and flop traces of several methods");
  compare_cmd->add_option("--n", compare_args.n)->capture_default_str();
  compare_cmd->add_option("--m", compare_args.m)->capture_default_str();
  compare_cmd->add_option("--eps", compare_args.eps)->capture_default_str();
  compare_cmd->add_option("--methods", compare_args.methods, "Comma-separated method list")->delimiter(',')->check(kMethods);
  compare_cmd->add_option("--tol", compare_args.tol, "Stopping tolerance of every method")->capture_default_str();
  compare_cmd->add_option("--target", compare_args.target, "Absolute error reported as reached")->capture_default_str();
  add_common(compare_cmd, common);
  common.format = "json";

  CLI::App* analyze_cmd = app.add_subcommand("analyze", "Convexity certificate and convergence factor");
  analyze_cmd->add_option("--m", analyze_args.m)->required();
  analyze_cmd->add_option("--eps", analyze_args.eps)->required();
  CLI::Option* n_opt = analyze_cmd->add_option("--n", analyze_n, "Packet size for g1 at the solved root");
  add_common(analyze_cmd, common);

  CLI::App* app_cmd = app.add_subcommand("app", "Solve a resource-allocation scenario");
  app_cmd->add_option("--scenario", app_args.scenario, "Scenario JSON path, or - for standard input")->required();
  app_cmd->add_flag("--oracle", app_args.oracle, "Also run the exhaustive grid oracle");
  app_cmd->add_option("--grid-steps", app_args.grid_steps)->capture_default_str()->check(CLI::Range(100, 100000));
  app_cmd->add_option("--threads", app_args.threads, "Oracle worker threads (0 = all cores)");
  app_cmd->add_option("--update", app_args.update, "one-step or full")->capture_default_str();
  add_common(app_cmd, common);

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Solve a Cartesian grid of parameter points");
  sweep_cmd->add_option("--n", sweep_args.n)->required()->delimiter(',');
  sweep_cmd->add_option("--m", sweep_args.m)->required()->delimiter(',');
  sweep_cmd->add_option("--eps", sweep_args.eps)->required()->delimiter(',');
  sweep_cmd->add_option("--method", sweep_args.method)->capture_default_str()->check(kMethods);
  sweep_cmd->add_option("--tol", sweep_args.tol);
  sweep_cmd->add_option("--threads", sweep_args.threads, "Worker threads (0 = all cores)");
  add_common(sweep_cmd, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }
  if (*compare_cmd && !compare_cmd->count("--format")) common.format = "csv";
  if (*n_opt) analyze_args.n = analyze_n;

  try {
    if (*solve_cmd) return cmd_solve(solve_args, common, out);
    if (*compare_cmd) return cmd_compare(compare_args, common, out);
    if (*analyze_cmd) return cmd_analyze(analyze_args, common, out);
    if (*app_cmd) return cmd_app(app_args, common, in, out);
    if (*sweep_cmd) return cmd_sweep(sweep_args, common, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ScenarioError& e) {
    err << "scenario error at " << e.field() << ": " << e.what() << '\n';
    return kExitScenario;
  } catch (const NoConvergence& e) {
    err << "no convergence: " << e.what() << '\n';
    return kExitNoConvergence;
  } catch (const BracketError& e) {
    err << "no convergence: " << e.what() << '\n';
    return kExitNoConvergence;
  } catch (const Error& e) {
    err << "domain error: " << e.what() << '\n';
    return kExitDomain;
  }
  return kExitUsage;
}

}  // namespace spt
