#include "spt/applications.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <thread>

#include "spt/analysis.hpp"
#include "spt/errors.hpp"
#include "spt/solvers.hpp"

namespace spt {

std::string_view to_string(ProblemKind kind) noexcept {
  switch (kind) {
    case ProblemKind::Wsr:
      return "wsr";
    case ProblemKind::PowerMin:
      return "power_min";
    case ProblemKind::EeMax:
      return "ee_max";
  }
  return "?";
}

ProblemKind parse_problem_kind(std::string_view name) {
  if (name == "wsr") return ProblemKind::Wsr;
  if (name == "power_min") return ProblemKind::PowerMin;
  if (name == "ee_max") return ProblemKind::EeMax;
  throw DomainError("unknown problem kind '" + std::string(name) + "'");
}

const char* objective_units(ProblemKind kind) noexcept {
  switch (kind) {
    case ProblemKind::Wsr:
      return "bits";
    case ProblemKind::PowerMin:
      return "watts";
    case ProblemKind::EeMax:
      return "bits/watt";
  }
  return "";
}

bool maximizes(ProblemKind kind) noexcept { return kind != ProblemKind::PowerMin; }

double path_loss_db(double d_m, double fc_ghz) {
  if (!(d_m > 0.0) || !(fc_ghz > 0.0)) throw DomainError("distance and carrier must be positive");
  return 32.4 + 23.0 * std::log10(d_m) + 23.0 * std::log10(fc_ghz);
}

double channel_gain(double d_m, double fc_ghz, double bw_hz, double noise_dbm_hz) {
  if (!(bw_hz > 0.0)) throw DomainError("bandwidth must be positive");
  if (!std::isfinite(noise_dbm_hz)) throw DomainError("noise PSD must be finite");
  const double gain = std::pow(10.0, -path_loss_db(d_m, fc_ghz) / 10.0);
  const double noise_w = std::pow(10.0, (noise_dbm_hz - 30.0) / 10.0) * bw_hz;
  return gain / noise_w;
}

double channel_gain(const LinkSpec& link) {
  return channel_gain(link.d_m, link.fc_ghz, link.bw_hz, link.noise_dbm_hz);
}

namespace {

std::string link_field(std::size_t i, const char* name) {
  return "links[" + std::to_string(i) + "]." + name;
}

void require_eps(double v, const std::string& field, bool allow_half) {
  if (!(v > 0.0) || !(allow_half ? v <= 0.5 : v < 0.5)) {
    throw ScenarioError(field, allow_half ? "must lie in (0, 0.5]" : "must lie in (0, 0.5)");
  }
}

double weight(const Scenario& s, std::size_t i) { return s.weights.empty() ? 1.0 : s.weights[i]; }

double link_eps_wsr(const Scenario& s, std::size_t i) {
  return s.links[i].eps ? *s.links[i].eps : *s.thresholds.eps_th;
}

LinkResult evaluate_link(const LinkSpec& spec, double n, double eps) {
  LinkResult r;
  r.h = channel_gain(spec);
  r.m = spec.m;
  r.n = n;
  r.eps = eps;
  const TransmissionParams p(n, spec.m, eps);
  r.snr = minimum_snr(p).linear();
  r.snr_db = Snr(r.snr).db();
  r.power = spec.m * r.snr / r.h;
  r.residual = rate_residual(p, Snr(r.snr));
  return r;
}

double total_power(const std::vector<LinkResult>& links) {
  double acc = 0.0;
  for (const auto& l : links) acc += l.power;
  return acc;
}

double reliability_loss(const std::vector<LinkResult>& links) {
  double ok = 1.0;
  for (const auto& l : links) ok *= 1.0 - l.eps;
  return 1.0 - ok;
}

AllocationResult finish(const Scenario& s, std::vector<LinkResult> links) {
  AllocationResult r;
  r.kind = s.kind;
  r.links = std::move(links);
  r.reliability_loss = reliability_loss(r.links);
  switch (s.kind) {
    case ProblemKind::Wsr:
      for (std::size_t i = 0; i < r.links.size(); ++i) r.objective += weight(s, i) * r.links[i].n;
      break;
    case ProblemKind::PowerMin:
      r.objective = total_power(r.links);
      break;
    case ProblemKind::EeMax:
      r.objective = r.links.front().n / total_power(r.links);
      break;
  }
  return r;
}

struct EeSetup {
  double m;
  double eps_th;
  double n_lo;
  double n_hi;
  double e_lo;
  double e_hi;
};

EeSetup ee_setup(const Scenario& s) {
  EeSetup e;
  e.m = s.links[0].m;
  e.eps_th = *s.thresholds.eps_th;
  e.n_lo = e.m * *s.thresholds.phi_th;
  e.n_hi = s.thresholds.n_max_bits.value_or(10.0 * e.m);
  if (e.n_lo > e.n_hi) {
    throw Infeasible("spectral-efficiency threshold exceeds the largest admissible packet size");
  }
  e.e_lo = e.eps_th * 1e-6;
  e.e_hi = e.eps_th * (1.0 - 1e-6);
  return e;
}

}  // namespace

void validate_scenario(const Scenario& s) {
  if (s.links.empty()) throw ScenarioError("links", "at least one link is required");
  for (std::size_t i = 0; i < s.links.size(); ++i) {
    const LinkSpec& l = s.links[i];
    if (!(l.d_m > 0.0)) throw ScenarioError(link_field(i, "d_m"), "must be positive");
    if (!(l.fc_ghz > 0.0)) throw ScenarioError(link_field(i, "fc_ghz"), "must be positive");
    if (!(l.bw_hz > 0.0)) throw ScenarioError(link_field(i, "bw_hz"), "must be positive");
    if (!std::isfinite(l.noise_dbm_hz)) throw ScenarioError(link_field(i, "noise_dbm_hz"), "must be finite");
    if (!(l.m > 0.0) || !std::isfinite(l.m)) throw ScenarioError(link_field(i, "m"), "must be positive");
    if (l.n && !(*l.n >= 0.0 && std::isfinite(*l.n))) {
      throw ScenarioError(link_field(i, "n"), "must be nonnegative");
    }
    if (l.eps) require_eps(*l.eps, link_field(i, "eps"), true);
  }
  if (!s.weights.empty()) {
    if (s.weights.size() != s.links.size()) throw ScenarioError("weights", "needs one weight per link");
    for (std::size_t i = 0; i < s.weights.size(); ++i) {
      if (!(s.weights[i] >= 0.0) || !std::isfinite(s.weights[i])) {
        throw ScenarioError("weights[" + std::to_string(i) + "]", "must be nonnegative");
      }
    }
  }
  const Thresholds& t = s.thresholds;
  switch (s.kind) {
    case ProblemKind::Wsr:
      if (!t.p_max_w) throw ScenarioError("thresholds.p_max_w", "required for wsr");
      if (!(*t.p_max_w > 0.0)) throw ScenarioError("thresholds.p_max_w", "must be positive");
      if (t.eps_th) require_eps(*t.eps_th, "thresholds.eps_th", true);
      for (std::size_t i = 0; i < s.links.size(); ++i) {
        if (!s.links[i].eps && !t.eps_th) {
          throw ScenarioError(link_field(i, "eps"), "required when thresholds.eps_th is absent");
        }
      }
      break;
    case ProblemKind::PowerMin:
      if (!t.eps_th) throw ScenarioError("thresholds.eps_th", "required for power_min");
      require_eps(*t.eps_th, "thresholds.eps_th", false);
      for (std::size_t i = 0; i < s.links.size(); ++i) {
        if (!s.links[i].n) throw ScenarioError(link_field(i, "n"), "required for power_min");
      }
      break;
    case ProblemKind::EeMax:
      if (s.links.size() != 2) throw ScenarioError("links", "ee_max needs exactly two hops");
      if (s.links[0].m != s.links[1].m) throw ScenarioError(link_field(1, "m"), "both hops must share m");
      if (!t.eps_th) throw ScenarioError("thresholds.eps_th", "required for ee_max");
      require_eps(*t.eps_th, "thresholds.eps_th", false);
      if (!t.phi_th) throw ScenarioError("thresholds.phi_th", "required for ee_max");
      if (!(*t.phi_th >= 0.0) || !std::isfinite(*t.phi_th)) {
        throw ScenarioError("thresholds.phi_th", "must be nonnegative");
      }
      if (t.n_max_bits && !(*t.n_max_bits > 0.0)) {
        throw ScenarioError("thresholds.n_max_bits", "must be positive");
      }
      break;
  }
}

AllocationResult solve_wsr(const Scenario& s, const MmOptions& options) {
  if (s.kind != ProblemKind::Wsr) throw DomainError("scenario is not a wsr problem");
  validate_scenario(s);
  const double p_max = *s.thresholds.p_max_w;
  const std::size_t L = s.links.size();

  MmProblem pr;
  pr.objective.var_coef.resize(L);
  AffineForm power;
  power.gamma_coef.resize(L);
  power.constant = -p_max;
  double floor_power = 0.0;
  for (std::size_t i = 0; i < L; ++i) {
    const LinkSpec& l = s.links[i];
    const double h = channel_gain(l);
    const double eps = link_eps_wsr(s, i);
    const TransmissionParams p0(0.0, l.m, eps);
    floor_power += l.m * gamma_bar(p0).linear() / h;
    // Packet size reachable with the whole budget on this link alone.
    const double n_cap = std::max(0.0, l.m * achievable_rate(p0, Snr(h * p_max / l.m)));
    pr.variables.push_back({"N" + std::to_string(i + 1), VarKind::N, 0.0, n_cap, 0.0});
    pr.links.push_back({l.m, Source::of(i), Source::fixed(eps)});
    pr.objective.var_coef[i] = -weight(s, i);
    power.gamma_coef[i] = l.m / h;
  }
  if (floor_power > p_max) throw Infeasible("P_max is below the zero-payload power floor");
  pr.constraints.push_back(power);

  const MmState st = mm_solve(pr, DualBisection{}, options);
  std::vector<LinkResult> links;
  for (std::size_t i = 0; i < L; ++i) {
    links.push_back(evaluate_link(s.links[i], st.variables[i], link_eps_wsr(s, i)));
  }
  AllocationResult r = finish(s, std::move(links));
  r.surrogate_objective = -st.objective_value;
  r.rounds = st.round;
  r.history = st.history;
  return r;
}

AllocationResult solve_power_min(const Scenario& s, const MmOptions& options) {
  if (s.kind != ProblemKind::PowerMin) throw DomainError("scenario is not a power_min problem");
  validate_scenario(s);
  const double eps_th = *s.thresholds.eps_th;
  const std::size_t L = s.links.size();

  MmProblem pr;
  pr.objective.gamma_coef.resize(L);
  AffineForm budget;
  budget.var_coef.assign(L, 1.0);
  budget.constant = -eps_th;
  const double lo = eps_th * 1e-6;
  const double hi = eps_th * (1.0 - 1e-6);
  for (std::size_t i = 0; i < L; ++i) {
    const LinkSpec& l = s.links[i];
    const double init = std::clamp(eps_th / static_cast<double>(L) * (1.0 - 1e-12), lo, hi);
    pr.variables.push_back({"eps" + std::to_string(i + 1), VarKind::Eps, lo, hi, init});
    pr.links.push_back({l.m, Source::fixed(*l.n), Source::of(i)});
    pr.objective.gamma_coef[i] = l.m / channel_gain(l);
  }
  if (lo * static_cast<double>(L) > eps_th) throw Infeasible("too many hops for the error budget");
  pr.constraints.push_back(budget);

  const MmState st = mm_solve(pr, ScaledProjectedGradient{}, options);
  std::vector<LinkResult> links;
  for (std::size_t i = 0; i < L; ++i) {
    links.push_back(evaluate_link(s.links[i], *s.links[i].n, st.variables[i]));
  }
  AllocationResult r = finish(s, std::move(links));
  r.surrogate_objective = st.objective_value;
  r.rounds = st.round;
  r.history = st.history;
  return r;
}

AllocationResult solve_ee_max(const Scenario& s, const MmOptions& options) {
  if (s.kind != ProblemKind::EeMax) throw DomainError("scenario is not an ee_max problem");
  validate_scenario(s);
  const EeSetup e = ee_setup(s);
  // The certified bound grows as epsilon shrinks, so eps_th is the binding case.
  const ConvexityCertificate cert = convexity_certificate(TransmissionParams(e.n_lo, e.m, e.eps_th));
  if (!cert.jointly_convex) {
    throw ConvexityNotCertified("sqrt(m) = " + std::to_string(std::sqrt(e.m)) +
                                " exceeds the certified bound " + std::to_string(cert.sqrt_m_bound));
  }

  MmProblem pr;
  pr.variables.push_back({"N", VarKind::N, e.n_lo, e.n_hi, e.n_lo});
  pr.variables.push_back({"eps1", VarKind::Eps, e.e_lo, e.e_hi, 0.5 * e.eps_th});
  pr.links.push_back({e.m, Source::of(0), Source::of(1)});
  pr.links.push_back({e.m, Source::of(0), Source::of(1, -1.0, e.eps_th)});
  AffineForm num;
  num.var_coef = {1.0, 0.0};
  AffineForm den;
  den.gamma_coef = {e.m / channel_gain(s.links[0]), e.m / channel_gain(s.links[1])};

  const DinkelbachState ds =
      dinkelbach_solve(pr, num, den, ScaledProjectedGradient{}, kDefaultTolerances.dinkelbach_rel,
                       kDefaultTolerances.dinkelbach_max_iter, options);
  const double n = ds.inner.variables[0];
  const double eps1 = ds.inner.variables[1];
  std::vector<LinkResult> links{evaluate_link(s.links[0], n, eps1),
                                evaluate_link(s.links[1], n, e.eps_th - eps1)};
  AllocationResult r = finish(s, std::move(links));
  r.surrogate_objective = ds.ratio;
  r.rounds = ds.inner.round;
  r.history = ds.inner.history;
  r.lambdas = ds.lambdas;
  return r;
}

AllocationResult solve_scenario(const Scenario& s, const MmOptions& options) {
  switch (s.kind) {
    case ProblemKind::Wsr:
      return solve_wsr(s, options);
    case ProblemKind::PowerMin:
      return solve_power_min(s, options);
    case ProblemKind::EeMax:
      return solve_ee_max(s, options);
  }
  throw DomainError("unknown problem kind");
}

namespace {

struct Axis {
  double lo;
  double hi;
  bool log;

  double at(std::size_t j, std::size_t steps) const {
    if (steps == 0 || lo == hi) return lo;
    const double t = static_cast<double>(j) / static_cast<double>(steps);
    if (j == steps) return hi;
    return log ? lo * std::pow(hi / lo, t) : lo + (hi - lo) * t;
  }
};

// Objective in minimization form; nullopt marks an infeasible point.
using GridFn = std::function<std::optional<double>(const std::vector<double>&)>;

struct GridBest {
  std::vector<double> x;
  double value = std::numeric_limits<double>::infinity();
  bool found = false;
};

GridBest grid_pass(const std::vector<Axis>& axes, std::size_t steps, const GridFn& f,
                   unsigned threads) {
  const std::size_t per_axis = steps + 1;
  std::size_t total = 1;
  for (std::size_t d = 0; d < axes.size(); ++d) {
    if (total > 200'000'000 / per_axis) throw DomainError("oracle grid is too large");
    total *= per_axis;
  }
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, total));

  struct Local {
    double value = std::numeric_limits<double>::infinity();
    std::size_t index = std::numeric_limits<std::size_t>::max();
  };
  std::vector<Local> locals(threads);
  const auto point = [&](std::size_t idx) {
    std::vector<double> x(axes.size());
    for (std::size_t d = axes.size(); d-- > 0;) {
      x[d] = axes[d].at(idx % per_axis, steps);
      idx /= per_axis;
    }
    return x;
  };
  const auto work = [&](unsigned t) {
    const std::size_t begin = total * t / threads;
    const std::size_t end = total * (t + 1) / threads;
    Local& best = locals[t];
    for (std::size_t idx = begin; idx < end; ++idx) {
      const std::optional<double> v = f(point(idx));
      if (v && *v < best.value) best = {*v, idx};
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(work, t);
  work(0);
  for (auto& th : pool) th.join();

  // Ties resolve to the lowest index, independent of the thread split.
  Local best;
  for (const auto& l : locals) {
    if (l.value < best.value || (l.value == best.value && l.index < best.index)) best = l;
  }
  GridBest out;
  if (best.index != std::numeric_limits<std::size_t>::max()) {
    out.x = point(best.index);
    out.value = best.value;
    out.found = true;
  }
  return out;
}

GridBest grid_search(std::vector<Axis> axes, std::size_t steps, const GridFn& f, unsigned threads) {
  if (steps < 100) throw DomainError("oracle grid needs at least 100 steps per axis");
  GridBest best = grid_pass(axes, steps, f, threads);
  if (!best.found) throw Infeasible("no feasible grid point");
  // One refinement pass over the neighbouring cells of the winner.
  for (std::size_t d = 0; d < axes.size(); ++d) {
    Axis& a = axes[d];
    const double x = best.x[d];
    if (a.lo == a.hi) continue;
    if (a.log) {
      const double step = std::pow(a.hi / a.lo, 1.0 / static_cast<double>(steps));
      a = {std::max(a.lo, x / step), std::min(a.hi, x * step), true};
    } else {
      const double step = (a.hi - a.lo) / static_cast<double>(steps);
      a = {std::max(a.lo, x - step), std::min(a.hi, x + step), false};
    }
  }
  const GridBest fine = grid_pass(axes, steps, f, threads);
  if (fine.found && fine.value < best.value) best = fine;
  return best;
}

double oracle_snr(double n, double m, double eps) {
  return solve_bisection(TransmissionParams(n, m, eps), 1e-12, 400).final.linear();
}

AllocationResult oracle_result(const Scenario& s, std::vector<LinkResult> links, std::size_t steps) {
  AllocationResult r = finish(s, std::move(links));
  r.is_oracle = true;
  r.grid_steps = steps;
  r.surrogate_objective = r.objective;
  return r;
}

}  // namespace

AllocationResult oracle_wsr(const Scenario& s, std::size_t grid_steps, unsigned threads) {
  if (s.kind != ProblemKind::Wsr) throw DomainError("scenario is not a wsr problem");
  validate_scenario(s);
  const double p_max = *s.thresholds.p_max_w;
  const std::size_t L = s.links.size();
  std::vector<Axis> axes;
  std::vector<double> h(L);
  for (std::size_t i = 0; i < L; ++i) {
    const LinkSpec& l = s.links[i];
    h[i] = channel_gain(l);
    const TransmissionParams p0(0.0, l.m, link_eps_wsr(s, i));
    axes.push_back({0.0, std::max(0.0, l.m * achievable_rate(p0, Snr(h[i] * p_max / l.m))), false});
  }
  const GridFn f = [&](const std::vector<double>& n) -> std::optional<double> {
    double power = 0.0;
    double value = 0.0;
    for (std::size_t i = 0; i < L; ++i) {
      power += s.links[i].m * oracle_snr(n[i], s.links[i].m, link_eps_wsr(s, i)) / h[i];
      value -= weight(s, i) * n[i];
    }
    if (power > p_max) return std::nullopt;
    return value;
  };
  const GridBest best = grid_search(axes, grid_steps, f, threads);
  std::vector<LinkResult> links;
  for (std::size_t i = 0; i < L; ++i) links.push_back(evaluate_link(s.links[i], best.x[i], link_eps_wsr(s, i)));
  return oracle_result(s, std::move(links), grid_steps);
}

AllocationResult oracle_power_min(const Scenario& s, std::size_t grid_steps, unsigned threads) {
  if (s.kind != ProblemKind::PowerMin) throw DomainError("scenario is not a power_min problem");
  validate_scenario(s);
  const double eps_th = *s.thresholds.eps_th;
  const double lo = eps_th * 1e-6;
  const double hi = eps_th * (1.0 - 1e-6);
  const std::size_t L = s.links.size();
  std::vector<double> h(L);
  for (std::size_t i = 0; i < L; ++i) h[i] = channel_gain(s.links[i]);

  // Power falls as any eps grows, so the budget is spent in full: the last
  // hop takes whatever the others leave.
  const auto split = [&](const std::vector<double>& head) -> std::optional<std::vector<double>> {
    std::vector<double> eps = head;
    double rest = eps_th;
    for (double e : head) rest -= e;
    if (rest < lo) return std::nullopt;
    eps.push_back(std::min(rest, hi));
    return eps;
  };
  const auto power = [&](const std::vector<double>& eps) {
    double acc = 0.0;
    for (std::size_t i = 0; i < L; ++i) {
      acc += s.links[i].m * oracle_snr(*s.links[i].n, s.links[i].m, eps[i]) / h[i];
    }
    return acc;
  };

  std::vector<double> best_eps;
  if (L == 1) {
    best_eps = {hi};
  } else {
    std::vector<Axis> axes(L - 1, Axis{lo, hi, true});
    const GridFn f = [&](const std::vector<double>& head) -> std::optional<double> {
      const auto eps = split(head);
      if (!eps) return std::nullopt;
      return power(*eps);
    };
    best_eps = *split(grid_search(axes, grid_steps, f, threads).x);
  }
  std::vector<LinkResult> links;
  for (std::size_t i = 0; i < L; ++i) links.push_back(evaluate_link(s.links[i], *s.links[i].n, best_eps[i]));
  return oracle_result(s, std::move(links), grid_steps);
}

AllocationResult oracle_ee_max(const Scenario& s, std::size_t grid_steps, unsigned threads) {
  if (s.kind != ProblemKind::EeMax) throw DomainError("scenario is not an ee_max problem");
  validate_scenario(s);
  const EeSetup e = ee_setup(s);
  const double c1 = e.m / channel_gain(s.links[0]);
  const double c2 = e.m / channel_gain(s.links[1]);
  const GridFn f = [&](const std::vector<double>& x) -> std::optional<double> {
    const double den = c1 * oracle_snr(x[0], e.m, x[1]) + c2 * oracle_snr(x[0], e.m, e.eps_th - x[1]);
    return -x[0] / den;
  };
  const GridBest best =
      grid_search({Axis{e.n_lo, e.n_hi, false}, Axis{e.e_lo, e.e_hi, true}}, grid_steps, f, threads);
  std::vector<LinkResult> links{evaluate_link(s.links[0], best.x[0], best.x[1]),
                                evaluate_link(s.links[1], best.x[0], e.eps_th - best.x[1])};
  return oracle_result(s, std::move(links), grid_steps);
}

AllocationResult oracle_scenario(const Scenario& s, std::size_t grid_steps, unsigned threads) {
  switch (s.kind) {
    case ProblemKind::Wsr:
      return oracle_wsr(s, grid_steps, threads);
    case ProblemKind::PowerMin:
      return oracle_power_min(s, grid_steps, threads);
    case ProblemKind::EeMax:
      return oracle_ee_max(s, grid_steps, threads);
  }
  throw DomainError("unknown problem kind");
}

double oracle_gap(const AllocationResult& candidate, const AllocationResult& oracle) {
  const double scale = std::abs(oracle.objective);
  if (scale == 0.0) return candidate.objective == oracle.objective ? 0.0 : std::numeric_limits<double>::infinity();
  const double diff = maximizes(oracle.kind) ? oracle.objective - candidate.objective
                                             : candidate.objective - oracle.objective;
  return diff / scale;
}

}  // namespace spt
