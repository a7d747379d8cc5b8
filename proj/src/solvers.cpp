#include "spt/solvers.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>

#include "spt/errors.hpp"
#include "spt/flop_ledger.hpp"

namespace spt {

namespace {

// Constants shared by every method, charged once per solve.
struct Setup {
  double log_rate;  // N ln 2 / m
  double b;
  double gamma_hat;
};

Setup charge_setup(const TransmissionParams& p, FlopLedger& ledger) {
  ledger.charge_once("ln2", 1);
  ledger.charge_once("log_rate", 2);  // N * ln2 / m
  ledger.charge_once("q", 1);         // Q^-1(eps)
  ledger.charge_once("sqrt_m", 1);
  ledger.charge_once("b", 1);
  ledger.charge_once("gamma_hat", 3);  // exp(a + b) - 1
  return {p.log_rate(), p.b(), gamma_hat(p).linear()};
}

double ear_update(double log_rate, double b, double g, FlopLedger& ledger) {
  if (b == 0.0) {
    ledger.charge(2);
    return std::expm1(log_rate);
  }
  const double onep = 1.0 + g;
  const double s = std::sqrt(g * g + 2.0 * g);
  const double den = onep * s;
  const double rho_v = 1.0 / den;
  const double sqrt_v = s / onep;
  const double mu_v = sqrt_v - std::log1p(g) * rho_v;
  ledger.charge(1 + 4 + 1 + 1 + 1 + 3);
  const double num = log_rate + mu_v * b;
  const double shrink = 1.0 - rho_v * b;
  ledger.charge(4 + 1 + 2);
  return std::expm1(num / shrink);
}

double fixed_point_update(double log_rate, double b, double g, FlopLedger& ledger) {
  const double sqrt_v = std::sqrt(g * (g + 2.0)) / (1.0 + g);
  ledger.charge(5 + 2 + 2);
  return std::expm1(log_rate + b * sqrt_v);
}

// Sign-equivalent to the rate residual (scaled by ln 2).
double scaled_residual(double log_rate, double b, double g, FlopLedger& ledger) {
  const double onep = 1.0 + g;
  const double sqrt_v = std::sqrt(g * (g + 2.0)) / onep;
  ledger.charge(9);
  return std::log(onep) - b * sqrt_v - log_rate;
}

TraceEntry make_entry(const TransmissionParams& p, std::size_t iter, double g,
                      const FlopLedger& ledger) {
  return TraceEntry{iter, g, std::numeric_limits<double>::quiet_NaN(),
                    rate_residual(p, Snr(g)), ledger.count()};
}

bool small_change(double prev, double next, double tol) {
  return std::abs(next - prev) <= tol * std::abs(next);
}

void finish(SolverTrace& trace, const FlopLedger& ledger) {
  trace.final = Snr(trace.iterates.back().gamma);
  trace.total_flops = ledger.count();
}

SolverTrace bisect(Method method, const TransmissionParams& params, double tol,
                   std::size_t max_iter) {
  if (!(tol > 0.0)) throw DomainError("tolerance must be positive");
  FlopLedger ledger;
  const Setup s = charge_setup(params, ledger);

  double lo = gamma_bar(params).linear();
  double hi = s.gamma_hat;
  // gamma_hat is exact when b = 0, so allow a few ulps of rounding there.
  const double slack = 8.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, s.log_rate);
  if (scaled_residual(s.log_rate, s.b, hi, ledger) < -slack) {
    throw BracketError("rate at gamma_hat is below the target rate");
  }

  SolverTrace trace{method, {}, false, Snr(), 0};
  double mid = 0.5 * (lo + hi);
  ledger.charge(2);
  trace.iterates.push_back(make_entry(params, 0, mid, ledger));

  for (std::size_t it = 1; it <= max_iter; ++it) {
    if (scaled_residual(s.log_rate, s.b, mid, ledger) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
    const double next = 0.5 * (lo + hi);
    ledger.charge(2);
    const bool stalled = next <= lo || next >= hi;
    mid = next;
    trace.iterates.push_back(make_entry(params, it, mid, ledger));
    if (hi - lo <= tol * mid || stalled) {
      trace.converged = true;
      break;
    }
  }
  finish(trace, ledger);
  if (!trace.converged) {
    throw NoConvergence("bisection did not reach the requested width");
  }
  return trace;
}

}  // namespace

std::string_view to_string(Method method) noexcept {
  switch (method) {
    case Method::Ear:
      return "ear";
    case Method::Bisection:
      return "bisection";
    case Method::FixedPoint:
      return "fixed-point";
    case Method::Reference:
      return "reference";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  if (name == "ear") return Method::Ear;
  if (name == "bisection") return Method::Bisection;
  if (name == "fixed-point" || name == "fixed_point") return Method::FixedPoint;
  if (name == "reference") return Method::Reference;
  throw DomainError("unknown method '" + std::string(name) + "'");
}

void SolverTrace::set_reference(Snr reference) {
  for (auto& e : iterates) e.abs_error = std::abs(e.gamma - reference.linear());
}

std::optional<TraceEntry> SolverTrace::first_within(double abs_tol) const {
  for (const auto& e : iterates) {
    if (e.abs_error <= abs_tol) return e;
  }
  return std::nullopt;
}

Snr ear_step(const TransmissionParams& params, Snr gamma_prev) {
  return ear_step(params, gamma_prev, gamma_bar(params));
}

Snr ear_step(const TransmissionParams& params, Snr gamma_prev, Snr gamma_bar_value) {
  // Relative slack absorbs the rounding of gamma_bar itself.
  if (gamma_prev.linear() < gamma_bar_value.linear() * (1.0 - 1e-12)) {
    throw FeasibilityError("recursion input is below the feasibility threshold gamma_bar");
  }
  if (params.b() > 0.0 && gamma_prev.linear() <= 0.0) {
    throw FeasibilityError("recursion input must be positive when b > 0");
  }
  FlopLedger scratch;
  return Snr(ear_update(params.log_rate(), params.b(), gamma_prev.linear(), scratch));
}

SolverTrace solve_ear(const TransmissionParams& params, double tol, std::size_t max_iter) {
  if (!(tol > 0.0)) throw DomainError("tolerance must be positive");
  FlopLedger ledger;
  const Setup s = charge_setup(params, ledger);

  SolverTrace trace{Method::Ear, {}, false, Snr(), 0};
  double g = s.gamma_hat;
  trace.iterates.push_back(make_entry(params, 0, g, ledger));
  for (std::size_t it = 1; it <= max_iter; ++it) {
    const double next = ear_update(s.log_rate, s.b, g, ledger);
    trace.iterates.push_back(make_entry(params, it, next, ledger));
    if (small_change(g, next, tol)) {
      trace.converged = true;
      break;
    }
    g = next;
  }
  finish(trace, ledger);
  if (!trace.converged) throw NoConvergence("EAR recursion exhausted max_iter");
  return trace;
}

SolverTrace solve_bisection(const TransmissionParams& params, double tol,
                            std::size_t max_iter) {
  return bisect(Method::Bisection, params, tol, max_iter);
}

SolverTrace solve_fixed_point(const TransmissionParams& params, double tol,
                              std::size_t max_iter) {
  if (!(tol > 0.0)) throw DomainError("tolerance must be positive");
  FlopLedger ledger;
  const Setup s = charge_setup(params, ledger);

  SolverTrace trace{Method::FixedPoint, {}, false, Snr(), 0};
  double g = s.gamma_hat;
  trace.iterates.push_back(make_entry(params, 0, g, ledger));
  for (std::size_t it = 1; it <= max_iter; ++it) {
    const double next = fixed_point_update(s.log_rate, s.b, g, ledger);
    trace.iterates.push_back(make_entry(params, it, next, ledger));
    if (small_change(g, next, tol)) {
      trace.converged = true;
      break;
    }
    g = next;
  }
  finish(trace, ledger);
  if (!trace.converged) throw NoConvergence("fixed-point iteration exhausted max_iter");
  return trace;
}

SolverTrace solve_reference(const TransmissionParams& params) {
  return bisect(Method::Reference, params, kDefaultTolerances.reference_rel, 400);
}

Snr minimum_snr(const TransmissionParams& params) { return solve_reference(params).final; }

std::size_t default_max_iter(Method method) noexcept {
  switch (method) {
    case Method::Ear:
      return kDefaultTolerances.ear_max_iter;
    case Method::FixedPoint:
      return kDefaultTolerances.fixed_point_max_iter;
    case Method::Bisection:
    case Method::Reference:
      return kDefaultTolerances.bisection_max_iter;
  }
  return 0;
}

SolverTrace solve(Method method, const TransmissionParams& params, double tol,
                  std::size_t max_iter) {
  switch (method) {
    case Method::Ear:
      return solve_ear(params, tol, max_iter);
    case Method::Bisection:
      return solve_bisection(params, tol, max_iter);
    case Method::FixedPoint:
      return solve_fixed_point(params, tol, max_iter);
    case Method::Reference:
      return solve_reference(params);
  }
  throw DomainError("unknown method");
}

void write_trace_csv(std::ostream& out, std::span<const SolverTrace> traces) {
  out << "method,iter,gamma,abs_error,flops\n";
  char buf[64];
  for (const auto& t : traces) {
    for (const auto& e : t.iterates) {
      out << to_string(t.method) << ',' << e.iter << ',';
      std::snprintf(buf, sizeof buf, "%.17g", e.gamma);
      out << buf << ',';
      std::snprintf(buf, sizeof buf, "%.17g", e.abs_error);
      out << buf << ',' << e.flops << '\n';
    }
  }
}

}  // namespace spt
