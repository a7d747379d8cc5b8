#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "spt/config.hpp"
#include "spt/scalar_math.hpp"

namespace spt {

enum class Method { Ear, Bisection, FixedPoint, Reference };

std::string_view to_string(Method method) noexcept;

/// Accepts "ear", "bisection", "fixed-point" (or "fixed_point") and
/// "reference". Throws DomainError otherwise.
Method parse_method(std::string_view name);

struct TraceEntry {
  std::size_t iter = 0;
  double gamma = 0.0;
  /// |gamma - reference|; NaN until SolverTrace::set_reference is called.
  double abs_error = 0.0;
  /// Rate residual achievable_rate(gamma) - N/m in bits per channel use.
  double residual = 0.0;
  std::uint64_t flops = 0;
};

struct SolverTrace {
  Method method = Method::Ear;
  std::vector<TraceEntry> iterates;
  bool converged = false;
  Snr final;
  std::uint64_t total_flops = 0;

  /// Number of update steps, i.e. iterates after the starting point.
  std::size_t iterations() const noexcept {
    return iterates.empty() ? 0 : iterates.size() - 1;
  }

  void set_reference(Snr reference);

  /// First iterate whose abs_error is at most `abs_tol`.
  std::optional<TraceEntry> first_within(double abs_tol) const;
};

/// One application of the exponential-approximation recursion
///   exp((N ln2 / m + mu(g) b) / (1 - rho(g) b)) - 1.
/// Throws FeasibilityError when gamma_prev < gamma_bar(params).
Snr ear_step(const TransmissionParams& params, Snr gamma_prev);

/// Same as ear_step with gamma_bar supplied by the caller.
Snr ear_step(const TransmissionParams& params, Snr gamma_prev, Snr gamma_bar);

/// Recursion from gamma_hat until the relative change drops to `tol`.
SolverTrace solve_ear(const TransmissionParams& params, double tol = 1e-10,
                      std::size_t max_iter = kDefaultTolerances.ear_max_iter);

/// Bisection of the rate residual on [gamma_bar, gamma_hat] until the bracket
/// width is at most tol * gamma.
SolverTrace solve_bisection(const TransmissionParams& params, double tol = 1e-10,
                            std::size_t max_iter = kDefaultTolerances.bisection_max_iter);

/// Linear-rate baseline gamma <- exp(N ln2 / m + b sqrt(V(gamma))) - 1.
SolverTrace solve_fixed_point(const TransmissionParams& params, double tol = 1e-10,
                              std::size_t max_iter = kDefaultTolerances.fixed_point_max_iter);

/// Bisection run to the resolution of double precision.
SolverTrace solve_reference(const TransmissionParams& params);

/// Convenience: the reference minimum SNR Gamma(N, m, epsilon).
Snr minimum_snr(const TransmissionParams& params);

/// Dispatch by method. `tol` and `max_iter` are ignored for Reference.
SolverTrace solve(Method method, const TransmissionParams& params, double tol,
                  std::size_t max_iter);

std::size_t default_max_iter(Method method) noexcept;

/// CSV with header "method,iter,gamma,abs_error,flops", one row per iterate.
void write_trace_csv(std::ostream& out, std::span<const SolverTrace> traces);

}  // namespace spt
