#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spt/mm.hpp"

namespace spt {

enum class ProblemKind { Wsr, PowerMin, EeMax };

std::string_view to_string(ProblemKind kind) noexcept;
/// Accepts "wsr", "power_min", "ee_max". Throws DomainError otherwise.
ProblemKind parse_problem_kind(std::string_view name);

struct LinkSpec {
  double d_m = 0.0;
  double fc_ghz = 6.0;
  double bw_hz = 60e3;
  double noise_dbm_hz = -174.0;
  double m = 0.0;
  std::optional<double> n;
  std::optional<double> eps;
};

struct Thresholds {
  std::optional<double> p_max_w;
  std::optional<double> eps_th;
  std::optional<double> phi_th;
  std::optional<double> n_max_bits;
};

struct Scenario {
  ProblemKind kind = ProblemKind::Wsr;
  std::vector<LinkSpec> links;
  Thresholds thresholds;
  std::vector<double> weights;  // empty means all ones
};

/// 32.4 + 23 log10(d) + 23 log10(fc) with d in meters and fc in GHz.
double path_loss_db(double d_m, double fc_ghz);

/// Path-loss gain over noise power: 10^(-PL/10) / (10^((psd - 30)/10) * bw).
/// Transmit power times h is the received SNR. Throws DomainError on
/// nonpositive distance, frequency or bandwidth.
double channel_gain(double d_m, double fc_ghz, double bw_hz, double noise_dbm_hz);
double channel_gain(const LinkSpec& link);

struct LinkResult {
  double h = 0.0;
  double m = 0.0;
  double n = 0.0;
  double eps = 0.0;
  double snr = 0.0;       // true minimum SNR at (n, m, eps)
  double snr_db = 0.0;
  double power = 0.0;     // m * snr / h
  double residual = 0.0;  // rate equation residual at snr
};

struct AllocationResult {
  ProblemKind kind = ProblemKind::Wsr;
  std::vector<LinkResult> links;
  /// Objective at the true SNRs: weighted bits (WSR), total power (power
  /// minimization) or bits per unit power (EE).
  double objective = 0.0;
  /// Objective as seen by the optimizer's final surrogate state.
  double surrogate_objective = 0.0;
  /// 1 - prod(1 - eps_i): exact end-to-end error rate of the allocation.
  double reliability_loss = 0.0;
  std::size_t rounds = 0;
  std::vector<RoundRecord> history;
  std::vector<double> lambdas;  // Dinkelbach parameters, EE only
  std::optional<double> oracle_gap;
  bool is_oracle = false;
  std::size_t grid_steps = 0;
};

const char* objective_units(ProblemKind kind) noexcept;
bool maximizes(ProblemKind kind) noexcept;

/// Checks that the fields required by the scenario's kind are present and in
/// range. Throws ScenarioError naming the field.
void validate_scenario(const Scenario& s);

/// max sum alpha_i N_i  s.t.  sum m_i Gamma_i / h_i <= P_max, epsilon fixed.
AllocationResult solve_wsr(const Scenario& s, const MmOptions& options = {});

/// min sum m Gamma_i / h_i  s.t.  sum eps_i <= eps_th, N fixed.
AllocationResult solve_power_min(const Scenario& s, const MmOptions& options = {});

/// max N / sum m Gamma_i / h_i over (N, eps_1) for two hops with
/// eps_2 = eps_th - eps_1 and N >= m phi_th. Throws ConvexityNotCertified
/// when sqrt(m) exceeds the certified bound, Infeasible when phi_th cannot be met.
AllocationResult solve_ee_max(const Scenario& s, const MmOptions& options = {});

AllocationResult solve_scenario(const Scenario& s, const MmOptions& options = {});

/// Exhaustive grid search using true SNRs from bisection at 1e-12, followed by
/// one shrink-and-refine pass around the best cell. grid_steps >= 100.
/// N axes are uniform, epsilon axes log-uniform. threads = 0 uses the hardware
/// concurrency; the result does not depend on the thread count.
AllocationResult oracle_wsr(const Scenario& s, std::size_t grid_steps, unsigned threads = 0);
AllocationResult oracle_power_min(const Scenario& s, std::size_t grid_steps, unsigned threads = 0);
AllocationResult oracle_ee_max(const Scenario& s, std::size_t grid_steps, unsigned threads = 0);
AllocationResult oracle_scenario(const Scenario& s, std::size_t grid_steps, unsigned threads = 0);

/// Relative shortfall of `candidate` against `oracle`: positive when the
/// candidate is worse, negative when it beats the grid.
double oracle_gap(const AllocationResult& candidate, const AllocationResult& oracle);

}  // namespace spt
