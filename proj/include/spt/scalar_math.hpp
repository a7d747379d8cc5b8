#pragma once

#include <compare>

#include "spt/config.hpp"

namespace spt {

/// Signal-to-noise ratio as a linear power ratio.
class Snr {
 public:
  constexpr Snr() = default;

  /// Throws DomainError for negative or NaN values.
  explicit Snr(double linear);

  static Snr from_db(double db);

  constexpr double linear() const noexcept { return linear_; }
  double db() const noexcept;

  friend constexpr auto operator<=>(const Snr&, const Snr&) = default;

 private:
  double linear_ = 0.0;
};

/// Packet size N, blocklength m and target block error rate epsilon, together
/// with the cached coefficients q = Q^-1(epsilon) and b = q / sqrt(m).
///
/// The rate model is only meaningful for 0 < epsilon <= 0.5; epsilon = 0.5 is
/// the degenerate b = 0 case in which the finite-blocklength backoff vanishes.
class TransmissionParams {
 public:
  /// Throws DomainError if n_bits < 0, m_symbols <= 0, or epsilon is outside
  /// (0, 0.5].
  TransmissionParams(double n_bits, double m_symbols, double bler,
                     const Tolerances& tol = kDefaultTolerances);

  double n_bits() const noexcept { return n_bits_; }
  double m_symbols() const noexcept { return m_symbols_; }
  double bler() const noexcept { return bler_; }
  double q() const noexcept { return q_; }
  double b() const noexcept { return b_; }

  /// Target spectral efficiency N / m in bits per channel use.
  double rate() const noexcept { return n_bits_ / m_symbols_; }

  /// N ln 2 / m, the constant numerator term of the recursion.
  double log_rate() const noexcept;

  /// Set when m is short enough that the normal approximation is inaccurate.
  bool short_blocklength() const noexcept { return short_blocklength_; }

  TransmissionParams with_n_bits(double n_bits) const;
  TransmissionParams with_bler(double bler) const;

 private:
  double n_bits_;
  double m_symbols_;
  double bler_;
  double q_;
  double b_;
  bool short_blocklength_;
};

/// Gaussian tail probability Q(x) = P(Z > x).
double q_func(double x) noexcept;

/// Inverse of q_func on (0, 1). Throws DomainError outside that interval.
double q_inv(double eps);

/// Channel dispersion V = 1 - 1/(1 + gamma)^2.
double dispersion(Snr gamma) noexcept;

/// sqrt(V), evaluated without the cancellation of the textbook form.
double sqrt_dispersion(Snr gamma) noexcept;

/// Normal-approximation achievable rate in bits per channel use.
double achievable_rate(const TransmissionParams& params, Snr gamma) noexcept;

/// achievable_rate(params, gamma) - N/m. Zero at the minimum SNR.
double rate_residual(const TransmissionParams& params, Snr gamma) noexcept;

/// 1 / ((1 + g) sqrt(g^2 + 2g)). Throws DomainError for g <= 0.
double rho(Snr gamma_dot);

/// sqrt(V(g)) - ln(1 + g) rho(g). Throws DomainError for g <= 0.
double mu(Snr gamma_dot);

/// Largest b for which gamma_dot is still feasible, i.e. gamma_bar(b) <= g:
/// ln(1 + g)(1 + g) / sqrt(g^2 + 2g).
double feasibility_b_limit(Snr gamma_dot);

/// Threshold SNR gamma_bar solving ln(1 + g) = b sqrt(g^2 + 2g) / (1 + g),
/// which is also Gamma(0, m, epsilon). Returns 0 for b = 0.
Snr gamma_bar(double b, double rel_tol = 1e-15);
Snr gamma_bar(const TransmissionParams& params);

/// Closed-form starting point exp(N ln 2 / m + b) - 1, an upper bound on the
/// minimum SNR.
Snr gamma_hat(const TransmissionParams& params) noexcept;

}  // namespace spt
