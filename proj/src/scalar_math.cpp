#include "spt/scalar_math.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "spt/errors.hpp"

namespace spt {

namespace {

// 1/sqrt(2) split into the nearest double and its rounding remainder.
constexpr double kInvSqrt2 = 0.70710678118654757;
constexpr double kInvSqrt2Lo = -4.8336466567264565e-17;

// Lower-tail normal quantile, rational approximation with relative error
// below 1.2e-9 (P. J. Acklam). Refined by Halley steps in q_inv.
double normal_quantile_guess(double p) {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - p_low) {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

void require_positive(Snr g, const char* what) {
  if (!(g.linear() > 0.0)) {
    throw DomainError(std::string(what) + " requires a strictly positive SNR");
  }
}

}  // namespace

Snr::Snr(double linear) : linear_(linear) {
  if (!(linear >= 0.0)) {
    throw DomainError("SNR must be a nonnegative linear ratio");
  }
}

Snr Snr::from_db(double db) { return Snr(std::pow(10.0, db / 10.0)); }

double Snr::db() const noexcept { return 10.0 * std::log10(linear_); }

TransmissionParams::TransmissionParams(double n_bits, double m_symbols, double bler,
                                       const Tolerances& tol)
    : n_bits_(n_bits), m_symbols_(m_symbols), bler_(bler) {
  if (!(n_bits >= 0.0) || !std::isfinite(n_bits)) {
    throw DomainError("packet size N must be finite and nonnegative");
  }
  if (!(m_symbols > 0.0) || !std::isfinite(m_symbols)) {
    throw DomainError("blocklength m must be finite and positive");
  }
  if (!(bler > 0.0 && bler <= 0.5)) {
    throw DomainError("block error rate must lie in (0, 0.5]");
  }
  q_ = bler == 0.5 ? 0.0 : q_inv(bler);
  b_ = q_ / std::sqrt(m_symbols_);
  short_blocklength_ = m_symbols_ <= tol.min_accurate_blocklength;
}

double TransmissionParams::log_rate() const noexcept {
  return n_bits_ * std::numbers::ln2 / m_symbols_;
}

TransmissionParams TransmissionParams::with_n_bits(double n_bits) const {
  return TransmissionParams(n_bits, m_symbols_, bler_);
}

TransmissionParams TransmissionParams::with_bler(double bler) const {
  return TransmissionParams(n_bits_, m_symbols_, bler);
}

double q_func(double x) noexcept {
  // Compensate the rounding of x / sqrt(2); it dominates the tail error.
  const double z = x * kInvSqrt2;
  const double dz = std::fma(x, kInvSqrt2, -z) + x * kInvSqrt2Lo;
  const double base = std::erfc(z);
  const double slope = 2.0 * std::numbers::inv_sqrtpi * std::exp(-z * z);
  return 0.5 * (base - slope * dz);
}

double q_inv(double eps) {
  if (!(eps > 0.0 && eps < 1.0)) {
    throw DomainError("q_inv requires 0 < eps < 1");
  }
  // Q(x) = eps  <=>  Phi(-x) = eps, so solve for the lower-tail quantile y.
  double y = normal_quantile_guess(eps);
  const double sqrt_2pi = std::sqrt(2.0 * std::numbers::pi);
  for (int i = 0; i < 3; ++i) {
    const double err = q_func(-y) - eps;
    const double u = err * sqrt_2pi * std::exp(0.5 * y * y);
    y -= u / (1.0 + 0.5 * y * u);
  }
  return -y;
}

double dispersion(Snr gamma) noexcept {
  const double g = gamma.linear();
  const double onep = 1.0 + g;
  return g * (g + 2.0) / (onep * onep);
}

double sqrt_dispersion(Snr gamma) noexcept {
  const double g = gamma.linear();
  return std::sqrt(g * (g + 2.0)) / (1.0 + g);
}

double achievable_rate(const TransmissionParams& params, Snr gamma) noexcept {
  const double shannon = std::log1p(gamma.linear()) / std::numbers::ln2;
  const double backoff =
      sqrt_dispersion(gamma) / std::sqrt(params.m_symbols()) * params.q() / std::numbers::ln2;
  return shannon - backoff;
}

double rate_residual(const TransmissionParams& params, Snr gamma) noexcept {
  return achievable_rate(params, gamma) - params.rate();
}

double rho(Snr gamma_dot) {
  require_positive(gamma_dot, "rho");
  const double g = gamma_dot.linear();
  return 1.0 / ((1.0 + g) * std::sqrt(g * (g + 2.0)));
}

double mu(Snr gamma_dot) {
  require_positive(gamma_dot, "mu");
  const double g = gamma_dot.linear();
  return sqrt_dispersion(gamma_dot) - std::log1p(g) * rho(gamma_dot);
}

double feasibility_b_limit(Snr gamma_dot) {
  require_positive(gamma_dot, "feasibility_b_limit");
  const double g = gamma_dot.linear();
  return std::log1p(g) * (1.0 + g) / std::sqrt(g * (g + 2.0));
}

Snr gamma_bar(double b, double rel_tol) {
  if (!(b >= 0.0)) throw DomainError("gamma_bar requires b >= 0");
  if (b == 0.0) return Snr(0.0);

  // f < 0 on (0, gamma_bar) and f > 0 beyond it.
  const auto f = [b](double g) {
    return std::log1p(g) - b * std::sqrt(g * (g + 2.0)) / (1.0 + g);
  };
  double lo = 0.0;
  double hi = 1.0;
  while (f(hi) <= 0.0) {
    lo = hi;
    hi *= 2.0;
  }
  for (int i = 0; i < 400; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (f(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= rel_tol * hi) break;
  }
  return Snr(0.5 * (lo + hi));
}

Snr gamma_bar(const TransmissionParams& params) { return gamma_bar(params.b()); }

Snr gamma_hat(const TransmissionParams& params) noexcept {
  return Snr(std::expm1(params.log_rate() + params.b()));
}

}  // namespace spt
