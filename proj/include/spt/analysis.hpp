#pragma once

#include <cstddef>
#include <optional>

#include "spt/scalar_math.hpp"
#include "spt/solvers.hpp"

namespace spt {

/// Quadratic convergence factor of the recursion at SNR `gamma`:
///   (2g^2 + 4g + 1) b / (2 (1+g)^2 (g^2+2g)^{3/2} (1 - rho(g) b)).
/// Throws DomainError when 1 - rho(g) b <= 0.
double g1_factor(const TransmissionParams& params, Snr gamma);

/// Left side of the sufficient condition for g1 <= 1 (independent of b):
///   (2g^2+4g+1) / (2(1+g)(g^2+2g)) + 1 - (g^2+2g) / ln(1+g).
/// Strictly decreasing; negative for g above corollary_threshold().
double corollary_lhs(Snr gamma);

/// Root of corollary_lhs, about 0.2485.
double corollary_threshold();

struct EarGradient {
  double d_n = 0.0;    // d/dN of the recursion map at fixed gamma_dot
  double d_eps = 0.0;  // d/d epsilon at fixed gamma_dot
};

struct EarHessian {
  double d_nn = 0.0;
  double d_ee = 0.0;
  double d_ne = 0.0;

  double determinant() const noexcept { return d_nn * d_ee - d_ne * d_ne; }
};

/// Partial derivatives of the recursion map with respect to N and epsilon,
/// holding gamma_dot fixed. Throws FeasibilityError below gamma_bar.
EarGradient ear_grad(const TransmissionParams& params, Snr gamma_dot);
EarHessian ear_hessian(const TransmissionParams& params, Snr gamma_dot);

/// ln(1+g) / ((g^2+2g)((g^2+2g) - ln(1+g))), strictly decreasing in g.
double g3(Snr gamma);

/// Root of q^2 = g3(gamma*). +inf when q = 0.
double gamma_star(double q);

/// q sqrt(g^2+2g) / ((1+g) ln(1+g)) evaluated at g = gamma*: the largest
/// sqrt(m) for which joint convexity in (N, epsilon) is certified.
double sqrt_m_bound(double q, double gamma_star_value);

struct ConvexityCertificate {
  double q = 0.0;
  double gamma_star = 0.0;
  double sqrt_m_bound = 0.0;
  double m_actual = 0.0;
  bool jointly_convex = false;
  /// Minimum SNR of the parameter point and g1 evaluated there.
  double root = 0.0;
  double g1_at_root = 0.0;
  /// root >= corollary_threshold(), the region where g1 <= 1 is guaranteed.
  bool corollary_region = false;
};

ConvexityCertificate convexity_certificate(const TransmissionParams& params);

struct ConvergenceOrder {
  double order = 0.0;
  double factor = 0.0;
  std::size_t pairs = 0;
};

/// Least-squares fit of log e_{t+1} = p log e_t + log Q over consecutive
/// iterates whose relative error lies in [1e-12, 1]. The factor is the
/// geometric mean of e_{t+1} / e_t^round(p) over the trailing half of those
/// pairs, i.e. the observable limit ratio. Throws InsufficientData with
/// fewer than two usable pairs.
ConvergenceOrder measure_convergence_order(const SolverTrace& trace, Snr reference);

}  // namespace spt
