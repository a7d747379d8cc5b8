#include "spt/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "spt/errors.hpp"

namespace spt {

namespace {

void require_feasible(const TransmissionParams& params, Snr gamma_dot) {
  const double floor = gamma_bar(params).linear();
  if (gamma_dot.linear() < floor * (1.0 - 1e-12) || gamma_dot.linear() <= 0.0) {
    throw FeasibilityError("gamma_dot is below the feasibility threshold gamma_bar");
  }
}

// Pieces shared by the first and second derivatives.
struct EarParts {
  double k;       // exp of the recursion exponent, i.e. map value + 1
  double shrink;  // 1 - rho b
  double rho;
  double s;       // mu + (N ln2 / m) rho
  double lm;      // ln 2 / m
  double c;       // -d b / d eps = sqrt(2 pi) exp(q^2 / 2) / sqrt(m)
};

EarParts ear_parts(const TransmissionParams& p, Snr g) {
  require_feasible(p, g);
  const double r = rho(g);
  const double u = mu(g);
  const double b = p.b();
  const double shrink = 1.0 - r * b;
  const double k = std::exp((p.log_rate() + u * b) / shrink);
  const double q = p.q();
  const double c = std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * q * q) /
                   std::sqrt(p.m_symbols());
  return {k, shrink, r, u + p.log_rate() * r, std::numbers::ln2 / p.m_symbols(), c};
}

template <class F>
double bisect_decreasing(F&& f, double target, double lo, double hi) {
  // f strictly decreasing; returns x with f(x) = target. Geometric midpoints
  // since the brackets span decades.
  while (f(lo) < target) lo *= 0.5;
  while (f(hi) > target) hi *= 2.0;
  for (int i = 0; i < 300; ++i) {
    const double mid = std::sqrt(lo * hi);
    if (mid <= lo || mid >= hi) break;
    if (f(mid) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo <= 1e-15 * hi) break;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double g1_factor(const TransmissionParams& params, Snr gamma) {
  const double b = params.b();
  if (b == 0.0) return 0.0;
  const double g = gamma.linear();
  if (!(g > 0.0)) throw DomainError("g1_factor requires a positive SNR");
  const double s2 = g * g + 2.0 * g;
  const double s = std::sqrt(s2);
  const double onep = 1.0 + g;
  const double shrink = 1.0 - b / (onep * s);
  if (!(shrink > 0.0)) {
    throw DomainError("g1_factor: 1 - rho(gamma) b is not positive");
  }
  return (2.0 * g * g + 4.0 * g + 1.0) * b / (2.0 * onep * onep * s2 * s * shrink);
}

double corollary_lhs(Snr gamma) {
  const double g = gamma.linear();
  if (!(g > 0.0)) throw DomainError("corollary_lhs requires a positive SNR");
  const double s2 = g * g + 2.0 * g;
  return (2.0 * g * g + 4.0 * g + 1.0) / (2.0 * (1.0 + g) * s2) + 1.0 - s2 / std::log1p(g);
}

double corollary_threshold() {
  static const double root = bisect_decreasing(
      [](double g) { return corollary_lhs(Snr(g)); }, 0.0, 0.01, 10.0);
  return root;
}

EarGradient ear_grad(const TransmissionParams& params, Snr gamma_dot) {
  const EarParts e = ear_parts(params, gamma_dot);
  return {e.k * e.lm / e.shrink, -e.k * e.s / (e.shrink * e.shrink) * e.c};
}

EarHessian ear_hessian(const TransmissionParams& params, Snr gamma_dot) {
  const EarParts e = ear_parts(params, gamma_dot);
  const double d = e.shrink;
  const double d2 = d * d;
  const double c2 = e.c * e.c;
  const double q_sqrt_m = params.q() * std::sqrt(params.m_symbols());

  const double d_nn = e.k * (e.lm / d) * (e.lm / d);
  const double slope = e.s / d2 * e.c;
  const double d_ee =
      e.k * (q_sqrt_m * c2 * e.s / d2 + slope * slope + 2.0 * e.rho * e.s * c2 / (d2 * d));
  const double d_ne = -e.k * e.c * e.lm * (e.rho / d2 + e.s / (d2 * d));
  return {d_nn, d_ee, d_ne};
}

double g3(Snr gamma) {
  const double g = gamma.linear();
  if (!(g > 0.0)) throw DomainError("g3 requires a positive SNR");
  const double s2 = g * g + 2.0 * g;
  const double l = std::log1p(g);
  return l / (s2 * (s2 - l));
}

double gamma_star(double q) {
  if (!(q >= 0.0)) throw DomainError("gamma_star requires q >= 0");
  if (q == 0.0) return std::numeric_limits<double>::infinity();
  return bisect_decreasing([](double g) { return g3(Snr(g)); }, q * q, 1e-6, 10.0);
}

double sqrt_m_bound(double q, double gs) {
  if (std::isinf(gs)) return 0.0;
  return q * std::sqrt(gs * gs + 2.0 * gs) / ((1.0 + gs) * std::log1p(gs));
}

ConvexityCertificate convexity_certificate(const TransmissionParams& params) {
  ConvexityCertificate c;
  c.q = params.q();
  c.gamma_star = gamma_star(c.q);
  c.sqrt_m_bound = sqrt_m_bound(c.q, c.gamma_star);
  c.m_actual = params.m_symbols();
  c.jointly_convex = std::sqrt(c.m_actual) <= c.sqrt_m_bound;
  c.root = minimum_snr(params).linear();
  c.g1_at_root = c.root > 0.0 ? g1_factor(params, Snr(c.root)) : 0.0;
  c.corollary_region = c.root >= corollary_threshold();
  return c;
}

ConvergenceOrder measure_convergence_order(const SolverTrace& trace, Snr reference) {
  const double scale = reference.linear() > 0.0 ? reference.linear() : 1.0;
  const auto usable = [scale](double e) {
    const double rel = e / scale;
    return std::isfinite(rel) && rel >= 1e-12 && rel <= 1.0;
  };

  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t t = 0; t + 1 < trace.iterates.size(); ++t) {
    const double e0 = std::abs(trace.iterates[t].gamma - reference.linear());
    const double e1 = std::abs(trace.iterates[t + 1].gamma - reference.linear());
    if (usable(e0) && usable(e1)) {
      xs.push_back(std::log(e0));
      ys.push_back(std::log(e1));
    }
  }
  const std::size_t n = xs.size();
  if (n < 2) {
    throw InsufficientData("need at least two consecutive iterate pairs above rounding noise");
  }

  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  if (sxx == 0.0) throw InsufficientData("iterate errors do not vary");

  ConvergenceOrder out;
  out.order = sxy / sxx;
  out.pairs = n;
  const double nominal = std::max(1.0, std::round(out.order));
  const std::size_t tail = (n + 1) / 2;
  double acc = 0.0;
  for (std::size_t i = n - tail; i < n; ++i) acc += ys[i] - nominal * xs[i];
  out.factor = std::exp(acc / static_cast<double>(tail));
  return out;
}

}  // namespace spt
