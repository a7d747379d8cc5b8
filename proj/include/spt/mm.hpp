#pragma once

// Majorization-minimization over the recursion surrogate.
//
// A problem has decision variables of kind N (bits) or epsilon (BLER), and
// links whose (N, epsilon) are either fixed or affine in one variable. The
// objective and constraints are affine in the variables and in the per-link
// SNRs, with nonnegative SNR coefficients. Each round replaces every link's
// SNR by the explicit map Gamma~(A, gamma_dot), which upper-bounds the true
// minimum SNR, and minimizes the resulting convex subproblem over A.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spt/config.hpp"
#include "spt/scalar_math.hpp"

namespace spt {

enum class VarKind { N, Eps };

struct Variable {
  std::string name;
  VarKind kind = VarKind::N;
  double lower = 0.0;
  double upper = 0.0;
  double initial = 0.0;
};

/// offset + coef * x[var], or just offset when var is empty.
struct Source {
  double offset = 0.0;
  double coef = 0.0;
  std::optional<std::size_t> var;

  static Source fixed(double value) { return {value, 0.0, std::nullopt}; }
  static Source of(std::size_t v, double coef = 1.0, double offset = 0.0) {
    return {offset, coef, v};
  }
  double value(std::span<const double> x) const { return var ? offset + coef * x[*var] : offset; }
};

struct LinkTemplate {
  double m = 0.0;
  Source n;
  Source eps;
};

/// sum_k var_coef[k] x_k + sum_i gamma_coef[i] gamma_i + constant. Missing
/// trailing coefficients are zero.
struct AffineForm {
  std::vector<double> var_coef;
  std::vector<double> gamma_coef;
  double constant = 0.0;

  double eval(std::span<const double> x, std::span<const double> gammas) const;
  bool has_gamma_terms() const;
};

/// Minimize objective subject to every constraint <= 0 and the variable boxes.
struct MmProblem {
  std::vector<Variable> variables;
  std::vector<LinkTemplate> links;
  AffineForm objective;
  std::vector<AffineForm> constraints;

  /// Throws DomainError on malformed problems (indices, negative SNR
  /// coefficients, inverted boxes, wrong variable kinds).
  void validate() const;
  TransmissionParams link_params(std::size_t link, std::span<const double> x) const;
  /// True minimum SNRs of every link at x.
  std::vector<double> exact_gammas(std::span<const double> x) const;
};

/// The convex subproblem at fixed gamma_dot: SNR i replaced by
/// Gamma~_i(A, gamma_dot_i). Variable boxes are tightened so that every link
/// stays in the recursion's feasible region.
class Surrogate {
 public:
  Surrogate(const MmProblem& problem, std::vector<double> gamma_dots);

  const MmProblem& problem() const noexcept { return *problem_; }
  std::span<const double> gamma_dots() const noexcept { return gamma_dots_; }
  std::span<const double> lower() const noexcept { return lower_; }
  std::span<const double> upper() const noexcept { return upper_; }

  std::vector<double> gammas(std::span<const double> x) const;
  double value(const AffineForm& form, std::span<const double> x) const;

  /// Gradient and row-major Hessian of form(x, Gamma~(x)) in the variables.
  void derivatives(const AffineForm& form, std::span<const double> x, std::vector<double>& grad,
                   std::vector<double>& hessian) const;

  std::vector<double> clamp(std::span<const double> x) const;

 private:
  const MmProblem* problem_;
  std::vector<double> gamma_dots_;
  std::vector<double> lower_;
  std::vector<double> upper_;
};

class SubproblemSolver {
 public:
  virtual ~SubproblemSolver() = default;
  /// Approximate minimizer of the surrogate problem, warm-started at `start`
  /// (already inside the tightened box).
  virtual std::vector<double> solve(const Surrogate& s, std::span<const double> start) const = 0;
};

/// Single SNR-coupled constraint, linear objective, one free N per link with
/// fixed epsilon. The Lagrangian separates into closed-form per-link
/// solutions; the multiplier is found by bisection.
class DualBisection final : public SubproblemSolver {
 public:
  std::vector<double> solve(const Surrogate& s, std::span<const double> start) const override;
};

/// Scaled projected gradient with Armijo backtracking along the projection
/// arc. With only box constraints the scaling is the surrogate Hessian on the
/// variables off their bounds (two-metric projection); with one additional
/// linear constraint it is the Hessian diagonal and the projection is taken in
/// that metric. Constraints with SNR terms are rejected.
class ScaledProjectedGradient final : public SubproblemSolver {
 public:
  explicit ScaledProjectedGradient(std::size_t max_iter = 2000, double tol = 1e-13)
      : max_iter_(max_iter), tol_(tol) {}
  std::vector<double> solve(const Surrogate& s, std::span<const double> start) const override;

 private:
  std::size_t max_iter_;
  double tol_;
};

enum class GammaUpdate {
  OneStep,        // one recursion step per round
  FullRecursion,  // iterate the recursion to convergence each round
};

struct MmOptions {
  double tol = kDefaultTolerances.mm_rel;
  std::size_t max_rounds = kDefaultTolerances.mm_max_rounds;
  GammaUpdate update = GammaUpdate::OneStep;
  /// Warm start for gamma_dot; links whose value is below their feasibility
  /// threshold fall back to gamma_hat.
  std::vector<double> initial_gamma_dots;
  /// Overrides Variable::initial when non-empty.
  std::vector<double> initial_variables;
};

struct RoundRecord {
  std::size_t round = 0;
  double objective = 0.0;
  double max_delta = 0.0;
};

struct MmState {
  std::size_t round = 0;
  std::vector<double> gamma_dots;
  std::vector<double> variables;
  double objective_value = 0.0;
  std::vector<RoundRecord> history;
  bool converged = false;
};

/// Throws InfeasibleStart when the initial point violates a constraint even
/// after the SNR bounds have been tightened onto the true minimum SNRs, and
/// NoConvergence after max_rounds.
MmState mm_solve(const MmProblem& problem, const SubproblemSolver& subsolver,
                 const MmOptions& options = {});

struct DinkelbachState {
  MmState inner;
  std::vector<double> lambdas;
  double ratio = 0.0;
  std::size_t iterations = 0;
};

/// Maximize numerator / denominator over the feasible set of `base` (its
/// objective is ignored). The denominator must be positive there; the
/// numerator may carry only nonpositive SNR coefficients and the denominator
/// only nonnegative ones, so every inner objective -num + lambda den keeps the
/// surrogate structure.
DinkelbachState dinkelbach_solve(const MmProblem& base, const AffineForm& numerator,
                                 const AffineForm& denominator, const SubproblemSolver& subsolver,
                                 double tol = kDefaultTolerances.dinkelbach_rel,
                                 std::size_t max_iter = kDefaultTolerances.dinkelbach_max_iter,
                                 const MmOptions& inner_options = {});

/// round,objective,max_delta
void write_history_csv(std::ostream& out, std::span<const RoundRecord> history);

}  // namespace spt
