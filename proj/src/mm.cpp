#include "spt/mm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include "spt/analysis.hpp"
#include "spt/errors.hpp"
#include "spt/format.hpp"
#include "spt/solvers.hpp"

namespace spt {

namespace {

double coef_at(const std::vector<double>& v, std::size_t i) { return i < v.size() ? v[i] : 0.0; }

// Constraint slack allowed for rounding: relative to the magnitude of the terms.
double violation(const AffineForm& form, std::span<const double> x, std::span<const double> g) {
  double scale = std::abs(form.constant);
  for (std::size_t k = 0; k < x.size(); ++k) scale += std::abs(coef_at(form.var_coef, k) * x[k]);
  for (std::size_t i = 0; i < g.size(); ++i) scale += std::abs(coef_at(form.gamma_coef, i) * g[i]);
  return form.eval(x, g) - 1e-12 * scale;
}

bool feasible(const MmProblem& p, std::span<const double> x, std::span<const double> g) {
  return std::all_of(p.constraints.begin(), p.constraints.end(),
                     [&](const AffineForm& c) { return violation(c, x, g) <= 0.0; });
}

double max_rel_change(std::span<const double> a, std::span<const double> b,
                      std::span<const double> floor) {
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double scale = std::max({std::abs(a[k]), std::abs(b[k]), floor.empty() ? 0.0 : floor[k]});
    if (scale > 0.0) worst = std::max(worst, std::abs(a[k] - b[k]) / scale);
  }
  return worst;
}

double iterate_to_root(const TransmissionParams& p, double g) {
  const Snr floor = gamma_bar(p);
  for (std::size_t it = 0; it < kDefaultTolerances.ear_max_iter; ++it) {
    const double next = ear_step(p, Snr(g), floor).linear();
    const bool done = std::abs(next - g) <= 1e-15 * next;
    g = next;
    if (done) break;
  }
  return g;
}

}  // namespace

double AffineForm::eval(std::span<const double> x, std::span<const double> gammas) const {
  double acc = constant;
  for (std::size_t k = 0; k < x.size(); ++k) acc += coef_at(var_coef, k) * x[k];
  for (std::size_t i = 0; i < gammas.size(); ++i) acc += coef_at(gamma_coef, i) * gammas[i];
  return acc;
}

bool AffineForm::has_gamma_terms() const {
  return std::any_of(gamma_coef.begin(), gamma_coef.end(), [](double c) { return c != 0.0; });
}

void MmProblem::validate() const {
  const auto check_source = [&](const Source& s, VarKind kind, const char* what) {
    if (!s.var) return;
    if (*s.var >= variables.size()) throw DomainError(std::string(what) + " source index out of range");
    if (variables[*s.var].kind != kind) throw DomainError(std::string(what) + " source has the wrong variable kind");
    if (s.coef == 0.0) throw DomainError(std::string(what) + " source has zero coefficient");
  };
  for (const auto& v : variables) {
    if (!(v.lower <= v.upper)) throw DomainError("variable " + v.name + " has an empty box");
    if (!(v.initial >= v.lower && v.initial <= v.upper)) {
      throw DomainError("variable " + v.name + " starts outside its box");
    }
  }
  for (const auto& l : links) {
    if (!(l.m > 0.0)) throw DomainError("link blocklength must be positive");
    check_source(l.n, VarKind::N, "N");
    check_source(l.eps, VarKind::Eps, "epsilon");
  }
  const auto check_form = [&](const AffineForm& f, const char* what) {
    if (f.var_coef.size() > variables.size() || f.gamma_coef.size() > links.size()) {
      throw DomainError(std::string(what) + " has more coefficients than variables or links");
    }
    for (double c : f.gamma_coef) {
      if (c < 0.0) throw DomainError(std::string(what) + " has a negative SNR coefficient");
    }
  };
  check_form(objective, "objective");
  for (const auto& c : constraints) check_form(c, "constraint");
}

TransmissionParams MmProblem::link_params(std::size_t link, std::span<const double> x) const {
  const LinkTemplate& l = links[link];
  return TransmissionParams(l.n.value(x), l.m, l.eps.value(x));
}

std::vector<double> MmProblem::exact_gammas(std::span<const double> x) const {
  std::vector<double> out(links.size());
  for (std::size_t i = 0; i < links.size(); ++i) out[i] = minimum_snr(link_params(i, x)).linear();
  return out;
}

Surrogate::Surrogate(const MmProblem& problem, std::vector<double> gamma_dots)
    : problem_(&problem), gamma_dots_(std::move(gamma_dots)) {
  for (const auto& v : problem.variables) {
    lower_.push_back(v.lower);
    upper_.push_back(v.upper);
  }
  // gamma_dot >= gamma_bar(eps)  <=>  eps >= Q(sqrt(m) * b_limit(gamma_dot)).
  for (std::size_t i = 0; i < problem.links.size(); ++i) {
    const Source& e = problem.links[i].eps;
    if (!e.var || !(gamma_dots_[i] > 0.0)) continue;
    const double eps_min =
        q_func(std::sqrt(problem.links[i].m) * feasibility_b_limit(Snr(gamma_dots_[i]))) *
        (1.0 + 1e-9);
    const double bound = (eps_min - e.offset) / e.coef;
    if (e.coef > 0.0) {
      lower_[*e.var] = std::max(lower_[*e.var], bound);
    } else {
      upper_[*e.var] = std::min(upper_[*e.var], bound);
    }
    if (lower_[*e.var] > upper_[*e.var]) {
      throw Infeasible("no epsilon keeps link " + std::to_string(i) + " feasible at this SNR bound");
    }
  }
}

std::vector<double> Surrogate::gammas(std::span<const double> x) const {
  std::vector<double> out(gamma_dots_.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = ear_step(problem_->link_params(i, x), Snr(gamma_dots_[i])).linear();
  }
  return out;
}

double Surrogate::value(const AffineForm& form, std::span<const double> x) const {
  return form.eval(x, gammas(x));
}

void Surrogate::derivatives(const AffineForm& form, std::span<const double> x,
                            std::vector<double>& grad, std::vector<double>& hessian) const {
  const std::size_t n = x.size();
  grad.assign(n, 0.0);
  hessian.assign(n * n, 0.0);
  for (std::size_t k = 0; k < n; ++k) grad[k] = coef_at(form.var_coef, k);
  for (std::size_t i = 0; i < problem_->links.size(); ++i) {
    const double w = coef_at(form.gamma_coef, i);
    const LinkTemplate& l = problem_->links[i];
    if (w == 0.0 || (!l.n.var && !l.eps.var)) continue;
    const TransmissionParams p = problem_->link_params(i, x);
    if (p.b() == 0.0) {
      // Shannon map exp(N ln2 / m) - 1; epsilon has no effect.
      if (l.n.var) {
        const std::size_t kn = *l.n.var;
        const double a = std::numbers::ln2 / l.m;
        const double k = std::exp(p.log_rate());
        grad[kn] += w * l.n.coef * a * k;
        hessian[kn * n + kn] += w * l.n.coef * l.n.coef * a * a * k;
      }
      continue;
    }
    const EarGradient d = ear_grad(p, Snr(gamma_dots_[i]));
    const EarHessian h = ear_hessian(p, Snr(gamma_dots_[i]));
    if (l.n.var) {
      const std::size_t kn = *l.n.var;
      grad[kn] += w * l.n.coef * d.d_n;
      hessian[kn * n + kn] += w * l.n.coef * l.n.coef * h.d_nn;
    }
    if (l.eps.var) {
      const std::size_t ke = *l.eps.var;
      grad[ke] += w * l.eps.coef * d.d_eps;
      hessian[ke * n + ke] += w * l.eps.coef * l.eps.coef * h.d_ee;
    }
    if (l.n.var && l.eps.var) {
      const double c = w * l.n.coef * l.eps.coef * h.d_ne;
      hessian[*l.n.var * n + *l.eps.var] += c;
      hessian[*l.eps.var * n + *l.n.var] += c;
    }
  }
}

std::vector<double> Surrogate::clamp(std::span<const double> x) const {
  std::vector<double> out(x.begin(), x.end());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = std::clamp(out[k], lower_[k], upper_[k]);
  return out;
}

std::vector<double> DualBisection::solve(const Surrogate& s, std::span<const double>) const {
  const MmProblem& p = s.problem();
  if (p.constraints.size() != 1 || p.objective.has_gamma_terms()) {
    throw DomainError("dual bisection needs a linear objective and exactly one constraint");
  }
  const AffineForm& con = p.constraints.front();
  const std::size_t nv = p.variables.size();

  // Per variable: the link whose SNR it drives, with Gamma~ = exp(alpha x + beta) - 1.
  std::vector<std::ptrdiff_t> link_of(nv, -1);
  std::vector<double> alpha(nv, 0.0);
  std::vector<double> beta(nv, 0.0);
  double fixed_gamma_terms = 0.0;
  for (std::size_t i = 0; i < p.links.size(); ++i) {
    const LinkTemplate& l = p.links[i];
    if (l.eps.var) throw DomainError("dual bisection requires fixed epsilon on every link");
    const TransmissionParams p0(0.0, l.m, l.eps.offset);
    const double g = s.gamma_dots()[i];
    const double b = p0.b();
    const double shrink = b > 0.0 ? 1.0 - rho(Snr(g)) * b : 1.0;
    const double mub = b > 0.0 ? mu(Snr(g)) * b : 0.0;
    const double l2m = std::numbers::ln2 / l.m;
    if (!l.n.var) {
      fixed_gamma_terms +=
          coef_at(con.gamma_coef, i) * std::expm1((l.n.offset * l2m + mub) / shrink);
      continue;
    }
    const std::size_t k = *l.n.var;
    if (link_of[k] >= 0) throw DomainError("dual bisection requires one link per variable");
    link_of[k] = static_cast<std::ptrdiff_t>(i);
    alpha[k] = l.n.coef * l2m / shrink;
    beta[k] = (l.n.offset * l2m + mub) / shrink;
  }

  const auto lo = s.lower();
  const auto hi = s.upper();
  std::vector<double> x(nv);
  const auto primal = [&](double lambda) {
    for (std::size_t k = 0; k < nv; ++k) {
      const double slope = coef_at(p.objective.var_coef, k) + lambda * coef_at(con.var_coef, k);
      const double w = link_of[k] >= 0 ? coef_at(con.gamma_coef, static_cast<std::size_t>(link_of[k])) : 0.0;
      if (slope >= 0.0) {
        x[k] = lo[k];
      } else if (lambda == 0.0 || w == 0.0) {
        x[k] = hi[k];
      } else {
        const double v = (std::log(-slope / (lambda * w * alpha[k])) - beta[k]) / alpha[k];
        x[k] = std::clamp(v, lo[k], hi[k]);
      }
    }
  };
  const auto g_of = [&](double lambda) {
    primal(lambda);
    double acc = con.constant + fixed_gamma_terms;
    for (std::size_t k = 0; k < nv; ++k) {
      acc += coef_at(con.var_coef, k) * x[k];
      if (link_of[k] >= 0) {
        acc += coef_at(con.gamma_coef, static_cast<std::size_t>(link_of[k])) *
               std::expm1(alpha[k] * x[k] + beta[k]);
      }
    }
    return acc;
  };

  if (g_of(0.0) <= 0.0) return x;
  double lam_hi = 1.0;
  double lam_lo = 0.0;
  int guard = 0;
  while (g_of(lam_hi) > 0.0) {
    lam_lo = lam_hi;
    lam_hi *= 2.0;
    if (++guard > 2100) throw Infeasible("constraint cannot be met inside the variable box");
  }
  if (lam_lo == 0.0) {
    lam_lo = lam_hi;
    while (lam_lo > 0.0 && g_of(lam_lo) <= 0.0) {
      lam_hi = lam_lo;
      lam_lo *= 0.5;
    }
  }
  for (int it = 0; it < 300 && lam_hi - lam_lo > 1e-16 * lam_hi; ++it) {
    const double mid = 0.5 * (lam_lo + lam_hi);
    if (mid <= lam_lo || mid >= lam_hi) break;
    (g_of(mid) > 0.0 ? lam_lo : lam_hi) = mid;
  }
  g_of(lam_hi);
  return x;
}

namespace {

// argmin_z sum_k d_k/2 (z_k - y_k)^2 over the box intersected with a.z <= r.
std::vector<double> metric_projection(std::span<const double> y, std::span<const double> d,
                                      std::span<const double> lo, std::span<const double> hi,
                                      const std::vector<double>* a, double r) {
  std::vector<double> z(y.size());
  const auto at = [&](double nu) {
    double dot = 0.0;
    for (std::size_t k = 0; k < y.size(); ++k) {
      const double ak = a ? coef_at(*a, k) : 0.0;
      z[k] = std::clamp(y[k] - nu * ak / d[k], lo[k], hi[k]);
      dot += ak * z[k];
    }
    return dot;
  };
  if (at(0.0) <= r || !a) return z;
  double nu_lo = 0.0;
  double nu_hi = 1.0;
  int guard = 0;
  while (at(nu_hi) > r) {
    nu_lo = nu_hi;
    nu_hi *= 4.0;
    if (++guard > 1100) throw Infeasible("linear constraint cannot be met inside the variable box");
  }
  for (int it = 0; it < 400 && nu_hi - nu_lo > 1e-16 * nu_hi; ++it) {
    const double mid = 0.5 * (nu_lo + nu_hi);
    if (mid <= nu_lo || mid >= nu_hi) break;
    (at(mid) > r ? nu_lo : nu_hi) = mid;
  }
  at(nu_hi);
  return z;
}

}  // namespace

namespace {

// Solves H d = -g in place on the index set `free` by Cholesky. False when
// the restricted Hessian is not positive definite.
bool newton_direction(const std::vector<double>& hessian, const std::vector<double>& grad,
                      const std::vector<std::size_t>& free, std::vector<double>& d) {
  const std::size_t n = grad.size();
  const std::size_t f = free.size();
  std::vector<double> l(f * f, 0.0);
  for (std::size_t i = 0; i < f; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double acc = hessian[free[i] * n + free[j]];
      for (std::size_t k = 0; k < j; ++k) acc -= l[i * f + k] * l[j * f + k];
      if (i == j) {
        if (!(acc > 0.0)) return false;
        l[i * f + i] = std::sqrt(acc);
      } else {
        l[i * f + j] = acc / l[j * f + j];
      }
    }
  }
  std::vector<double> y(f);
  for (std::size_t i = 0; i < f; ++i) {
    double acc = -grad[free[i]];
    for (std::size_t k = 0; k < i; ++k) acc -= l[i * f + k] * y[k];
    y[i] = acc / l[i * f + i];
  }
  for (std::size_t i = f; i-- > 0;) {
    double acc = y[i];
    for (std::size_t k = i + 1; k < f; ++k) acc -= l[k * f + i] * d[free[k]];
    d[free[i]] = acc / l[i * f + i];
  }
  return true;
}

}  // namespace

std::vector<double> ScaledProjectedGradient::solve(const Surrogate& s,
                                                   std::span<const double> start) const {
  const MmProblem& p = s.problem();
  const std::vector<double>* a = nullptr;
  double r = 0.0;
  for (const auto& c : p.constraints) {
    if (c.has_gamma_terms()) throw DomainError("projected gradient handles only linear constraints");
    if (a) throw DomainError("projected gradient handles at most one linear constraint");
    a = &c.var_coef;
    r = -c.constant;
  }

  const auto lo = s.lower();
  const auto hi = s.upper();
  const std::size_t n = start.size();
  std::vector<double> metric(n);
  // Width-scaled identity metric for the initial feasibility repair.
  for (std::size_t k = 0; k < n; ++k) {
    const double w = std::max(hi[k] - lo[k], 1e-300);
    metric[k] = 1.0 / (w * w);
  }
  std::vector<double> x = metric_projection(s.clamp(start), metric, lo, hi, a, r);

  std::vector<double> grad;
  std::vector<double> hess;
  std::vector<double> dir(n);
  std::vector<double> trial(n);
  std::vector<double> z;
  std::vector<std::size_t> free;
  double f = s.value(p.objective, x);
  for (std::size_t it = 0; it < max_iter_; ++it) {
    s.derivatives(p.objective, x, grad, hess);
    for (std::size_t k = 0; k < n; ++k) {
      const double width = hi[k] - lo[k];
      metric[k] = width > 0.0 ? std::max({hess[k * n + k], std::abs(grad[k]) / width, 1e-300}) : 1.0;
      dir[k] = -grad[k] / metric[k];
    }
    if (!a) {
      // Variables pinned at a bound by the gradient keep the diagonal step;
      // the rest take the Newton step on their block of the Hessian.
      free.clear();
      for (std::size_t k = 0; k < n; ++k) {
        const double slack = 1e-12 * (hi[k] - lo[k]);
        const bool pinned = (x[k] <= lo[k] + slack && grad[k] > 0.0) ||
                            (x[k] >= hi[k] - slack && grad[k] < 0.0) || hi[k] == lo[k];
        if (!pinned) free.push_back(k);
      }
      std::vector<double> newton = dir;
      if (!free.empty() && newton_direction(hess, grad, free, newton)) dir = newton;
    }

    double t = 1.0;
    double f_trial = f;
    bool accepted = false;
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
      for (std::size_t k = 0; k < n; ++k) trial[k] = x[k] + t * dir[k];
      trial = a ? metric_projection(trial, metric, lo, hi, a, r) : s.clamp(trial);
      double slope = 0.0;
      moved = false;
      for (std::size_t k = 0; k < n; ++k) {
        const double dk = trial[k] - x[k];
        slope += grad[k] * dk;
        if (std::abs(dk) > tol_ * std::max(std::abs(x[k]), std::abs(trial[k]))) moved = true;
      }
      if (!moved) break;
      f_trial = s.value(p.objective, trial);
      if (f_trial <= f + 1e-4 * slope) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    x = trial;
    f = f_trial;
  }
  return x;
}

MmState mm_solve(const MmProblem& problem, const SubproblemSolver& subsolver,
                 const MmOptions& options) {
  problem.validate();
  const std::size_t nv = problem.variables.size();
  const std::size_t nl = problem.links.size();
  MmState st;

  st.variables.resize(nv);
  std::vector<double> floor(nv);
  for (std::size_t k = 0; k < nv; ++k) {
    const Variable& v = problem.variables[k];
    const double x0 = options.initial_variables.empty() ? v.initial : options.initial_variables.at(k);
    st.variables[k] = std::clamp(x0, v.lower, v.upper);
    floor[k] = 1e-6 * (v.upper - v.lower);
  }

  st.gamma_dots.resize(nl);
  for (std::size_t i = 0; i < nl; ++i) {
    const TransmissionParams p = problem.link_params(i, st.variables);
    const double warm = i < options.initial_gamma_dots.size() ? options.initial_gamma_dots[i] : -1.0;
    const double bar = gamma_bar(p).linear();
    st.gamma_dots[i] = warm >= bar && warm > 0.0 ? warm : gamma_hat(p).linear();
  }

  const auto step_all = [&](const std::vector<double>& x, const std::vector<double>& gd) {
    std::vector<double> out(nl);
    for (std::size_t i = 0; i < nl; ++i) {
      const TransmissionParams p = problem.link_params(i, x);
      out[i] = options.update == GammaUpdate::FullRecursion
                   ? iterate_to_root(p, gd[i])
                   : ear_step(p, Snr(gd[i])).linear();
    }
    return out;
  };

  // gamma_hat may be too loose for the start to satisfy SNR-coupled
  // constraints; tighten toward the true SNRs before giving up.
  {
    std::vector<double> g = Surrogate(problem, st.gamma_dots).gammas(st.variables);
    std::size_t extra = 0;
    while (!feasible(problem, st.variables, g) && extra < kDefaultTolerances.ear_max_iter) {
      st.gamma_dots = step_all(st.variables, st.gamma_dots);
      g = Surrogate(problem, st.gamma_dots).gammas(st.variables);
      ++extra;
    }
    if (!feasible(problem, st.variables, g)) {
      throw InfeasibleStart("initial point violates a constraint at the true minimum SNRs");
    }
    st.objective_value = problem.objective.eval(st.variables, g);
    st.history.push_back({0, st.objective_value, std::numeric_limits<double>::infinity()});
  }

  for (std::size_t round = 1; round <= options.max_rounds; ++round) {
    std::vector<double> gd = step_all(st.variables, st.gamma_dots);
    const Surrogate s(problem, gd);
    const std::vector<double> start = s.clamp(st.variables);
    std::vector<double> cand = subsolver.solve(s, start);
    const double f_start = s.value(problem.objective, start);
    double f_cand = s.value(problem.objective, cand);
    // Descent-only acceptance: an inexact subsolver never undoes the MM step.
    if (!(f_cand <= f_start) || !feasible(problem, cand, s.gammas(cand))) {
      cand = start;
      f_cand = f_start;
    }
    const double delta = std::max(max_rel_change(st.variables, cand, floor),
                                  max_rel_change(st.gamma_dots, gd, {}));
    st.variables = std::move(cand);
    st.gamma_dots = std::move(gd);
    st.objective_value = f_cand;
    st.round = round;
    st.history.push_back({round, f_cand, delta});
    if (delta <= options.tol) {
      st.converged = true;
      break;
    }
  }
  if (!st.converged) throw NoConvergence("MM did not converge within max_rounds");

  // Settle the SNR bounds onto the true minimum SNRs at the final point.
  for (std::size_t i = 0; i < nl; ++i) {
    st.gamma_dots[i] = iterate_to_root(problem.link_params(i, st.variables), st.gamma_dots[i]);
  }
  return st;
}

DinkelbachState dinkelbach_solve(const MmProblem& base, const AffineForm& numerator,
                                 const AffineForm& denominator, const SubproblemSolver& subsolver,
                                 double tol, std::size_t max_iter, const MmOptions& inner_options) {
  for (double c : numerator.gamma_coef) {
    if (c > 0.0) throw DomainError("numerator SNR coefficients must be nonpositive");
  }
  for (double c : denominator.gamma_coef) {
    if (c < 0.0) throw DomainError("denominator SNR coefficients must be nonnegative");
  }
  MmProblem problem = base;
  problem.objective = {};
  problem.validate();

  const std::size_t nv = problem.variables.size();
  const std::size_t nl = problem.links.size();
  std::vector<double> x(nv);
  for (std::size_t k = 0; k < nv; ++k) {
    x[k] = inner_options.initial_variables.empty() ? problem.variables[k].initial
                                                   : inner_options.initial_variables.at(k);
  }
  std::vector<double> g = problem.exact_gammas(x);
  double den = denominator.eval(x, g);
  if (!(den > 0.0)) throw DomainError("denominator must be positive on the feasible set");

  DinkelbachState out;
  double lambda = numerator.eval(x, g) / den;
  MmOptions opts = inner_options;
  for (std::size_t it = 1; it <= max_iter; ++it) {
    out.lambdas.push_back(lambda);
    AffineForm& obj = problem.objective;
    obj.var_coef.assign(nv, 0.0);
    obj.gamma_coef.assign(nl, 0.0);
    for (std::size_t k = 0; k < nv; ++k) {
      obj.var_coef[k] = -coef_at(numerator.var_coef, k) + lambda * coef_at(denominator.var_coef, k);
    }
    for (std::size_t i = 0; i < nl; ++i) {
      obj.gamma_coef[i] =
          -coef_at(numerator.gamma_coef, i) + lambda * coef_at(denominator.gamma_coef, i);
    }
    obj.constant = -numerator.constant + lambda * denominator.constant;

    opts.initial_variables = x;
    opts.initial_gamma_dots = g;
    MmState st = mm_solve(problem, subsolver, opts);
    const double num = numerator.eval(st.variables, st.gamma_dots);
    den = denominator.eval(st.variables, st.gamma_dots);
    const double gap = num - lambda * den;
    out.iterations = it;
    if (num / den >= lambda || out.inner.variables.empty()) {
      out.inner = std::move(st);
      x = out.inner.variables;
      g = out.inner.gamma_dots;
    }
    if (gap <= tol * std::abs(num)) {
      out.ratio = numerator.eval(x, g) / denominator.eval(x, g);
      return out;
    }
    lambda = num / den;
  }
  throw NoConvergence("Dinkelbach iteration did not converge");
}

void write_history_csv(std::ostream& out, std::span<const RoundRecord> history) {
  out << "round,objective,max_delta\n";
  for (const auto& r : history) {
    out << r.round << ',' << format_double(r.objective) << ',' << format_double(r.max_delta) << '\n';
  }
}

}  // namespace spt
