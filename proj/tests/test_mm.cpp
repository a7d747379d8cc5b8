#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "spt/errors.hpp"
#include "spt/mm.hpp"
#include "spt/solvers.hpp"
#include "support/oracle.hpp"

using namespace spt;
using spt::testing::rel_diff;

namespace {

double true_gamma(double n, double m, double eps) {
  return solve_bisection(TransmissionParams(n, m, eps), 1e-14).final.linear();
}

// Sum of m_i gamma_i / h_i over links whose epsilon shares a budget.
MmProblem budget_problem(const std::vector<double>& h, const std::vector<double>& n, double m, double eps_th) {
  MmProblem pr;
  AffineForm budget;
  budget.constant = -eps_th;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double init = eps_th / static_cast<double>(h.size()) * (1.0 - 1e-12);
    pr.variables.push_back({"eps" + std::to_string(i), VarKind::Eps, eps_th * 1e-6, eps_th * (1 - 1e-6), init});
    pr.links.push_back({m, Source::fixed(n[i]), Source::of(i)});
    pr.objective.gamma_coef.push_back(m / h[i]);
    budget.var_coef.push_back(1.0);
  }
  pr.constraints.push_back(budget);
  return pr;
}

// Maximize sum of N_i at fixed eps subject to sum m gamma_i / h_i <= p.
MmProblem rate_problem(const std::vector<double>& h, double m, double eps, double p) {
  MmProblem pr;
  AffineForm power;
  power.constant = -p;
  for (std::size_t i = 0; i < h.size(); ++i) {
    pr.variables.push_back({"n" + std::to_string(i), VarKind::N, 0.0, 4.0 * m, 0.0});
    pr.links.push_back({m, Source::of(i), Source::fixed(eps)});
    pr.objective.var_coef.push_back(-1.0);
    power.gamma_coef.push_back(m / h[i]);
  }
  pr.constraints.push_back(power);
  return pr;
}

void check_monotone(const std::vector<RoundRecord>& history) {
  REQUIRE(history.size() >= 2);
  for (std::size_t k = 1; k < history.size(); ++k) {
    const double prev = history[k - 1].objective;
    CHECK(history[k].objective <= prev + 1e-12 * std::max(1.0, std::abs(prev)));
  }
}

}  // namespace

TEST_CASE("no variables: MM reduces to the recursion on one link") {
  MmProblem pr;
  pr.links.push_back({1000.0, Source::fixed(320.0), Source::fixed(1e-5)});
  pr.objective.gamma_coef = {1.0};
  const MmState st = mm_solve(pr, ScaledProjectedGradient{});
  const SolverTrace ear = solve_ear(TransmissionParams(320.0, 1000.0, 1e-5), 1e-14);

  CHECK(st.converged);
  CHECK(rel_diff(st.gamma_dots[0], ear.final.linear()) < 1e-13);
  REQUIRE(st.history.size() >= 3);
  // Round k reports Gamma~ at the k-th bound, i.e. recursion iterate k + 1.
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(rel_diff(st.history[k].objective, ear.iterates[k + 1].gamma) < 1e-14);
  }
}

TEST_CASE("surrogate SNR sits between the true SNR and gamma_dot") {
  spt::testing::ParamSampler sample(11, 50, 2000, 50, 4000, 1e-9, 0.4);
  MmProblem pr;
  pr.variables.push_back({"n", VarKind::N, 0.0, 1e9, 0.0});
  pr.variables.push_back({"e", VarKind::Eps, 1e-12, 0.5, 0.1});
  for (int k = 0; k < 80; ++k) {
    const auto [n, m, eps] = sample();
    const TransmissionParams p(n, m, eps);
    pr.links.assign(1, {m, Source::of(0), Source::of(1)});
    const std::vector<double> x{n, eps};
    const double g = true_gamma(n, m, eps);
    const double hat = gamma_hat(p).linear();
    for (double t : {0.0, 0.01, 0.3, 1.0}) {
      const double gd = g + t * (hat - g);
      const double s = Surrogate(pr, {gd}).gammas(x)[0];
      CHECK(s >= g * (1 - 1e-12));
      CHECK(s <= gd * (1 + 1e-12));
      if (t == 0.0) CHECK(rel_diff(s, g) < 1e-10);
    }
  }
}

TEST_CASE("surrogate derivatives match finite differences") {
  MmProblem pr;
  pr.variables.push_back({"n", VarKind::N, 100.0, 600.0, 300.0});
  pr.variables.push_back({"e", VarKind::Eps, 1e-7, 1e-4, 1e-5});
  pr.links.push_back({1000.0, Source::of(0), Source::of(1)});
  pr.links.push_back({1000.0, Source::of(0), Source::of(1, -1.0, 2e-5)});
  AffineForm f;
  f.var_coef = {0.5, 0.0};
  f.gamma_coef = {2.0, 3.0};
  const Surrogate s(pr, {0.6, 0.6});
  const std::vector<double> x{320.0, 7e-6};
  std::vector<double> grad, hess;
  s.derivatives(f, x, grad, hess);
  REQUIRE(grad.size() == 2);
  REQUIRE(hess.size() == 4);

  const double step[2] = {1e-3 * 320.0, 1e-4 * 7e-6};
  for (std::size_t a = 0; a < 2; ++a) {
    std::vector<double> xp = x, xm = x;
    xp[a] += step[a];
    xm[a] -= step[a];
    const double fd = (s.value(f, xp) - s.value(f, xm)) / (2 * step[a]);
    CHECK(rel_diff(grad[a], fd) < 1e-6);
    std::vector<double> gp, gm, h;
    s.derivatives(f, xp, gp, h);
    s.derivatives(f, xm, gm, h);
    for (std::size_t b = 0; b < 2; ++b) {
      const double fd2 = (gp[b] - gm[b]) / (2 * step[a]);
      CHECK(rel_diff(hess[b * 2 + a], fd2) < 1e-5);
    }
  }
  CHECK(rel_diff(hess[1], hess[2]) < 1e-12);
}

TEST_CASE("budget problem: descent, tightness and optimality") {
  const std::vector<double> h{3.9786e7, 1.6406e6};
  const MmProblem pr = budget_problem(h, {320.0, 320.0}, 1000.0, 1e-5);
  const MmState st = mm_solve(pr, ScaledProjectedGradient{});
  CHECK(st.converged);
  check_monotone(st.history);

  // Settled bounds are the true SNRs.
  const std::vector<double> exact = pr.exact_gammas(st.variables);
  for (std::size_t i = 0; i < exact.size(); ++i) CHECK(rel_diff(st.gamma_dots[i], exact[i]) < 1e-6);

  // Budget is spent and the weak link gets the larger share.
  CHECK(std::abs(st.variables[0] + st.variables[1] - 1e-5) < 1e-13);
  CHECK(st.variables[1] > st.variables[0]);

  // One-dimensional brute force over the split with true SNRs.
  double best = std::numeric_limits<double>::infinity();
  for (int k = 1; k < 4000; ++k) {
    const double e1 = 1e-5 * std::pow(10.0, -4.0 + 4.0 * k / 4000.0);
    const double v = 1000.0 / h[0] * true_gamma(320, 1000, e1) + 1000.0 / h[1] * true_gamma(320, 1000, 1e-5 - e1);
    best = std::min(best, v);
  }
  const double mine = 1000.0 / h[0] * exact[0] + 1000.0 / h[1] * exact[1];
  CHECK(mine <= best * (1 + 1e-9));
}

TEST_CASE("rate problem with dual bisection: power constraint active") {
  const std::vector<double> h{3.9786e7, 1.6406e6};
  const MmProblem pr = rate_problem(h, 1000.0, 1e-5, 2e-4);
  const MmState st = mm_solve(pr, DualBisection{});
  CHECK(st.converged);
  check_monotone(st.history);
  const std::vector<double> g = pr.exact_gammas(st.variables);
  const double power = 1000.0 / h[0] * g[0] + 1000.0 / h[1] * g[1];
  CHECK(power <= 2e-4 * (1 + 1e-9));
  CHECK(power >= 2e-4 * (1 - 1e-6));
}

TEST_CASE("one-step and full recursion reach the same point") {
  const std::vector<double> h{3.9786e7, 1.6406e6, 8.0e6};
  const MmProblem pr = budget_problem(h, {320.0, 200.0, 500.0}, 1000.0, 1e-5);
  MmOptions full;
  full.update = GammaUpdate::FullRecursion;
  const MmState a = mm_solve(pr, ScaledProjectedGradient{});
  const MmState b = mm_solve(pr, ScaledProjectedGradient{}, full);
  check_monotone(b.history);
  CHECK(b.round <= a.round);
  const auto ga = pr.exact_gammas(a.variables), gb = pr.exact_gammas(b.variables);
  const double fa = pr.objective.eval(a.variables, ga), fb = pr.objective.eval(b.variables, gb);
  CHECK(rel_diff(fa, fb) < 1e-8);
}

TEST_CASE("permuting links permutes the solution") {
  const std::vector<double> h{3.9786e7, 1.6406e6, 8.0e6};
  const std::vector<double> n{320.0, 200.0, 500.0};
  const MmState base = mm_solve(budget_problem(h, n, 1000.0, 1e-5), ScaledProjectedGradient{});
  std::vector<std::size_t> perm{0, 1, 2};
  while (std::next_permutation(perm.begin(), perm.end())) {
    std::vector<double> hp, np;
    for (auto i : perm) {
      hp.push_back(h[i]);
      np.push_back(n[i]);
    }
    const MmState st = mm_solve(budget_problem(hp, np, 1000.0, 1e-5), ScaledProjectedGradient{});
    for (std::size_t k = 0; k < 3; ++k) CHECK(rel_diff(st.variables[k], base.variables[perm[k]]) < 1e-7);
    CHECK(rel_diff(st.objective_value, base.objective_value) < 1e-9);
  }
}

TEST_CASE("Dinkelbach with a constant denominator is plain MM") {
  const std::vector<double> h{3.9786e7, 1.6406e6};
  MmProblem base = rate_problem(h, 1000.0, 1e-5, 2e-4);
  AffineForm num;
  num.var_coef = {1.0, 1.0};
  AffineForm den;
  den.constant = 2.0;
  const DinkelbachState d = dinkelbach_solve(base, num, den, DualBisection{});
  const MmState direct = mm_solve(base, DualBisection{});
  CHECK(rel_diff(d.ratio, -direct.objective_value / 2.0) < 1e-8);
  REQUIRE_FALSE(d.lambdas.empty());
  for (std::size_t k = 1; k < d.lambdas.size(); ++k) CHECK(d.lambdas[k] >= d.lambdas[k - 1]);
}

TEST_CASE("Dinkelbach ratio of bits to power: lambda nondecreasing") {
  MmProblem base;
  base.variables.push_back({"n", VarKind::N, 300.0, 10000.0, 300.0});
  base.links.push_back({1000.0, Source::of(0), Source::fixed(1e-5)});
  AffineForm num;
  num.var_coef = {1.0};
  AffineForm den;
  den.gamma_coef = {1.0};
  den.constant = 0.05;
  const DinkelbachState d = dinkelbach_solve(base, num, den, ScaledProjectedGradient{});
  for (std::size_t k = 1; k < d.lambdas.size(); ++k) CHECK(d.lambdas[k] >= d.lambdas[k - 1]);

  double best = 0.0;
  for (int k = 0; k <= 20000; ++k) {
    const double n = 300.0 + (10000.0 - 300.0) * k / 20000.0;
    best = std::max(best, n / (true_gamma(n, 1000, 1e-5) + 0.05));
  }
  CHECK(d.ratio >= best * (1 - 1e-6));
}

TEST_CASE("infeasible start and malformed problems") {
  MmProblem pr;
  pr.variables.push_back({"n", VarKind::N, 300.0, 400.0, 350.0});
  pr.links.push_back({1000.0, Source::of(0), Source::fixed(1e-5)});
  AffineForm cap;
  cap.gamma_coef = {1.0};
  cap.constant = -0.01;
  pr.constraints.push_back(cap);
  CHECK_THROWS_AS(mm_solve(pr, ScaledProjectedGradient{}), InfeasibleStart);

  MmProblem bad = pr;
  bad.constraints[0].gamma_coef = {-1.0};
  CHECK_THROWS_AS(mm_solve(bad, ScaledProjectedGradient{}), DomainError);
  bad = pr;
  bad.variables[0].lower = 500.0;
  CHECK_THROWS_AS(mm_solve(bad, ScaledProjectedGradient{}), DomainError);
  bad = pr;
  bad.links[0].n = Source::of(3);
  CHECK_THROWS_AS(mm_solve(bad, ScaledProjectedGradient{}), DomainError);
}

TEST_CASE("history CSV") {
  std::ostringstream os;
  const std::vector<RoundRecord> h{{0, 1.5, std::numeric_limits<double>::infinity()}, {1, 1.25, 0.5}};
  write_history_csv(os, h);
  const std::string s = os.str();
  CHECK(s.rfind("round,objective,max_delta\n", 0) == 0);
  CHECK(std::count(s.begin(), s.end(), '\n') == 3);
  CHECK(s.find("1,1.25,0.5\n") != std::string::npos);
}
