#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "spt/errors.hpp"
#include "spt/flop_ledger.hpp"
#include "spt/solvers.hpp"
#include "support/oracle.hpp"

using namespace spt;
using spt::testing::rel_diff;

namespace {

constexpr double kGamma320 = 0.36874775685769090234;
constexpr double kGamma100x100 = 1.9893800483751779488;

const TransmissionParams kFig1(320.0, 1000.0, 1e-5);

void check_trace_invariants(const SolverTrace& t) {
  REQUIRE_FALSE(t.iterates.empty());
  for (std::size_t i = 1; i < t.iterates.size(); ++i) {
    CHECK(t.iterates[i].flops > t.iterates[i - 1].flops);
    CHECK(t.iterates[i].iter == i);
  }
  CHECK(t.total_flops == t.iterates.back().flops);
  CHECK(t.final.linear() == t.iterates.back().gamma);
}

}  // namespace

TEST_CASE("FlopLedger charges memoized subexpressions once") {
  FlopLedger ledger;
  ledger.charge();
  ledger.charge(3);
  CHECK(ledger.count() == 4);
  CHECK(ledger.charge_once("N*ln2/m", 3));
  CHECK_FALSE(ledger.charge_once("N*ln2/m", 3));
  CHECK(ledger.memoized("N*ln2/m"));
  CHECK(ledger.count() == 7);
}

TEST_CASE("method names round-trip") {
  for (Method m : {Method::Ear, Method::Bisection, Method::FixedPoint, Method::Reference}) {
    CHECK(parse_method(to_string(m)) == m);
  }
  CHECK(parse_method("fixed_point") == Method::FixedPoint);
  CHECK_THROWS_AS(parse_method("newton"), DomainError);
}

TEST_CASE("ear_step examples") {
  SUBCASE("the minimum SNR is a fixed point") {
    CHECK(rel_diff(ear_step(kFig1, Snr(kGamma320)).linear(), kGamma320) <= 1e-12);
  }
  SUBCASE("b = 0 collapses to Shannon inversion") {
    const TransmissionParams p(320.0, 1000.0, 0.5);
    for (double g : {0.05, 0.5, 3.0}) {
      CHECK(rel_diff(ear_step(p, Snr(g)).linear(), std::exp2(0.32) - 1.0) <= 1e-15);
    }
  }
  SUBCASE("one step from gamma_hat lands strictly between the root and the start") {
    const double start = gamma_hat(kFig1).linear();
    const double next = ear_step(kFig1, Snr(start)).linear();
    CHECK(next > kGamma320);
    CHECK(next < start);
    CHECK(rel_diff(next, 0.36915049874353706475) <= 1e-13);
  }
  SUBCASE("infeasible input") {
    const double floor = gamma_bar(kFig1).linear();
    CHECK_THROWS_AS(ear_step(kFig1, Snr(0.5 * floor)), FeasibilityError);
    CHECK_NOTHROW(ear_step(kFig1, Snr(floor)));
  }
}

TEST_CASE("solve_ear examples") {
  const SolverTrace t = solve_ear(kFig1, 1e-10);
  check_trace_invariants(t);
  CHECK(t.converged);
  CHECK(t.iterations() <= 8);
  CHECK(rel_diff(t.final.linear(), kGamma320) <= 1e-12);

  const SolverTrace shannon = solve_ear(TransmissionParams(320.0, 1000.0, 0.5), 1e-10);
  CHECK(shannon.iterations() == 1);
  CHECK(rel_diff(shannon.final.linear(), std::exp2(0.32) - 1.0) <= 1e-15);

  const SolverTrace short_pkt = solve_ear(TransmissionParams(100, 100, 1e-5), 1e-10);
  CHECK(rel_diff(short_pkt.final.linear(), kGamma100x100) <= 1e-9);

  CHECK_THROWS_AS(solve_ear(kFig1, 1e-300, 1), NoConvergence);
  CHECK_THROWS_AS(solve_ear(kFig1, 0.0), DomainError);
}

TEST_CASE("solve_bisection examples") {
  SUBCASE("Shannon case N = m gives SNR 1") {
    const double tol = 1e-10;
    const SolverTrace t = solve_bisection(TransmissionParams(100, 100, 0.5), tol);
    CHECK(std::abs(t.final.linear() - 1.0) <= tol);
  }
  SUBCASE("iteration count follows the halving arithmetic") {
    for (double tol : {1e-6, 1e-10, 1e-14}) {
      const SolverTrace t = solve_bisection(kFig1, tol);
      const double width = gamma_hat(kFig1).linear() - gamma_bar(kFig1).linear();
      const double expected = std::ceil(std::log2(width / (tol * kGamma320)));
      CAPTURE(tol);
      CHECK(std::abs(static_cast<double>(t.iterations()) - expected) <= 1.0);
      check_trace_invariants(t);
    }
  }
  SUBCASE("reference quality at 1e-14") {
    const SolverTrace t = solve_bisection(kFig1, 1e-14);
    CHECK(rel_diff(t.final.linear(), kGamma320) <= 1e-14);
    const SolverTrace fp = solve_fixed_point(kFig1, 1e-14);
    CHECK(rel_diff(t.final.linear(), fp.final.linear()) <= 1e-9);
  }
  SUBCASE("max_iter exhaustion") {
    CHECK_THROWS_AS(solve_bisection(kFig1, 1e-14, 5), NoConvergence);
  }
}

TEST_CASE("solve_reference") {
  const SolverTrace t = solve_reference(kFig1);
  CHECK(t.method == Method::Reference);
  CHECK(rel_diff(t.final.linear(), kGamma320) <= 4e-16);
  CHECK(rel_diff(minimum_snr(TransmissionParams(100, 100, 1e-5)).linear(), kGamma100x100) <= 1e-15);
}

TEST_CASE("solve_fixed_point examples") {
  const SolverTrace shannon = solve_fixed_point(TransmissionParams(320.0, 1000.0, 0.5), 1e-10);
  CHECK(shannon.iterations() == 1);
  CHECK(rel_diff(shannon.final.linear(), std::exp2(0.32) - 1.0) <= 1e-15);

  SolverTrace t = solve_fixed_point(kFig1, 1e-13);
  check_trace_invariants(t);
  CHECK(rel_diff(t.final.linear(), kGamma320) <= 1e-9);

  // Linear rate: successive error ratios settle to a constant in (0, 1).
  t.set_reference(Snr(kGamma320));
  std::vector<double> ratios;
  for (std::size_t i = 1; i < t.iterates.size(); ++i) {
    const double e0 = t.iterates[i - 1].abs_error;
    const double e1 = t.iterates[i].abs_error;
    if (e1 > 1e-13) ratios.push_back(e1 / e0);
  }
  REQUIRE(ratios.size() >= 5);
  const double last = ratios.back();
  CHECK(last > 0.0);
  CHECK(last < 1.0);
  CHECK(rel_diff(ratios[ratios.size() - 2], last) < 0.05);
  CHECK_THROWS_AS(solve_fixed_point(kFig1, 1e-14, 3), NoConvergence);
}

TEST_CASE("flop cost model per update") {
  // Setup: ln2, N*ln2/m (2 more), Q^-1, sqrt(m), b, gamma_hat (3) = 9 flops.
  const SolverTrace ear = solve_ear(kFig1, 1e-10);
  CHECK(ear.iterates[0].flops == 9);
  CHECK(ear.iterates[1].flops - ear.iterates[0].flops == 18);

  const SolverTrace fp = solve_fixed_point(kFig1, 1e-10);
  CHECK(fp.iterates[0].flops == 9);
  CHECK(fp.iterates[1].flops - fp.iterates[0].flops == 9);

  const SolverTrace bis = solve_bisection(kFig1, 1e-10);
  CHECK(bis.iterates[2].flops - bis.iterates[1].flops == 11);
}

TEST_CASE("property: the minimum SNR is a fixed point of the recursion") {
  spt::testing::ParamSampler sample(2024, 50, 2000, 50, 4000, 1e-9, 0.4);
  for (int i = 0; i < 50; ++i) {
    const auto s = sample();
    const TransmissionParams p(s.n, s.m, s.eps);
    const double root = minimum_snr(p).linear();
    CAPTURE(s.n);
    CAPTURE(s.m);
    CAPTURE(s.eps);
    CHECK(rel_diff(ear_step(p, Snr(root)).linear(), root) <= 1e-11);
    // Independent long double root.
    CHECK(rel_diff(root, static_cast<double>(spt::testing::oracle_gamma(s.n, s.m, s.eps))) <=
          1e-13);
  }
}

TEST_CASE("property: the recursion map is sandwiched between the root and its input") {
  spt::testing::ParamSampler sample(99, 50, 2000, 50, 4000, 1e-9, 0.4);
  for (int i = 0; i < 50; ++i) {
    const auto s = sample();
    const TransmissionParams p(s.n, s.m, s.eps);
    const double root = minimum_snr(p).linear();
    const double top = gamma_hat(p).linear();
    const double floor = gamma_bar(p).linear();
    for (int k = 0; k <= 20; ++k) {
      const double g = root + (top - root) * k / 20.0;
      const double next = ear_step(p, Snr(g)).linear();
      CAPTURE(g);
      CHECK(next >= root * (1.0 - 1e-13));
      CHECK(next <= g * (1.0 + 1e-13));
    }
    // Upper bound on the whole feasible region below the root as well.
    for (int k = 0; k <= 20; ++k) {
      const double g = floor + (root - floor) * k / 20.0;
      if (g <= 0.0) continue;
      CHECK(ear_step(p, Snr(g)).linear() >= root * (1.0 - 1e-13));
    }
  }
}

TEST_CASE("property: traces are monotone and methods agree") {
  spt::testing::ParamSampler sample(5, 50, 2000, 50, 4000, 1e-9, 0.4);
  const double tol = 1e-11;
  for (int i = 0; i < 60; ++i) {
    const auto s = sample();
    const TransmissionParams p(s.n, s.m, s.eps);
    const SolverTrace ear = solve_ear(p, tol);
    const SolverTrace bis = solve_bisection(p, tol);
    const SolverTrace fp = solve_fixed_point(p, tol);
    check_trace_invariants(ear);
    for (std::size_t k = 1; k < ear.iterates.size(); ++k) {
      CHECK(ear.iterates[k].gamma <= ear.iterates[k - 1].gamma * (1.0 + 4e-16));
    }
    const double ref = minimum_snr(p).linear();
    CAPTURE(s.n);
    CAPTURE(s.m);
    CAPTURE(s.eps);
    CHECK(rel_diff(ear.final.linear(), ref) <= 10 * tol);
    CHECK(rel_diff(bis.final.linear(), ref) <= 10 * tol);
    CHECK(rel_diff(fp.final.linear(), ref) <= 10 * tol);
  }
}

TEST_CASE("property: flop counts are deterministic") {
  for (Method m : {Method::Ear, Method::Bisection, Method::FixedPoint, Method::Reference}) {
    const SolverTrace a = solve(m, kFig1, 1e-12, default_max_iter(m));
    const SolverTrace b = solve(m, kFig1, 1e-12, default_max_iter(m));
    CHECK(a.total_flops == b.total_flops);
    CHECK(a.iterates.size() == b.iterates.size());
    CHECK(a.final == b.final);
  }
}

TEST_CASE("trace CSV") {
  SolverTrace t = solve_ear(kFig1, 1e-10);
  t.set_reference(Snr(kGamma320));
  std::ostringstream out;
  const std::vector<SolverTrace> traces{t};
  write_trace_csv(out, traces);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "method,iter,gamma,abs_error,flops");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    CHECK(line.rfind("ear,", 0) == 0);
    ++rows;
  }
  CHECK(rows == t.iterates.size());
  CHECK(out.str().find('\r') == std::string::npos);
}
