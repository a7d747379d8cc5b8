#include <algorithm>
#include <cstdio>
#include <iterator>
#include <map>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "spt/cli.hpp"

using nlohmann::json;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args, const std::string& stdin_text = "") {
  args.insert(args.begin(), "spt-snr");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::istringstream in(stdin_text);
  std::ostringstream out, err;
  Run r;
  r.code = spt::run_cli(static_cast<int>(argv.size()), argv.data(), in, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string scenario(const char* name) { return std::string(SPT_SOURCE_DIR) + "/scenarios/" + name; }

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("solve prints a converged summary") {
  const Run r = run({"solve", "--n", "320", "--m", "1000", "--eps", "1e-5", "--method", "ear"});
  REQUIRE(r.code == spt::kExitOk);
  const json j = json::parse(r.out);
  CHECK(j["converged"] == true);
  CHECK(j["iterations"].get<int>() <= 8);
  CHECK(j["snr_linear"].get<double>() == doctest::Approx(0.36874775685769090).epsilon(1e-10));
  CHECK(j["method"] == "ear");
}

TEST_CASE("solve: Shannon case gives exactly one") {
  const Run r = run({"solve", "--n", "100", "--m", "100", "--eps", "0.5", "--method", "ear"});
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out)["snr_linear"].get<double>() == 1.0);
}

TEST_CASE("exit codes") {
  CHECK(run({"solve", "--n", "320", "--m", "1000", "--eps", "0.7"}).code == spt::kExitDomain);
  CHECK(run({"solve", "--n", "320", "--m", "1000", "--eps", "1e-5", "--bogus"}).code == spt::kExitUsage);
  CHECK(run({"solve", "--n", "320"}).code == spt::kExitUsage);
  CHECK(run({}).code == spt::kExitUsage);
  CHECK(run({"compare", "--methods", "ear,newton"}).code == spt::kExitUsage);
  CHECK(run({"solve", "--n", "320", "--m", "1000", "--eps", "1e-5", "--method", "newton"}).code == spt::kExitUsage);
  CHECK(run({"solve", "--n", "320", "--m", "1000", "--eps", "1e-5", "--method", "bisection", "--max-iter", "3"}).code ==
        spt::kExitNoConvergence);
  const Run help = run({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("solve") != std::string::npos);

  const Run missing = run({"app", "--scenario", "-"}, R"({"kind": "wsr", "links": []})");
  CHECK(missing.code == spt::kExitScenario);
  CHECK(missing.err.find("thresholds") != std::string::npos);
  CHECK(run({"app", "--scenario", "-"}, "{").code == spt::kExitScenario);
}

TEST_CASE("compare: EAR reaches the target first") {
  const Run r = run({"compare", "--format", "json"});
  REQUIRE(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j["m"] == 1000.0);
  CHECK(j["eps"] == 1e-5);
  std::map<std::string, json> by;
  for (const auto& m : j["methods"]) by[m["method"]] = m;
  REQUIRE(by.size() == 3);
  for (const char* base : {"bisection", "fixed-point"}) {
    CHECK(by["ear"]["iterations_to_target"].get<int>() < by[base]["iterations_to_target"].get<int>());
    CHECK(by["ear"]["flops_to_target"].get<int>() < by[base]["flops_to_target"].get<int>());
  }
}

TEST_CASE("compare: CSV trace, filtered by method") {
  const Run all = run({"compare"});
  REQUIRE(all.code == 0);
  CHECK(all.out.rfind("method,iter,gamma,abs_error,flops\n", 0) == 0);
  const Run one = run({"compare", "--methods", "bisection"});
  REQUIRE(one.code == 0);
  std::istringstream lines(one.out);
  std::string line;
  std::getline(lines, line);
  std::size_t rows = 0;
  while (std::getline(lines, line)) {
    CHECK(line.rfind("bisection,", 0) == 0);
    ++rows;
  }
  CHECK(rows > 10);
}

TEST_CASE("analyze") {
  const Run r = run({"analyze", "--m", "1000", "--eps", "1e-5"});
  REQUIRE(r.code == 0);
  const json a = json::parse(r.out);
  CHECK(a["jointly_convex"] == true);
  CHECK(a["gamma_star"].get<double>() == doctest::Approx(0.025).epsilon(0.08));
  CHECK(a["root"].is_null());

  CHECK(json::parse(run({"analyze", "--m", "2000", "--eps", "1e-5"}).out)["jointly_convex"] == false);
  const json tight = json::parse(run({"analyze", "--m", "1000", "--eps", "1e-9"}).out);
  CHECK(tight["sqrt_m_bound"].get<double>() > a["sqrt_m_bound"].get<double>());

  const json with_n = json::parse(run({"analyze", "--m", "1000", "--eps", "1e-5", "--n", "320"}).out);
  CHECK(with_n["root"].get<double>() == doctest::Approx(0.36874775685769090));
  CHECK(with_n["g1_at_root"].get<double>() == doctest::Approx(0.135392092874369604));
  CHECK(with_n["corollary_region"] == true);
}

TEST_CASE("app on the shipped scenarios") {
  const Run w = run({"app", "--scenario", scenario("wsr_two_users.json")});
  REQUIRE(w.code == 0);
  const json jw = json::parse(w.out);
  CHECK(jw["result"]["kind"] == "wsr");
  CHECK(jw["oracle"].is_null());

  const Run p = run({"app", "--scenario", scenario("power_min_two_hops.json"), "--oracle", "--grid-steps", "400"});
  REQUIRE(p.code == 0);
  const double gap = json::parse(p.out)["result"]["oracle_gap"].get<double>();
  CHECK(gap <= 0.01);

  const Run csv = run({"app", "--scenario", scenario("power_min_two_hops.json"), "--oracle", "--grid-steps", "100",
                       "--format", "csv"});
  REQUIRE(csv.code == 0);
  CHECK(count_lines(csv.out) == 5);
  CHECK(csv.out.find("grid_oracle") != std::string::npos);

  std::ifstream f(scenario("ee_max_two_hops.json"));
  const std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  const Run e = run({"app", "--scenario", "-"}, text);
  REQUIRE(e.code == 0);
  CHECK(json::parse(e.out)["result"]["lambdas"].size() >= 2);

  std::string big = text;
  for (std::size_t pos; (pos = big.find("\"m\": 1000")) != std::string::npos;) big.replace(pos, 9, "\"m\": 2000");
  CHECK(run({"app", "--scenario", "-"}, big).code == spt::kExitDomain);
  CHECK(run({"app", "--scenario", "/nonexistent/x.json"}).code == spt::kExitUsage);
}

TEST_CASE("sweep keeps input order across thread counts") {
  const std::vector<std::string> base{"sweep", "--n", "50,320,900", "--m", "200,1000", "--eps", "1e-9,1e-5,0.4", "--format", "csv"};
  auto one = base, four = base;
  one.insert(one.end(), {"--threads", "1"});
  four.insert(four.end(), {"--threads", "4"});
  const Run a = run(one), b = run(four);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(count_lines(a.out) == 1 + 18);

  const Run bad = run({"sweep", "--n", "320", "--m", "1000", "--eps", "1e-5,0.9"});
  REQUIRE(bad.code == 0);
  const json j = json::parse(bad.out);
  CHECK(j["points"][0]["error"].is_null());
  CHECK(j["points"][1]["error"].is_string());
}

TEST_CASE("identical invocations give identical bytes; --output writes a file") {
  const std::vector<std::string> args{"app", "--scenario", scenario("ee_max_two_hops.json")};
  CHECK(run(args).out == run(args).out);

  const std::string path = std::string(SPT_BINARY_DIR) + "/cli_output_test.json";
  const Run r = run({"solve", "--n", "320", "--m", "1000", "--eps", "1e-5", "--output", path});
  REQUIRE(r.code == 0);
  CHECK(r.out.empty());
  std::ifstream f(path);
  const std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  CHECK(text == run({"solve", "--n", "320", "--m", "1000", "--eps", "1e-5"}).out);
  std::remove(path.c_str());
}
