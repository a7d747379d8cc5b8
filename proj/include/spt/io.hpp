#pragma once

// JSON and CSV encodings of scenarios and results.

#include <iosfwd>
#include <string_view>

#include "json.hpp"
#include "spt/analysis.hpp"
#include "spt/applications.hpp"
#include "spt/solvers.hpp"

namespace spt {

/// Parses {kind, links: [...], thresholds: {...}, weights?}. Unknown keys,
/// wrong types and missing required fields raise ScenarioError naming the
/// JSON path; semantic checks follow via validate_scenario.
Scenario parse_scenario(const nlohmann::json& j);
Scenario parse_scenario(std::string_view text);

nlohmann::json to_json(const Scenario& s);
nlohmann::json to_json(const AllocationResult& r);
nlohmann::json to_json(const ConvexityCertificate& c);

/// Solve summary: snr, method, iterations, flops, residual.
nlohmann::json solve_summary(const TransmissionParams& p, const SolverTrace& t);

/// kind,source,link,n,eps,m,h,snr,snr_db,power,residual
void write_allocation_csv(std::ostream& out, const AllocationResult& r, bool header = true);

}  // namespace spt
