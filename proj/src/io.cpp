#include "spt/io.hpp"

#include <cmath>
#include <ostream>
#include <set>
#include <string>

#include "spt/errors.hpp"
#include "spt/format.hpp"

namespace spt {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& path) {
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.contains(key)) {
      throw ScenarioError(path.empty() ? key : path + "." + key, "unknown field");
    }
  }
}

const json& require_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw ScenarioError(path.empty() ? "$" : path, "expected an object");
  return j;
}

double number(const json& obj, const char* key, const std::string& path) {
  const std::string field = path.empty() ? key : path + "." + key;
  if (!obj.contains(key)) throw ScenarioError(field, "missing required field");
  const json& v = obj.at(key);
  if (!v.is_number()) throw ScenarioError(field, "expected a number");
  return v.get<double>();
}

std::optional<double> optional_number(const json& obj, const char* key, const std::string& path) {
  if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
  return number(obj, key, path);
}

json optional_field(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

Scenario parse_scenario(const json& j) {
  require_object(j, "");
  reject_unknown(j, {"kind", "links", "thresholds", "weights"}, "");
  Scenario s;

  if (!j.contains("kind")) throw ScenarioError("kind", "missing required field");
  if (!j.at("kind").is_string()) throw ScenarioError("kind", "expected a string");
  try {
    s.kind = parse_problem_kind(j.at("kind").get<std::string>());
  } catch (const DomainError&) {
    throw ScenarioError("kind", "must be one of wsr, power_min, ee_max");
  }

  if (!j.contains("links")) throw ScenarioError("links", "missing required field");
  if (!j.at("links").is_array()) throw ScenarioError("links", "expected an array");
  const json& links = j.at("links");
  for (std::size_t i = 0; i < links.size(); ++i) {
    const std::string path = "links[" + std::to_string(i) + "]";
    const json& l = require_object(links[i], path);
    reject_unknown(l, {"d_m", "fc_ghz", "bw_hz", "noise_dbm_hz", "m", "n", "eps"}, path);
    LinkSpec spec;
    spec.d_m = number(l, "d_m", path);
    spec.fc_ghz = number(l, "fc_ghz", path);
    spec.bw_hz = number(l, "bw_hz", path);
    spec.noise_dbm_hz = number(l, "noise_dbm_hz", path);
    spec.m = number(l, "m", path);
    spec.n = optional_number(l, "n", path);
    spec.eps = optional_number(l, "eps", path);
    s.links.push_back(spec);
  }

  if (!j.contains("thresholds")) throw ScenarioError("thresholds", "missing required field");
  const json& t = require_object(j.at("thresholds"), "thresholds");
  reject_unknown(t, {"p_max_w", "eps_th", "phi_th", "n_max_bits"}, "thresholds");
  s.thresholds.p_max_w = optional_number(t, "p_max_w", "thresholds");
  s.thresholds.eps_th = optional_number(t, "eps_th", "thresholds");
  s.thresholds.phi_th = optional_number(t, "phi_th", "thresholds");
  s.thresholds.n_max_bits = optional_number(t, "n_max_bits", "thresholds");

  if (j.contains("weights") && !j.at("weights").is_null()) {
    const json& w = j.at("weights");
    if (!w.is_array()) throw ScenarioError("weights", "expected an array");
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (!w[i].is_number()) throw ScenarioError("weights[" + std::to_string(i) + "]", "expected a number");
      s.weights.push_back(w[i].get<double>());
    }
  }
  validate_scenario(s);
  return s;
}

Scenario parse_scenario(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ScenarioError("$", std::string("invalid JSON: ") + e.what());
  }
  return parse_scenario(j);
}

json to_json(const Scenario& s) {
  json links = json::array();
  for (const auto& l : s.links) {
    json o{{"d_m", l.d_m}, {"fc_ghz", l.fc_ghz}, {"bw_hz", l.bw_hz}, {"noise_dbm_hz", l.noise_dbm_hz}, {"m", l.m}};
    if (l.n) o["n"] = *l.n;
    if (l.eps) o["eps"] = *l.eps;
    links.push_back(o);
  }
  json t = json::object();
  if (s.thresholds.p_max_w) t["p_max_w"] = *s.thresholds.p_max_w;
  if (s.thresholds.eps_th) t["eps_th"] = *s.thresholds.eps_th;
  if (s.thresholds.phi_th) t["phi_th"] = *s.thresholds.phi_th;
  if (s.thresholds.n_max_bits) t["n_max_bits"] = *s.thresholds.n_max_bits;
  json out{{"kind", std::string(to_string(s.kind))}, {"links", links}, {"thresholds", t}};
  if (!s.weights.empty()) out["weights"] = s.weights;
  return out;
}

json to_json(const AllocationResult& r) {
  json links = json::array();
  for (const auto& l : r.links) {
    links.push_back({{"n", l.n},
                     {"eps", l.eps},
                     {"m", l.m},
                     {"h", l.h},
                     {"snr_linear", l.snr},
                     {"snr_db", l.snr_db},
                     {"power", l.power},
                     {"residual", l.residual}});
  }
  json history = json::array();
  for (const auto& h : r.history) {
    history.push_back({{"round", h.round},
                       {"objective", h.objective},
                       {"max_delta", std::isfinite(h.max_delta) ? json(h.max_delta) : json(nullptr)}});
  }
  json out{{"kind", std::string(to_string(r.kind))},
           {"solver", r.is_oracle ? "grid_oracle" : "mm"},
           {"objective", r.objective},
           {"objective_units", objective_units(r.kind)},
           {"surrogate_objective", r.surrogate_objective},
           {"reliability_loss", r.reliability_loss},
           {"links", links}};
  if (r.is_oracle) {
    out["grid_steps"] = r.grid_steps;
  } else {
    out["rounds"] = r.rounds;
    out["history"] = history;
    if (!r.lambdas.empty()) out["lambdas"] = r.lambdas;
  }
  out["oracle_gap"] = optional_field(r.oracle_gap);
  return out;
}

json to_json(const ConvexityCertificate& c) {
  return {{"q", c.q},
          {"gamma_star", std::isfinite(c.gamma_star) ? json(c.gamma_star) : json(nullptr)},
          {"sqrt_m_bound", c.sqrt_m_bound},
          {"m_actual", c.m_actual},
          {"jointly_convex", c.jointly_convex},
          {"root", c.root},
          {"g1_at_root", c.g1_at_root},
          {"corollary_region", c.corollary_region},
          {"corollary_threshold", corollary_threshold()}};
}

json solve_summary(const TransmissionParams& p, const SolverTrace& t) {
  return {{"n", p.n_bits()},
          {"m", p.m_symbols()},
          {"eps", p.bler()},
          {"method", std::string(to_string(t.method))},
          {"snr_linear", t.final.linear()},
          {"snr_db", t.final.db()},
          {"iterations", t.iterations()},
          {"flops", t.total_flops},
          {"converged", t.converged},
          {"residual", rate_residual(p, t.final)},
          {"short_blocklength", p.short_blocklength()}};
}

void write_allocation_csv(std::ostream& out, const AllocationResult& r, bool header) {
  if (header) out << "kind,source,link,n,eps,m,h,snr,snr_db,power,residual\n";
  const char* source = r.is_oracle ? "grid_oracle" : "mm";
  for (std::size_t i = 0; i < r.links.size(); ++i) {
    const LinkResult& l = r.links[i];
    out << to_string(r.kind) << ',' << source << ',' << i << ',' << format_double(l.n) << ','
        << format_double(l.eps) << ',' << format_double(l.m) << ',' << format_double(l.h) << ','
        << format_double(l.snr) << ',' << format_double(l.snr_db) << ',' << format_double(l.power)
        << ',' << format_double(l.residual) << '\n';
  }
}

}  // namespace spt
