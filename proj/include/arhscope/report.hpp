#pragma once

// Run report: summary statistics of an orchestration run (scenario counts,
// invocation counts, pruning ratio, per-property violation-set sizes), the
// ARH tables, and links to emitted artifacts, as machine-readable JSON plus
// a static HTML page. The HTML is rendered from the JSON document, so every
// number shown on the page is present in the JSON by construction.

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "arhscope/arh.hpp"
#include "arhscope/lattice.hpp"
#include "arhscope/orchestrator.hpp"

namespace arhscope {

inline nlohmann::json run_report_json(const AnaModel& model, const VerdictStore& store,
                                      const ArhReport& arh,
                                      const std::vector<std::string>& artifact_files = {}) {
  size_t n = model.components.size();
  uint64_t size = lattice_size(n);
  nlohmann::json j;
  j["components"] = model.components;
  j["component_count"] = n;
  j["property_count"] = model.properties.size();
  j["compromise_scenarios"] = size;
  j["scenario_count"] = scenario_count(static_cast<int>(n), static_cast<int>(model.properties.size()));
  j["bounds"] = {{"max_sessions", store.bounds.max_sessions},
                 {"max_trace_len", store.bounds.max_trace_len},
                 {"max_term_depth", store.bounds.max_term_depth}};
  j["total_invocations"] = store.total_invocations();
  long long total_checks = static_cast<long long>(size) * static_cast<long long>(model.properties.size());
  j["total_checks"] = total_checks;
  j["pruning_ratio"] =
      total_checks == 0
          ? 0.0
          : 1.0 - static_cast<double>(store.total_invocations()) / static_cast<double>(total_checks);

  nlohmann::json props = nlohmann::json::object();
  for (const auto& [pname, entries] : store.entries) {
    long long holds = 0, violated = 0, pruned = 0;
    for (const auto& e : entries) {
      switch (e.status) {
        case Status::Holds: holds++; break;
        case Status::Violated: violated++; break;
        case Status::PrunedViolated: pruned++; break;
      }
    }
    nlohmann::json p;
    p["invocations"] = store.invocations.count(pname) ? store.invocations.at(pname) : 0;
    p["holds"] = holds;
    p["violated"] = violated;
    p["pruned_violated"] = pruned;
    p["violation_set_size"] = violated + pruned;
    props[pname] = std::move(p);
  }
  j["per_property"] = std::move(props);
  j["arh"] = arh_report_to_json(arh, model);
  j["artifacts"] = artifact_files;
  return j;
}

namespace detail {

inline std::string html_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string html_list(const nlohmann::json& arr) {
  if (arr.empty()) return "<em>(empty)</em>";
  std::string out = "<ul>";
  for (const auto& x : arr) out += "<li><code>" + html_escape(x.get<std::string>()) + "</code></li>";
  out += "</ul>";
  return out;
}

}  // namespace detail

inline std::string run_report_html(const nlohmann::json& j) {
  using detail::html_escape;
  std::string h;
  h += "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n";
  h += "<title>arhscope run report</title>\n";
  h += "<style>body{font-family:sans-serif;margin:2em;}table{border-collapse:collapse;}"
       "td,th{border:1px solid #999;padding:4px 8px;text-align:left;}"
       "h2{margin-top:1.5em;}code{background:#f3f3f3;padding:1px 3px;}</style>\n";
  h += "</head>\n<body>\n<h1>arhscope run report</h1>\n";

  h += "<h2>Summary</h2>\n<table>\n";
  auto row = [&](const std::string& k, const std::string& v) {
    h += "<tr><th>" + html_escape(k) + "</th><td>" + html_escape(v) + "</td></tr>\n";
  };
  row("components", std::to_string(j["component_count"].get<long long>()));
  row("properties", std::to_string(j["property_count"].get<long long>()));
  row("compromise scenarios", std::to_string(j["compromise_scenarios"].get<long long>()));
  row("scenario count (scenarios x properties)", std::to_string(j["scenario_count"].get<long long>()));
  row("verifier invocations", std::to_string(j["total_invocations"].get<long long>()));
  row("total checks without pruning", std::to_string(j["total_checks"].get<long long>()));
  {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", j["pruning_ratio"].get<double>());
    row("pruning ratio", buf);
  }
  row("bounds", "sessions=" + std::to_string(j["bounds"]["max_sessions"].get<int>()) +
                    ", trace_len=" + std::to_string(j["bounds"]["max_trace_len"].get<int>()) +
                    ", term_depth=" + std::to_string(j["bounds"]["max_term_depth"].get<int>()));
  h += "</table>\n";

  h += "<h2>Per-property results</h2>\n<table>\n<tr><th>property</th><th>invocations</th>"
       "<th>holds</th><th>violated</th><th>pruned_violated</th><th>|C|</th></tr>\n";
  for (const auto& [pname, p] : j["per_property"].items()) {
    h += "<tr><td>" + html_escape(pname) + "</td><td>" +
         std::to_string(p["invocations"].get<long long>()) + "</td><td>" +
         std::to_string(p["holds"].get<long long>()) + "</td><td>" +
         std::to_string(p["violated"].get<long long>()) + "</td><td>" +
         std::to_string(p["pruned_violated"].get<long long>()) + "</td><td>" +
         std::to_string(p["violation_set_size"].get<long long>()) + "</td></tr>\n";
  }
  h += "</table>\n";

  h += "<h2>ARH classification</h2>\n";
  for (const auto& [pname, p] : j["arh"]["properties"].items()) {
    h += "<h3>" + html_escape(pname) + "</h3>\n<table>\n";
    h += "<tr><th>MCS (minimal compromise scenarios)</th><td>" + detail::html_list(p["mcs"]) +
         "</td></tr>\n";
    h += "<tr><th>SPOF (single points of failure)</th><td>" + detail::html_list(p["spof"]) +
         "</td></tr>\n";
    h += "<tr><th>minimal SPOF</th><td>" + detail::html_list(p["minimal_spof"]) + "</td></tr>\n";
    h += "<tr><th>NBNS (necessary but not sufficient)</th><td>" + detail::html_list(p["nbns"]) +
         "</td></tr>\n";
    h += "<tr><th>NRFC (not responsible for compromise)</th><td>" +
         std::to_string(p["nrfc_count"].get<long long>()) + " scenarios</td></tr>\n";
    h += "</table>\n";
  }

  h += "<h2>Artifacts</h2>\n<ul>\n";
  for (const auto& f : j["artifacts"])
    h += "<li><a href=\"" + html_escape(f.get<std::string>()) + "\">" +
         html_escape(f.get<std::string>()) + "</a></li>\n";
  h += "</ul>\n</body>\n</html>\n";
  return h;
}

}  // namespace arhscope
