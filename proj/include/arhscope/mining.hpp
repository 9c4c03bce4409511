#pragma once

// Process mining of counterexample traces: trace DAGs, synthetic event-log
// generation, directly-follows graph discovery, heuristic-miner dependency
// values, and CSV / XES / DOT input-output.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "arhscope/execution.hpp"

namespace arhscope {

struct MiningError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// --- trace DAG ---------------------------------------------------------------

struct DagNode {
  int id = 0;
  std::string actor;    // spoof marks are baked in ("UseCase!")
  std::string peer;
  std::string content;
  std::string kind;     // protocol | adversary | claim | tick | custom tags
};

struct TraceDag {
  std::vector<DagNode> nodes;
  std::set<std::pair<int, int>> edges;
};

inline std::string dag_activity(const DagNode& n) {
  return escape_label_part(n.actor) + kActivitySep + escape_label_part(n.peer) + kActivitySep +
         n.content;
}

// One node per extraction, message and claim; edges form a chain encoding
// the trace's total order, so externally supplied partially-ordered DAGs
// and internal traces share one downstream path.
inline TraceDag trace_to_dag(const ExecutionTrace& w) {
  TraceDag d;
  auto add = [&](std::string actor, std::string peer, std::string content, std::string kind) {
    int id = static_cast<int>(d.nodes.size());
    d.nodes.push_back({id, std::move(actor), std::move(peer), std::move(content),
                       std::move(kind)});
    if (id > 0) d.edges.insert({id - 1, id});
  };
  for (const auto& x : w.extractions)
    add("adversary", x.entity, "extract(" + x.key_atom + ")", "adversary");
  // Claims are attached right after the message at whose position they fired.
  size_t ci = 0;
  for (size_t i = 0; i < w.steps.size(); ++i) {
    const Message& m = w.steps[i];
    switch (m.kind) {
      case MsgKind::Stall:
      case MsgKind::Tick:
        add("-", "-", "tick", "tick");
        break;
      case MsgKind::Protocol:
        add(m.sender, m.receiver, to_string(m.payload), m.tag);
        break;
      case MsgKind::Injection:
        add(m.sender + "!", m.receiver, to_string(m.payload), "adversary");
        break;
    }
    int pos = static_cast<int>(i) + 1;
    while (ci < w.claims.size() && w.claims[ci].position <= pos) {
      const Claim& c = w.claims[ci];
      std::string args;
      for (const auto& a : c.args) {
        args += ',';
        args += to_string(a);
      }
      add(c.entity, c.entity, "claim(" + c.label + args + ")", "claim");
      ++ci;
    }
  }
  return d;
}

// Kahn's algorithm with ascending-node-id tie-breaking.
inline std::vector<int> topo_sort(const TraceDag& dag) {
  std::map<int, int> indeg;
  std::map<int, std::vector<int>> out;
  for (const auto& n : dag.nodes) indeg[n.id];
  for (const auto& [a, b] : dag.edges) {
    if (!indeg.count(a) || !indeg.count(b)) throw MiningError("edge references unknown node");
    indeg[b]++;
    out[a].push_back(b);
  }
  std::set<int> ready;
  for (const auto& [id, d] : indeg)
    if (d == 0) ready.insert(id);
  std::vector<int> order;
  while (!ready.empty()) {
    int id = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(id);
    for (int nxt : out[id])
      if (--indeg[nxt] == 0) ready.insert(nxt);
  }
  if (order.size() != dag.nodes.size()) {
    for (const auto& [a, b] : dag.edges)
      if (indeg[b] > 0)
        throw MiningError("cycle detected involving edge " + std::to_string(a) + "->" +
                          std::to_string(b));
    throw MiningError("cycle detected");
  }
  return order;
}

// --- trace DAG JSON (external adapter point) -----------------------------------

inline nlohmann::json dag_to_json(const TraceDag& d) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : d.nodes)
    nodes.push_back({{"id", n.id},
                     {"actor", n.actor},
                     {"peer", n.peer},
                     {"content", n.content},
                     {"kind", n.kind}});
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& [a, b] : d.edges) edges.push_back({a, b});
  return {{"nodes", nodes}, {"edges", edges}};
}

inline TraceDag dag_from_json(const nlohmann::json& j) {
  TraceDag d;
  std::set<int> ids;
  for (const auto& n : j.at("nodes")) {
    DagNode node;
    node.id = n.at("id").get<int>();
    node.actor = n.at("actor").get<std::string>();
    node.peer = n.at("peer").get<std::string>();
    node.content = n.at("content").get<std::string>();
    node.kind = n.at("kind").get<std::string>();
    if (!ids.insert(node.id).second) throw MiningError("duplicate node id");
    d.nodes.push_back(std::move(node));
  }
  for (const auto& e : j.at("edges")) {
    if (!e.is_array() || e.size() != 2) throw MiningError("edge must be [from, to]");
    d.edges.insert({e[0].get<int>(), e[1].get<int>()});
  }
  topo_sort(d);  // validates acyclicity
  return d;
}

// --- event logs -----------------------------------------------------------------

struct Event {
  std::string activity;
  long case_id = 0;
  double timestamp = 0.0;
  friend bool operator==(const Event&, const Event&) = default;
};

struct EventTrace {
  std::vector<Event> events;
  friend bool operator==(const EventTrace&, const EventTrace&) = default;
};

struct EventLog {
  std::vector<EventTrace> traces;
  friend bool operator==(const EventLog&, const EventLog&) = default;
};

struct TransformConfig {
  double delta_t = 1.0;
  std::vector<std::string> activity_filter = {"tick", "init"};  // node kinds to drop
};

// T(w): event k carries f_a of node k and timestamp k·Δt, assigned before
// filtering; case ids are sequential in canonical witness order.
inline EventLog synthesize_log(const std::vector<TraceDag>& dags, const TransformConfig& cfg) {
  if (cfg.delta_t <= 0) throw MiningError("delta_t must be positive");
  EventLog log;
  long case_id = 0;
  for (const auto& dag : dags) {
    std::vector<int> order = topo_sort(dag);
    std::map<int, const DagNode*> byid;
    for (const auto& n : dag.nodes) byid[n.id] = &n;
    EventTrace tr;
    int k = 0;
    for (int id : order) {
      ++k;  // timestamps are positional, pre-filter
      const DagNode& n = *byid.at(id);
      if (std::find(cfg.activity_filter.begin(), cfg.activity_filter.end(), n.kind) !=
          cfg.activity_filter.end())
        continue;
      tr.events.push_back({dag_activity(n), case_id, k * cfg.delta_t});
    }
    log.traces.push_back(std::move(tr));
    ++case_id;
  }
  return log;
}

inline EventLog synthesize_log(const std::vector<ExecutionTrace>& witnesses,
                               const TransformConfig& cfg) {
  std::vector<TraceDag> dags;
  dags.reserve(witnesses.size());
  for (const auto& w : witnesses) dags.push_back(trace_to_dag(w));
  return synthesize_log(dags, cfg);
}

// --- directly-follows graph ------------------------------------------------------

struct Dfg {
  std::set<std::string> activities;
  std::map<std::pair<std::string, std::string>, long> edge_counts;
  std::map<std::string, long> start_counts;
  std::map<std::string, long> end_counts;
};

inline Dfg discover_dfg(const EventLog& log) {
  Dfg g;
  for (const auto& tr : log.traces) {
    if (tr.events.empty()) continue;
    g.start_counts[tr.events.front().activity]++;
    g.end_counts[tr.events.back().activity]++;
    for (const auto& e : tr.events) g.activities.insert(e.activity);
    for (size_t i = 0; i + 1 < tr.events.size(); ++i)
      g.edge_counts[{tr.events[i].activity, tr.events[i + 1].activity}]++;
  }
  return g;
}

// Flexible-Heuristic-Miner dependency values; edges below threshold dropped.
inline std::map<std::pair<std::string, std::string>, double> dependency_graph(
    const Dfg& dfg, double threshold) {
  std::map<std::pair<std::string, std::string>, double> out;
  auto count = [&](const std::string& a, const std::string& b) -> long {
    auto it = dfg.edge_counts.find({a, b});
    return it == dfg.edge_counts.end() ? 0 : it->second;
  };
  for (const auto& [edge, n] : dfg.edge_counts) {
    const auto& [a, b] = edge;
    double dep;
    if (a == b) {
      dep = static_cast<double>(n) / (n + 1.0);
    } else {
      long rev = count(b, a);
      dep = static_cast<double>(n - rev) / (n + rev + 1.0);
    }
    if (dep >= threshold) out[edge] = dep;
  }
  return out;
}

// --- CSV -------------------------------------------------------------------------

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

inline std::string fmt_double(double v) {
  std::ostringstream ss;
  ss << v;  // default 6 significant digits; stable for k·Δt magnitudes
  return ss.str();
}

inline std::vector<std::string> parse_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

}  // namespace detail

inline std::string log_to_csv(const EventLog& log) {
  std::string out = "case_id,activity,timestamp\n";
  for (const auto& tr : log.traces)
    for (const auto& e : tr.events) {
      out += std::to_string(e.case_id);
      out += ',';
      out += detail::csv_field(e.activity);
      out += ',';
      out += detail::fmt_double(e.timestamp);
      out += '\n';
    }
  return out;
}

inline EventLog log_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || detail::parse_csv_line(line) !=
                                     std::vector<std::string>{"case_id", "activity", "timestamp"})
    throw MiningError("bad CSV header");
  std::map<long, EventTrace> traces;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto f = detail::parse_csv_line(line);
    if (f.size() != 3) throw MiningError("bad CSV row: " + line);
    Event e;
    e.case_id = std::stol(f[0]);
    e.activity = f[1];
    e.timestamp = std::stod(f[2]);
    traces[e.case_id].events.push_back(std::move(e));
  }
  EventLog log;
  for (auto& [id, tr] : traces) log.traces.push_back(std::move(tr));
  return log;
}

// --- XES -------------------------------------------------------------------------

namespace detail {

// Days-from-civil / civil-from-days (Hinnant's algorithms), for a fixed
// locale-free epoch of 1970-01-01T00:00:00Z.
inline long long days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  long long era = (y >= 0 ? y : y - 399) / 400;
  unsigned yoe = static_cast<unsigned>(y - era * 400);
  unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long long>(doe) - 719468;
}

inline void civil_from_days(long long z, int& y, int& m, int& d) {
  z += 719468;
  long long era = (z >= 0 ? z : z - 146096) / 146097;
  unsigned doe = static_cast<unsigned>(z - era * 146097);
  unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  long long yy = static_cast<long long>(yoe) + era * 400;
  unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  unsigned mp = (5 * doy + 2) / 153;
  d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
  y = static_cast<int>(yy + (m <= 2));
}

inline std::string iso8601_from_seconds(double secs) {
  long long ms = static_cast<long long>(std::llround(secs * 1000.0));
  long long day_ms = 86400000ll;
  long long days = ms >= 0 ? ms / day_ms : (ms - (day_ms - 1)) / day_ms;
  long long rem = ms - days * day_ms;
  int y, mo, d;
  civil_from_days(days, y, mo, d);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02lld:%02lld:%02lld.%03lldZ", y, mo, d,
                rem / 3600000, rem / 60000 % 60, rem / 1000 % 60, rem % 1000);
  return buf;
}

inline double seconds_from_iso8601(const std::string& s) {
  int y, mo, d, h, mi, sec, ms = 0;
  if (std::sscanf(s.c_str(), "%d-%d-%dT%d:%d:%d.%dZ", &y, &mo, &d, &h, &mi, &sec, &ms) < 6)
    throw MiningError("bad timestamp: " + s);
  return static_cast<double>(days_from_civil(y, mo, d)) * 86400.0 + h * 3600.0 + mi * 60.0 +
         sec + ms / 1000.0;
}

inline std::string xml_escape(const std::string& s) {
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

inline std::string xml_unescape(const std::string& s) {
  std::string out;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '&') {
      out += s[i];
      continue;
    }
    if (s.compare(i, 5, "&amp;") == 0) { out += '&'; i += 4; }
    else if (s.compare(i, 4, "&lt;") == 0) { out += '<'; i += 3; }
    else if (s.compare(i, 4, "&gt;") == 0) { out += '>'; i += 3; }
    else if (s.compare(i, 6, "&quot;") == 0) { out += '"'; i += 5; }
    else out += s[i];
  }
  return out;
}

}  // namespace detail

inline std::string log_to_xes(const EventLog& log) {
  std::string out =
      "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      "<log xes.version=\"1.0\" xmlns=\"http://www.xes-standard.org/\">\n";
  for (const auto& tr : log.traces) {
    long cid = tr.events.empty() ? 0 : tr.events.front().case_id;
    out += "  <trace>\n    <string key=\"concept:name\" value=\"" + std::to_string(cid) +
           "\"/>\n";
    for (const auto& e : tr.events) {
      out += "    <event>\n";
      out += "      <string key=\"concept:name\" value=\"" + detail::xml_escape(e.activity) +
             "\"/>\n";
      out += "      <date key=\"time:timestamp\" value=\"" +
             detail::iso8601_from_seconds(e.timestamp) + "\"/>\n";
      out += "    </event>\n";
    }
    out += "  </trace>\n";
  }
  out += "</log>\n";
  return out;
}

// Minimal reader for the XES subset this tool writes.
inline EventLog log_from_xes(const std::string& text) {
  EventLog log;
  size_t pos = 0;
  auto find_attr = [&](const std::string& elem, const std::string& key,
                       size_t from, size_t until) -> std::string {
    std::string needle = "key=\"" + key + "\" value=\"";
    size_t p = text.find(needle, from);
    if (p == std::string::npos || p > until) throw MiningError("missing " + key + " in " + elem);
    size_t start = p + needle.size();
    size_t end = text.find('"', start);
    return detail::xml_unescape(text.substr(start, end - start));
  };
  while (true) {
    size_t t0 = text.find("<trace>", pos);
    if (t0 == std::string::npos) break;
    size_t t1 = text.find("</trace>", t0);
    if (t1 == std::string::npos) throw MiningError("unterminated <trace>");
    long cid = std::stol(find_attr("trace", "concept:name", t0, t1));
    EventTrace tr;
    size_t epos = t0;
    while (true) {
      size_t e0 = text.find("<event>", epos);
      if (e0 == std::string::npos || e0 > t1) break;
      size_t e1 = text.find("</event>", e0);
      Event e;
      e.case_id = cid;
      e.activity = find_attr("event", "concept:name", e0, e1);
      e.timestamp = detail::seconds_from_iso8601(find_attr("event", "time:timestamp", e0, e1));
      tr.events.push_back(std::move(e));
      epos = e1;
    }
    log.traces.push_back(std::move(tr));
    pos = t1;
  }
  return log;
}

// --- DOT -------------------------------------------------------------------------

namespace detail {

inline std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace detail

inline std::string dfg_to_dot(const Dfg& g, const std::string& name = "dfg") {
  std::string out = "digraph \"" + detail::dot_escape(name) + "\" {\n  rankdir=TB;\n";
  out += "  \"__start\" [shape=circle,label=\"start\"];\n";
  out += "  \"__end\" [shape=doublecircle,label=\"end\"];\n";
  for (const auto& a : g.activities)
    out += "  \"" + detail::dot_escape(a) + "\" [shape=box];\n";
  for (const auto& [a, n] : g.start_counts)
    out += "  \"__start\" -> \"" + detail::dot_escape(a) + "\" [label=\"" + std::to_string(n) +
           "\"];\n";
  for (const auto& [edge, n] : g.edge_counts)
    out += "  \"" + detail::dot_escape(edge.first) + "\" -> \"" +
           detail::dot_escape(edge.second) + "\" [label=\"" + std::to_string(n) + "\"];\n";
  for (const auto& [a, n] : g.end_counts)
    out += "  \"" + detail::dot_escape(a) + "\" -> \"__end\" [label=\"" + std::to_string(n) +
           "\"];\n";
  out += "}\n";
  return out;
}

inline std::string dependency_to_dot(
    const std::map<std::pair<std::string, std::string>, double>& dep,
    const std::string& name = "dependency") {
  std::string out = "digraph \"" + detail::dot_escape(name) + "\" {\n  rankdir=TB;\n";
  std::set<std::string> acts;
  for (const auto& [e, v] : dep) {
    acts.insert(e.first);
    acts.insert(e.second);
  }
  for (const auto& a : acts) out += "  \"" + detail::dot_escape(a) + "\" [shape=box];\n";
  for (const auto& [e, v] : dep) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    out += "  \"" + detail::dot_escape(e.first) + "\" -> \"" + detail::dot_escape(e.second) +
           "\" [label=\"" + buf + "\"];\n";
  }
  out += "}\n";
  return out;
}

// --- file helpers ------------------------------------------------------------------

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw MiningError("cannot write file: " + path);
  out << content;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MiningError("cannot read file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace arhscope
