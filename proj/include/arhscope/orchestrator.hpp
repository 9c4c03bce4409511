#pragma once

// Lattice orchestration: enumerates all compromise scenarios, performs the
// monotonicity-pruned preorder traversal of the Hasse diagram, and maintains
// the verdict store. Nodes are processed level-synchronously by rank, so a
// node is dispatched only after all its covers are resolved; the resulting
// store is independent of worker interleaving (confluence).

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "arhscope/lattice.hpp"
#include "arhscope/mining.hpp"
#include "arhscope/verifier.hpp"

namespace arhscope {

struct OrchestratorError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Status { Holds, Violated, PrunedViolated };

inline std::string status_name(Status s) {
  switch (s) {
    case Status::Holds: return "holds_within_bounds";
    case Status::Violated: return "violated";
    case Status::PrunedViolated: return "pruned_violated";
  }
  return "?";
}

inline Status status_from_name(const std::string& s) {
  if (s == "holds_within_bounds") return Status::Holds;
  if (s == "violated") return Status::Violated;
  if (s == "pruned_violated") return Status::PrunedViolated;
  throw OrchestratorError("unknown status '" + s + "'");
}

struct StoreEntry {
  Status status = Status::Holds;
  std::vector<TraceDag> witnesses;
  std::string pruned_from;  // ancestor key this violation was inherited from
  long long states_explored = 0;
};

struct VerdictStore {
  std::vector<std::string> components;
  SearchBounds bounds;
  std::string model_digest;
  // property -> entries indexed by compromise code (dense, total).
  std::map<std::string, std::vector<StoreEntry>> entries;
  std::map<std::string, long long> invocations;  // check_property calls per property

  const StoreEntry& at(const std::string& property, uint64_t code) const {
    auto it = entries.find(property);
    if (it == entries.end()) throw OrchestratorError("store has no property '" + property + "'");
    return it->second.at(code);
  }
  long long total_invocations() const {
    long long n = 0;
    for (const auto& [p, v] : invocations) n += v;
    return n;
  }
};

// All compromises with status violated or pruned_violated, as lattice codes.
inline std::set<uint64_t> compute_C(const VerdictStore& store, const std::string& property) {
  auto it = store.entries.find(property);
  if (it == store.entries.end())
    throw OrchestratorError("store incomplete: no property '" + property + "'");
  if (it->second.size() != lattice_size(store.components.size()))
    throw OrchestratorError("store incomplete for '" + property + "'");
  std::set<uint64_t> out;
  for (uint64_t code = 0; code < it->second.size(); ++code)
    if (it->second[code].status != Status::Holds) out.insert(code);
  return out;
}

// --- store (de)serialization -----------------------------------------------------

namespace detail {

inline nlohmann::json entry_to_json(const AnaModel& m, const std::string& property,
                                    uint64_t code, const StoreEntry& e) {
  nlohmann::json j;
  j["compromise"] = compromise_key(Compromise::from_code(code, m.components.size()), m);
  j["property"] = property;
  j["status"] = status_name(e.status);
  if (!e.pruned_from.empty()) j["pruned_from"] = e.pruned_from;
  j["states_explored"] = e.states_explored;
  nlohmann::json ws = nlohmann::json::array();
  for (const auto& w : e.witnesses) ws.push_back(dag_to_json(w));
  j["witnesses"] = std::move(ws);
  return j;
}

}  // namespace detail

// One JSON-Lines shard per property, records sorted by compromise key.
inline std::string store_shard(const VerdictStore& store, const AnaModel& m,
                               const std::string& property) {
  auto it = store.entries.find(property);
  if (it == store.entries.end()) throw OrchestratorError("no such property in store");
  std::vector<std::pair<std::string, uint64_t>> keys;
  keys.reserve(it->second.size());
  for (uint64_t code = 0; code < it->second.size(); ++code)
    keys.emplace_back(compromise_key(Compromise::from_code(code, m.components.size()), m), code);
  std::sort(keys.begin(), keys.end());
  std::string out;
  for (const auto& [key, code] : keys) {
    out += detail::entry_to_json(m, property, code, it->second[code]).dump();
    out += '\n';
  }
  return out;
}

inline void load_store_shard(VerdictStore& store, const AnaModel& m,
                             const std::string& property, const std::string& text) {
  auto& vec = store.entries[property];
  vec.assign(lattice_size(m.components.size()), StoreEntry{});
  std::istringstream in(text);
  std::string line;
  size_t seen = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    uint64_t code = compromise_from_key(j.at("compromise").get<std::string>(), m).code();
    StoreEntry e;
    e.status = status_from_name(j.at("status").get<std::string>());
    e.pruned_from = j.value("pruned_from", std::string());
    e.states_explored = j.value("states_explored", 0ll);
    for (const auto& w : j.at("witnesses")) e.witnesses.push_back(dag_from_json(w));
    vec.at(code) = std::move(e);
    ++seen;
  }
  if (seen != vec.size()) throw OrchestratorError("store shard incomplete for '" + property + "'");
}

// --- orchestration -----------------------------------------------------------------

struct OrchestrateOptions {
  int jobs = 1;
  std::string cache_dir;  // empty disables the on-disk verdict cache
};

namespace detail {

inline std::string cache_file(const std::string& dir, const AnaModel& m,
                              const SearchBounds& b, const std::string& property) {
  return dir + "/" + m.digest + "." + b.key() + "." + property + ".jsonl";
}

// Everything the verifier's behaviour can depend on, given a fixed
// (model, property, bounds): which entities leak knowledge, the
// interception/injection capability matrices, and whether the adversary is
// active at all. Distinct compromises with equal signatures yield identical
// verdicts, witnesses and state counts, so check_property (a pure function)
// is memoized per signature.
inline std::vector<uint8_t> capability_signature(const AnaModel& m, const Compromise& c) {
  std::vector<uint8_t> sig;
  sig.push_back(c.rank() > 0);
  for (const auto& e : m.entities) sig.push_back(read_compromised(c, m, e));
  for (const auto& s : m.entities)
    for (const auto& r : m.entities) {
      sig.push_back(can_intercept(c, m, s, r));
      sig.push_back(can_inject_on(c, m, s, r));
    }
  return sig;
}

}  // namespace detail

inline VerdictStore orchestrate(const AnaModel& model, const SearchBounds& bounds,
                                const OrchestrateOptions& opts = {}) {
  if (model.properties.empty()) throw OrchestratorError("model has no properties");
  size_t n = model.components.size();
  uint64_t size = lattice_size(n);

  VerdictStore store;
  store.components = model.components;
  store.bounds = bounds;
  store.model_digest = model.digest;

  namespace fs = std::filesystem;
  for (const auto& sp : model.properties) {
    // Whole-property cache hit: skip verification entirely.
    if (!opts.cache_dir.empty()) {
      std::string file = detail::cache_file(opts.cache_dir, model, bounds, sp.name);
      std::string meta = file + ".meta";
      if (fs::exists(file)) {
        load_store_shard(store, model, sp.name, read_file(file));
        long long inv = 0;
        if (fs::exists(meta)) inv = nlohmann::json::parse(read_file(meta)).value("invocations", 0ll);
        store.invocations[sp.name] = inv;
        continue;
      }
    }

    auto& entries = store.entries[sp.name];
    entries.assign(size, StoreEntry{});
    std::vector<uint8_t> resolved(size, 0);
    long long invocations = 0;
    std::map<std::vector<uint8_t>, StoreEntry> by_signature;

    // Bucket nodes by rank (number of granted capability bits); every cover
    // of a rank-k node has rank k-1, so levels resolve bottom-up.
    std::vector<std::vector<uint64_t>> by_rank(2 * n + 1);
    for (uint64_t code = 0; code < size; ++code)
      by_rank[Compromise::from_code(code, n).rank()].push_back(code);

    for (const auto& level : by_rank) {
      // Pruning pass: inherit violations from resolved covers.
      std::vector<uint64_t> todo;
      for (uint64_t code : level) {
        Compromise c = Compromise::from_code(code, n);
        std::string origin;
        for (const auto& p : predecessors(c)) {
          const StoreEntry& pe = entries[p.code()];
          if (pe.status == Status::Holds) continue;
          std::string o =
              pe.status == Status::Violated ? compromise_key(p, model) : pe.pruned_from;
          if (origin.empty() || o < origin) origin = o;
        }
        if (!origin.empty()) {
          entries[code].status = Status::PrunedViolated;
          entries[code].pruned_from = origin;
          resolved[code] = 1;
        } else {
          todo.push_back(code);
        }
      }

      // Verification pass: independent nodes of one level run concurrently.
      // Nodes with an equal capability signature share one representative
      // verifier run (memoization of a pure function); the invocation counter
      // keeps counting logical (non-pruned) checks.
      invocations += static_cast<long long>(todo.size());
      std::vector<uint64_t> fresh;                   // representatives to verify
      std::vector<std::vector<uint8_t>> fresh_sigs;  // parallel to `fresh`
      std::vector<std::pair<uint64_t, std::vector<uint8_t>>> copies;
      std::map<std::vector<uint8_t>, uint8_t> seen_this_level;
      for (uint64_t code : todo) {
        auto sig = detail::capability_signature(model, Compromise::from_code(code, n));
        if (by_signature.count(sig) || seen_this_level.count(sig)) {
          copies.emplace_back(code, std::move(sig));
        } else {
          seen_this_level[sig] = 1;
          fresh.push_back(code);
          fresh_sigs.push_back(std::move(sig));
        }
      }
      std::atomic<size_t> next{0};
      auto worker = [&]() {
        while (true) {
          size_t i = next.fetch_add(1);
          if (i >= fresh.size()) break;
          uint64_t code = fresh[i];
          Compromise c = Compromise::from_code(code, n);
          Verdict v = check_property(model, c, sp, bounds);
          StoreEntry& e = entries[code];
          e.status = v.outcome == Outcome::Violated ? Status::Violated : Status::Holds;
          e.states_explored = v.stats.states_explored;
          for (const auto& w : v.witnesses) e.witnesses.push_back(trace_to_dag(w));
          resolved[code] = 1;
        }
      };
      int jobs = std::max(1, opts.jobs);
      if (jobs == 1 || fresh.size() <= 1) {
        worker();
      } else {
        std::vector<std::thread> pool;
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
      }
      for (size_t i = 0; i < fresh.size(); ++i)
        by_signature[std::move(fresh_sigs[i])] = entries[fresh[i]];
      for (auto& [code, sig] : copies) {
        entries[code] = by_signature.at(sig);
        resolved[code] = 1;
      }
    }
    store.invocations[sp.name] = invocations;

    if (!opts.cache_dir.empty()) {
      fs::create_directories(opts.cache_dir);
      std::string file = detail::cache_file(opts.cache_dir, model, bounds, sp.name);
      write_file(file, store_shard(store, model, sp.name));
      nlohmann::json meta;
      meta["invocations"] = invocations;
      write_file(file + ".meta", meta.dump());
    }
  }
  return store;
}

// --- Hasse export --------------------------------------------------------------------

inline std::string hasse_to_dot(const VerdictStore& store, const AnaModel& model,
                                const std::string& property) {
  auto it = store.entries.find(property);
  if (it == store.entries.end()) throw OrchestratorError("no such property in store");
  size_t n = model.components.size();
  std::string out = "digraph \"hasse_" + detail::dot_escape(property) + "\" {\n  rankdir=BT;\n";
  for (uint64_t code = 0; code < it->second.size(); ++code) {
    Compromise c = Compromise::from_code(code, n);
    std::string key = compromise_key(c, model);
    std::string fill;
    switch (it->second[code].status) {
      case Status::Holds: fill = "white"; break;
      case Status::Violated: fill = "salmon"; break;
      case Status::PrunedViolated: fill = "khaki"; break;
    }
    out += "  n" + std::to_string(code) + " [label=\"" +
           detail::dot_escape(key.empty() ? "(none)" : key) +
           "\",style=filled,fillcolor=" + fill + "];\n";
  }
  for (uint64_t code = 0; code < it->second.size(); ++code) {
    Compromise c = Compromise::from_code(code, n);
    for (const auto& s : successors(c))
      out += "  n" + std::to_string(code) + " -> n" + std::to_string(s.code()) + ";\n";
  }
  out += "}\n";
  return out;
}

}  // namespace arhscope
