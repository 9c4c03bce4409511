#pragma once

// ARH classification: given the violation set C(S,L) of a property (as
// lattice codes over the model's components), computes the four ARH sets —
// MCS (minimal compromise scenarios), SPOF (single-component violating
// scenarios), NBNS (minimal non-violating scenarios that are necessary for
// some violating superset), NRFC (non-violating scenarios that never
// contribute) — plus the multi-property map S(c, L).
//
// C is upward-closed, so it is represented by its antichain of minimal
// elements; the NBNS/NRFC quantifier over violating supersets c' reduces to
// joins with minimal elements (c' - c shrinks as c' shrinks, and the
// complement of C is downward-closed). An exhaustive mode evaluates the
// definitions literally over the whole universe for small component counts;
// the two must agree (oracle-tested).

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "arhscope/adversary.hpp"
#include "arhscope/lattice.hpp"
#include "arhscope/orchestrator.hpp"

namespace arhscope {

struct ArhError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ArhMethod { Antichain, Exhaustive };

namespace detail {

inline void validate_upward_closed(const std::set<uint64_t>& C, size_t n) {
  for (uint64_t code : C)
    for (const auto& s : successors(Compromise::from_code(code, n)))
      if (!C.count(s.code()))
        throw ArhError("violation set is not upward-closed (verifier/orchestrator bug): " +
                       std::to_string(code) + " in C but successor " +
                       std::to_string(s.code()) + " is not");
}

inline Compromise join(const Compromise& a, const Compromise& b) {
  Compromise j = a;
  for (size_t i = 0; i < j.perms.size(); ++i)
    j.perms[i] = static_cast<Permission>(static_cast<int>(j.perms[i]) |
                                         static_cast<int>(b.perms[i]));
  return j;
}

// The defining condition shared by NBNS (satisfied, then minimized) and NRFC
// (falsified): exists c' in C with c <= c' and c' - c outside C.
inline bool necessary_somewhere(const Compromise& c, const std::vector<uint64_t>& minimal,
                                const std::set<uint64_t>& C, size_t n) {
  for (uint64_t mcode : minimal) {
    Compromise j = join(c, Compromise::from_code(mcode, n));
    if (!C.count(subtract(j, c).code())) return true;
  }
  return false;
}

inline bool necessary_somewhere_exhaustive(const Compromise& c, const std::set<uint64_t>& C,
                                           size_t n) {
  for (uint64_t code : C) {
    Compromise cp = Compromise::from_code(code, n);
    if (leq(c, cp) && !C.count(subtract(cp, c).code())) return true;
  }
  return false;
}

}  // namespace detail

// The ⪯-minimal elements of an upward-closed C.
inline std::set<uint64_t> mcs(const std::set<uint64_t>& C, size_t n,
                              ArhMethod method = ArhMethod::Antichain) {
  detail::validate_upward_closed(C, n);
  std::set<uint64_t> out;
  if (method == ArhMethod::Exhaustive) {
    for (uint64_t code : C) {
      Compromise c = Compromise::from_code(code, n);
      bool minimal = true;
      for (uint64_t other : C)
        if (other != code && leq(Compromise::from_code(other, n), c)) {
          minimal = false;
          break;
        }
      if (minimal) out.insert(code);
    }
    return out;
  }
  for (uint64_t code : C) {
    bool minimal = true;
    for (const auto& p : predecessors(Compromise::from_code(code, n)))
      if (C.count(p.code())) {
        minimal = false;
        break;
      }
    if (minimal) out.insert(code);
  }
  return out;
}

// Elements of C compromising exactly one component (SPOF as defined).
inline std::set<uint64_t> spof(const std::set<uint64_t>& C, size_t n) {
  detail::validate_upward_closed(C, n);
  std::set<uint64_t> out;
  for (uint64_t code : C)
    if (Compromise::from_code(code, n).dom_size() == 1) out.insert(code);
  return out;
}

// The ⪯-minimal SPOFs, reported separately since they summarize the set.
inline std::set<uint64_t> minimal_spof(const std::set<uint64_t>& C, size_t n) {
  std::set<uint64_t> s = spof(C, n);
  std::set<uint64_t> out;
  for (uint64_t code : s) {
    Compromise c = Compromise::from_code(code, n);
    bool minimal = true;
    for (uint64_t other : s)
      if (other != code && leq(Compromise::from_code(other, n), c)) {
        minimal = false;
        break;
      }
    if (minimal) out.insert(code);
  }
  return out;
}

// NBNS = min_⪯ { c ∉ C | ∃ c' ∈ C : c ⪯ c', c' − c ∉ C }.
inline std::set<uint64_t> nbns(const std::set<uint64_t>& C, size_t n,
                               ArhMethod method = ArhMethod::Antichain) {
  detail::validate_upward_closed(C, n);
  std::set<uint64_t> min_set = mcs(C, n);
  std::vector<uint64_t> minimal(min_set.begin(), min_set.end());
  std::set<uint64_t> qualifying;
  for (uint64_t code = 0; code < lattice_size(n); ++code) {
    if (C.count(code)) continue;
    Compromise c = Compromise::from_code(code, n);
    bool q = method == ArhMethod::Exhaustive
                 ? detail::necessary_somewhere_exhaustive(c, C, n)
                 : detail::necessary_somewhere(c, minimal, C, n);
    if (q) qualifying.insert(code);
  }
  std::set<uint64_t> out;
  for (uint64_t code : qualifying) {
    bool min = true;
    for (const auto& p : predecessors(Compromise::from_code(code, n)))
      if (qualifying.count(p.code())) {
        min = false;
        break;
      }
    if (min) out.insert(code);
  }
  return out;
}

// NRFC = { c ∉ C | ∀ c' ∈ C : c ⪯ c' ⟹ c' − c ∈ C }.
inline std::set<uint64_t> nrfc(const std::set<uint64_t>& C, size_t n,
                               ArhMethod method = ArhMethod::Antichain) {
  detail::validate_upward_closed(C, n);
  std::set<uint64_t> min_set = mcs(C, n);
  std::vector<uint64_t> minimal(min_set.begin(), min_set.end());
  std::set<uint64_t> out;
  for (uint64_t code = 0; code < lattice_size(n); ++code) {
    if (C.count(code)) continue;
    Compromise c = Compromise::from_code(code, n);
    bool q = method == ArhMethod::Exhaustive
                 ? detail::necessary_somewhere_exhaustive(c, C, n)
                 : detail::necessary_somewhere(c, minimal, C, n);
    if (!q) out.insert(code);
  }
  return out;
}

// S(c, L): for each compromise, the properties it invalidates.
inline std::map<std::string, std::set<std::string>> multi_sp_map(const VerdictStore& store,
                                                                 const AnaModel& model) {
  size_t n = store.components.size();
  uint64_t size = lattice_size(n);
  for (const auto& [p, v] : store.entries)
    if (v.size() != size) throw ArhError("store incomplete for '" + p + "'");
  std::map<std::string, std::set<std::string>> out;
  for (uint64_t code = 0; code < size; ++code) {
    std::string key = compromise_key(Compromise::from_code(code, n), model);
    auto& props = out[key];
    for (const auto& [p, v] : store.entries)
      if (v[code].status != Status::Holds) props.insert(p);
  }
  return out;
}

// --- report --------------------------------------------------------------------------

struct ArhReport {
  struct PerProperty {
    std::set<uint64_t> c;  // violation set
    std::set<uint64_t> mcs, spof, minimal_spof, nbns, nrfc;
  };
  std::vector<std::string> components;
  std::map<std::string, PerProperty> properties;
  std::map<std::string, std::set<std::string>> multi_sp;
};

inline ArhReport classify(const VerdictStore& store, const AnaModel& model) {
  ArhReport r;
  r.components = store.components;
  size_t n = store.components.size();
  for (const auto& [pname, entries] : store.entries) {
    ArhReport::PerProperty pp;
    pp.c = compute_C(store, pname);
    pp.mcs = mcs(pp.c, n);
    pp.spof = spof(pp.c, n);
    pp.minimal_spof = minimal_spof(pp.c, n);
    pp.nbns = nbns(pp.c, n);
    pp.nrfc = nrfc(pp.c, n);
    r.properties.emplace(pname, std::move(pp));
  }
  r.multi_sp = multi_sp_map(store, model);
  return r;
}

namespace detail {

inline nlohmann::json keyset_to_json(const std::set<uint64_t>& s, const AnaModel& m) {
  size_t n = m.components.size();
  std::vector<std::string> keys;
  for (uint64_t code : s) keys.push_back(compromise_key(Compromise::from_code(code, n), m));
  std::sort(keys.begin(), keys.end());
  return nlohmann::json(keys);
}

}  // namespace detail

inline nlohmann::json arh_report_to_json(const ArhReport& r, const AnaModel& m) {
  nlohmann::json j;
  j["components"] = r.components;
  nlohmann::json props = nlohmann::json::object();
  for (const auto& [pname, pp] : r.properties) {
    nlohmann::json p;
    p["violating_count"] = pp.c.size();
    p["mcs"] = detail::keyset_to_json(pp.mcs, m);
    p["spof"] = detail::keyset_to_json(pp.spof, m);
    p["minimal_spof"] = detail::keyset_to_json(pp.minimal_spof, m);
    p["nbns"] = detail::keyset_to_json(pp.nbns, m);
    p["nrfc_count"] = pp.nrfc.size();
    p["nrfc"] = detail::keyset_to_json(pp.nrfc, m);
    props[pname] = std::move(p);
  }
  j["properties"] = std::move(props);
  nlohmann::json msp = nlohmann::json::object();
  for (const auto& [key, names] : r.multi_sp)
    msp[key.empty() ? "(none)" : key] = nlohmann::json(names);
  j["multi_sp"] = std::move(msp);
  return j;
}

// One row per compromise: key, per-property status, per-property ARH labels.
inline std::string arh_report_to_csv(const ArhReport& r, const VerdictStore& store,
                                     const AnaModel& m) {
  size_t n = m.components.size();
  std::vector<std::string> props;
  for (const auto& [pname, pp] : r.properties) props.push_back(pname);
  std::string out = "compromise";
  for (const auto& p : props) out += "," + p + "_status," + p + "_arh";
  out += "\n";
  std::vector<std::pair<std::string, uint64_t>> rows;
  for (uint64_t code = 0; code < lattice_size(n); ++code)
    rows.emplace_back(compromise_key(Compromise::from_code(code, n), m), code);
  std::sort(rows.begin(), rows.end());
  for (const auto& [key, code] : rows) {
    out += "\"" + (key.empty() ? std::string("(none)") : key) + "\"";
    for (const auto& p : props) {
      const auto& pp = r.properties.at(p);
      out += "," + status_name(store.at(p, code).status) + ",";
      std::vector<std::string> labels;
      if (pp.mcs.count(code)) labels.push_back("mcs");
      if (pp.spof.count(code)) labels.push_back("spof");
      if (pp.nbns.count(code)) labels.push_back("nbns");
      if (pp.nrfc.count(code)) labels.push_back("nrfc");
      std::string lbl;
      for (size_t i = 0; i < labels.size(); ++i) lbl += (i ? ";" : "") + labels[i];
      out += lbl;
    }
    out += "\n";
  }
  return out;
}

}  // namespace arhscope
