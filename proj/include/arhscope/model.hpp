#pragma once

// ANA model: architecture graph, role scripts, security properties, bounds.
// Immutable after parsing; shared read-only by concurrent verifier tasks.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "arhscope/term.hpp"

namespace arhscope {

enum class ComponentKind { Entity, Domain };

struct ComponentId {
  std::string name;
  ComponentKind kind;
  friend auto operator<=>(const ComponentId&, const ComponentId&) = default;
};

struct Trigger {
  bool start = false;
  std::optional<std::string> from;  // expected sender; empty = any linked sender
  Term pattern;                     // receive pattern, with variables
};

struct Binding {
  std::string name;
  Term expr;
};

struct Guard {
  Term left;
  Term right;
};

struct Send {
  std::string to;
  Term expr;
};

struct ClaimSpec {
  std::string label;
  std::vector<Term> args;
};

struct Step {
  Trigger trigger;
  std::vector<std::string> fresh;
  std::vector<Binding> bind;
  std::vector<Guard> guards;
  std::optional<Send> send;
  std::vector<ClaimSpec> claims;
  std::string step_kind = "protocol";  // mining tag; e.g. "init" for filtered setup steps
};

struct RoleScript {
  std::string owner;
  std::vector<Step> steps;
};

struct SecurityProperty {
  enum class Kind { Secrecy, Agreement };
  std::string name;
  Kind kind = Kind::Secrecy;
  // Secrecy: violated iff every designated secret becomes adversary-deducible.
  struct SecretSelector { std::string role; std::string fresh; };
  std::vector<SecretSelector> secrets;
  // Agreement: every end_claim needs an earlier init_claim with equal matched args.
  std::string end_claim;
  std::string init_claim;
  std::vector<int> matched_args;
};

struct SearchBounds {
  int max_sessions = 1;
  int max_trace_len = 16;
  int max_term_depth = 3;

  std::string key() const {
    return "s" + std::to_string(max_sessions) + ".l" + std::to_string(max_trace_len) +
           ".d" + std::to_string(max_term_depth);
  }
  friend bool operator==(const SearchBounds&, const SearchBounds&) = default;
};

struct AnaModel {
  std::vector<std::string> entities;                       // sorted
  std::map<std::string, std::set<std::string>> domains;    // domain -> members
  std::set<std::pair<std::string, std::string>> links;     // directed, incl. self-links
  std::map<std::string, RoleScript> roles;
  std::map<std::string, TermSet> initial_knowledge;
  std::vector<SecurityProperty> properties;
  SearchBounds bounds;

  // derived
  std::string digest;                                      // content hash for caching
  std::map<std::string, std::string> domain_of;            // entity -> domain
  std::map<std::string, AtomKind> atom_kinds;              // global atom registry
  std::vector<std::string> components;                     // entities + domains, sorted

  bool is_entity(const std::string& n) const {
    return std::binary_search(entities.begin(), entities.end(), n);
  }
  bool is_domain(const std::string& n) const { return domains.count(n) != 0; }
  bool has_link(const std::string& s, const std::string& r) const {
    return links.count({s, r}) != 0;
  }
  std::optional<std::string> domain_containing(const std::string& entity) const {
    auto it = domain_of.find(entity);
    if (it == domain_of.end()) return std::nullopt;
    return it->second;
  }
  const SecurityProperty* find_property(const std::string& name) const {
    for (const auto& p : properties)
      if (p.name == name) return &p;
    return nullptr;
  }
};

// Fresh-nonce atom for a given session; session 1 keeps the bare name so
// activity labels match the role script's names.
inline std::string fresh_atom_name(const std::string& base, int session) {
  return session <= 1 ? base : base + "#" + std::to_string(session);
}

// Canonical name of the adversary's self-generated nonce.
inline const std::string kAdversaryNonce = "adv";

}  // namespace arhscope
