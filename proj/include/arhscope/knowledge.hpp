#pragma once

// Adversary knowledge: analysis (decomposition) closure, lazy deducibility
// and the bounded synthesis closure used by tests and the report tooling.

#include <set>
#include <string>

#include "arhscope/term.hpp"

namespace arhscope {

// Decompose a term into everything directly extractable from it: pair
// projections and signature payloads (signatures reveal what was signed,
// never the signing key).
inline void analyze_into(const Term& t, TermSet& out) {
  if (!out.insert(t).second) return;
  switch (t.kind) {
    case TermKind::Pair:
      analyze_into(t.args[0], out);
      analyze_into(t.args[1], out);
      break;
    case TermKind::Sig:
      analyze_into(t.args[0], out);
      break;
    default:
      break;
  }
}

inline TermSet analyze(const TermSet& knowledge) {
  TermSet out;
  for (const auto& t : knowledge) analyze_into(t, out);
  return out;
}

// Lazy deducibility: t follows from `analyzed` (already analysis-closed) by
// constructor composition. Hashes and signatures are one-way: a Sig is
// deducible only if held verbatim or both payload and private key are.
inline bool deducible_from_analyzed(const Term& t, const TermSet& analyzed) {
  if (analyzed.count(t)) return true;
  switch (t.kind) {
    case TermKind::Tick:
      return true;
    case TermKind::Pair:
      return deducible_from_analyzed(t.args[0], analyzed) &&
             deducible_from_analyzed(t.args[1], analyzed);
    case TermKind::Hash:
      return deducible_from_analyzed(t.args[0], analyzed);
    case TermKind::Sig:
      return deducible_from_analyzed(t.args[0], analyzed) &&
             deducible_from_analyzed(t.args[1], analyzed);
    default:
      return false;  // atoms and variables must be held outright
  }
}

inline bool deducible(const Term& t, const TermSet& knowledge) {
  return deducible_from_analyzed(t, analyze(knowledge));
}

// Materialized closure under analysis plus `depth` rounds of constructor
// application. Grows fast; meant for small knowledge sets (tests, reports).
inline TermSet deduction_closure(const TermSet& knowledge, int depth) {
  TermSet cur = analyze(knowledge);
  cur.insert(Term::tick());
  for (int round = 0; round < depth; ++round) {
    TermSet next = cur;
    for (const auto& a : cur) {
      if (a.is_var() || a.is_tick()) continue;  // tick is inert, not a building block
      next.insert(Term::hash(a));
      for (const auto& b : cur) {
        if (b.is_var() || b.is_tick()) continue;
        next.insert(Term::pair(a, b));
        if (b.is_atom() && b.atom_kind == AtomKind::PrivateKey)
          next.insert(Term::sig(a, b));
      }
    }
    if (next.size() == cur.size()) break;
    cur = analyze(next);
  }
  return cur;
}

}  // namespace arhscope
