#pragma once

// Term algebra for message contents: atoms, pairs, hashes, signatures and
// the special tick content, plus pattern variables for role-script triggers.

#include <compare>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace arhscope {

enum class TermKind { Atom, Var, Pair, Hash, Sig, Tick };

enum class AtomKind { Nonce, PrivateKey, PublicKey, Constant };

struct Term {
  TermKind kind = TermKind::Tick;
  std::string name;          // Atom / Var
  AtomKind atom_kind = AtomKind::Constant;
  std::vector<Term> args;    // Pair: 2, Hash: 1, Sig: 2 (payload, key)

  static Term atom(std::string n, AtomKind k = AtomKind::Constant) {
    Term t; t.kind = TermKind::Atom; t.name = std::move(n); t.atom_kind = k; return t;
  }
  static Term var(std::string n) {
    Term t; t.kind = TermKind::Var; t.name = std::move(n); return t;
  }
  static Term pair(Term a, Term b) {
    Term t; t.kind = TermKind::Pair; t.args = {std::move(a), std::move(b)}; return t;
  }
  static Term hash(Term a) {
    Term t; t.kind = TermKind::Hash; t.args = {std::move(a)}; return t;
  }
  static Term sig(Term payload, Term key) {
    Term t; t.kind = TermKind::Sig; t.args = {std::move(payload), std::move(key)}; return t;
  }
  static Term tick() { return Term{}; }

  bool is_tick() const { return kind == TermKind::Tick; }
  bool is_atom() const { return kind == TermKind::Atom; }
  bool is_var() const { return kind == TermKind::Var; }

  friend std::strong_ordering operator<=>(const Term& a, const Term& b) {
    if (auto c = a.kind <=> b.kind; c != 0) return c;
    if (auto c = a.name <=> b.name; c != 0) return c;
    if (auto c = a.args.size() <=> b.args.size(); c != 0) return c;
    for (size_t i = 0; i < a.args.size(); ++i)
      if (auto c = a.args[i] <=> b.args[i]; c != 0) return c;
    return std::strong_ordering::equal;
  }
  friend bool operator==(const Term& a, const Term& b) { return (a <=> b) == 0; }
};

using TermSet = std::set<Term>;
using Substitution = std::map<std::string, Term>;

inline void render_term(const Term& t, std::string& out) {
  switch (t.kind) {
    case TermKind::Atom:
    case TermKind::Var: out += t.name; break;
    case TermKind::Tick: out += "tick"; break;
    case TermKind::Hash:
      out += "h(";
      render_term(t.args[0], out);
      out += ')';
      break;
    case TermKind::Sig:
      out += "sign(";
      render_term(t.args[0], out);
      out += ',';
      render_term(t.args[1], out);
      out += ')';
      break;
    case TermKind::Pair:
      out += "pair(";
      render_term(t.args[0], out);
      out += ',';
      render_term(t.args[1], out);
      out += ')';
      break;
  }
}

inline std::string to_string(const Term& t) {
  std::string s;
  render_term(t, s);
  return s;
}

inline int term_depth(const Term& t) {
  int d = 0;
  for (const auto& a : t.args) d = std::max(d, term_depth(a));
  return t.args.empty() ? 0 : d + 1;
}

// match_pattern: unique substitution making pattern equal to term, or nullopt.
// Repeated variables must bind to equal subterms.
inline bool match_into(const Term& pattern, const Term& term, Substitution& subst) {
  if (pattern.is_var()) {
    auto it = subst.find(pattern.name);
    if (it != subst.end()) return it->second == term;
    subst.emplace(pattern.name, term);
    return true;
  }
  if (pattern.kind != term.kind) return false;
  if (pattern.is_atom()) return pattern.name == term.name;
  for (size_t i = 0; i < pattern.args.size(); ++i)
    if (!match_into(pattern.args[i], term.args[i], subst)) return false;
  return true;
}

inline std::optional<Substitution> match_pattern(const Term& pattern, const Term& term) {
  Substitution s;
  if (match_into(pattern, term, s)) return s;
  return std::nullopt;
}

inline Term substitute(const Substitution& subst, const Term& t) {
  if (t.is_var()) {
    auto it = subst.find(t.name);
    if (it == subst.end()) throw std::runtime_error("unbound variable: " + t.name);
    return it->second;
  }
  Term out = t;
  for (auto& a : out.args) a = substitute(subst, a);
  return out;
}

inline bool has_vars(const Term& t) {
  if (t.is_var()) return true;
  for (const auto& a : t.args)
    if (has_vars(a)) return true;
  return false;
}

inline void collect_vars(const Term& t, std::set<std::string>& out) {
  if (t.is_var()) out.insert(t.name);
  for (const auto& a : t.args) collect_vars(a, out);
}

// --- text parser -----------------------------------------------------------
// Grammar: ident | tick | pair(t, t [, t...]) | h(t) | sign(t, key)
// pair with >2 arguments nests to the right. Identifier resolution (bound
// variable vs global atom) is the caller's job via the resolver hook.

namespace detail {

struct TermParser {
  const std::string& src;
  size_t pos = 0;

  explicit TermParser(const std::string& s) : src(s) {}

  void skip_ws() {
    while (pos < src.size() && (src[pos] == ' ' || src[pos] == '\t')) ++pos;
  }
  [[noreturn]] void fail(const std::string& msg) {
    throw std::runtime_error("term parse error at '" + src + "' pos " +
                             std::to_string(pos) + ": " + msg);
  }
  bool eat(char c) {
    skip_ws();
    if (pos < src.size() && src[pos] == c) { ++pos; return true; }
    return false;
  }
  std::string ident() {
    skip_ws();
    size_t start = pos;
    while (pos < src.size() &&
           (std::isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '_' ||
            src[pos] == '~' || src[pos] == '#'))
      ++pos;
    if (start == pos) fail("expected identifier");
    return src.substr(start, pos - start);
  }

  Term parse() {
    std::string id = ident();
    if (id == "tick") return Term::tick();
    if (eat('(')) {
      std::vector<Term> args;
      args.push_back(parse());
      while (eat(',')) args.push_back(parse());
      if (!eat(')')) fail("expected ')'");
      if (id == "h") {
        if (args.size() != 1) fail("h takes one argument");
        return Term::hash(args[0]);
      }
      if (id == "sign") {
        if (args.size() != 2) fail("sign takes two arguments");
        return Term::sig(args[0], args[1]);
      }
      if (id == "pair") {
        if (args.size() < 2) fail("pair takes at least two arguments");
        Term t = args.back();
        for (size_t i = args.size() - 1; i-- > 0;) t = Term::pair(args[i], t);
        return t;
      }
      fail("unknown constructor '" + id + "'");
    }
    return Term::atom(id);  // kind resolved later
  }
};

}  // namespace detail

// Parses the textual term syntax; identifiers come back as Constant atoms
// (resolution into variables / typed atoms happens during model validation).
inline Term parse_term(const std::string& text) {
  detail::TermParser p(text);
  Term t = p.parse();
  p.skip_ws();
  if (p.pos != text.size()) p.fail("trailing input");
  return t;
}

}  // namespace arhscope
