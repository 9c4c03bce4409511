#pragma once

// JSON model file -> validated AnaModel.
//
// Top-level keys: entities, domains, links, roles, initial_knowledge,
// properties, bounds. Term syntax in strings: atom, pair(a,b), h(a),
// sign(a,k), tick. See models/bms.json for the reference instance.

#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "arhscope/model.hpp"

namespace arhscope {

using json = nlohmann::json;

struct ModelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

[[noreturn]] inline void model_fail(const std::string& where, const std::string& msg) {
  throw ModelError(where + ": " + msg);
}

// Resolve parsed identifiers: names in `scope` become variables, registered
// globals stay atoms, anything else is either a new pattern variable
// (allow_new_vars) or an error.
inline Term resolve(const Term& t, const std::set<std::string>& scope,
                    const std::map<std::string, AtomKind>& globals, bool allow_new_vars,
                    std::set<std::string>* new_vars, const std::string& where) {
  if (t.is_atom()) {
    if (scope.count(t.name)) return Term::var(t.name);
    auto g = globals.find(t.name);
    if (g != globals.end()) return Term::atom(t.name, g->second);
    if (allow_new_vars) {
      if (new_vars) new_vars->insert(t.name);
      return Term::var(t.name);
    }
    model_fail(where, "unbound variable '" + t.name + "'");
  }
  Term out = t;
  for (auto& a : out.args)
    a = resolve(a, scope, globals, allow_new_vars, new_vars, where);
  return out;
}

inline void register_atoms(const Term& t, std::map<std::string, AtomKind>& globals) {
  if (t.is_atom() && !globals.count(t.name)) globals.emplace(t.name, AtomKind::Constant);
  for (const auto& a : t.args) register_atoms(a, globals);
}

inline void infer_key_kinds(const Term& t, std::map<std::string, AtomKind>& kinds) {
  if (t.kind == TermKind::Sig && t.args[1].is_atom()) kinds[t.args[1].name] = AtomKind::PrivateKey;
  for (const auto& a : t.args) infer_key_kinds(a, kinds);
}

inline void apply_atom_kinds(Term& t, const std::map<std::string, AtomKind>& kinds) {
  if (t.is_atom()) {
    auto it = kinds.find(t.name);
    if (it != kinds.end()) t.atom_kind = it->second;
  }
  for (auto& a : t.args) apply_atom_kinds(a, kinds);
}

}  // namespace detail

inline AnaModel parse_model(const json& doc) {
  using detail::model_fail;
  AnaModel m;

  if (!doc.is_object()) model_fail("document", "expected a JSON object");

  for (const auto& e : doc.value("entities", json::array())) {
    std::string name = e.get<std::string>();
    if (name.empty()) model_fail("entities", "empty entity name");
    if (std::find(m.entities.begin(), m.entities.end(), name) != m.entities.end())
      model_fail("entities", "duplicate component id '" + name + "'");
    m.entities.push_back(name);
  }
  std::sort(m.entities.begin(), m.entities.end());
  if (m.entities.empty()) model_fail("entities", "model needs at least one entity");

  if (doc.contains("domains")) {
    for (const auto& [dname, members] : doc.at("domains").items()) {
      if (m.is_entity(dname))
        model_fail("domains", "duplicate component id '" + dname + "'");
      if (m.domains.count(dname)) model_fail("domains", "duplicate domain '" + dname + "'");
      auto& set = m.domains[dname];
      for (const auto& mem : members) {
        std::string e = mem.get<std::string>();
        if (!m.is_entity(e)) model_fail("domains." + dname, "unknown member '" + e + "'");
        if (m.domain_of.count(e))
          model_fail("domains." + dname, "entity '" + e + "' already in domain '" +
                                             m.domain_of[e] + "'");
        set.insert(e);
        m.domain_of[e] = dname;
      }
    }
  }

  for (const auto& l : doc.value("links", json::array())) {
    if (!l.is_array() || l.size() != 2) model_fail("links", "link must be a [from, to] pair");
    std::string a = l[0].get<std::string>(), b = l[1].get<std::string>();
    for (const auto& end : {a, b})
      if (!m.is_entity(end)) model_fail("links", "unknown endpoint '" + end + "'");
    m.links.insert({a, b});
  }
  for (const auto& e : m.entities) m.links.insert({e, e});  // self-links, implicit

  // Global atom registry: entity names, then initial-knowledge atoms.
  std::map<std::string, AtomKind>& globals = m.atom_kinds;
  for (const auto& e : m.entities) globals[e] = AtomKind::Constant;

  if (doc.contains("initial_knowledge")) {
    for (const auto& [ent, terms] : doc.at("initial_knowledge").items()) {
      if (!m.is_entity(ent)) model_fail("initial_knowledge", "unknown entity '" + ent + "'");
      for (const auto& ts : terms) {
        Term t = parse_term(ts.get<std::string>());
        detail::register_atoms(t, globals);
        m.initial_knowledge[ent].insert(t);
      }
    }
  }

  // Fresh names are script-local; collect them first so collisions (with
  // globals or across roles) are rejected before resolution.
  std::set<std::string> all_fresh;
  if (doc.contains("roles")) {
    for (const auto& [ent, steps] : doc.at("roles").items()) {
      for (const auto& st : steps) {
        for (const auto& f : st.value("fresh", json::array())) {
          std::string name = f.get<std::string>();
          if (name == kAdversaryNonce)
            model_fail("roles." + ent, "'" + name + "' is reserved for the adversary");
          if (globals.count(name) || !all_fresh.insert(name).second)
            model_fail("roles." + ent, "fresh name '" + name + "' is not unique");
        }
      }
    }
  }

  if (doc.contains("roles")) {
    for (const auto& [ent, steps] : doc.at("roles").items()) {
      if (!m.is_entity(ent)) model_fail("roles", "unknown entity '" + ent + "'");
      RoleScript script;
      script.owner = ent;
      std::set<std::string> scope;
      int idx = 0;
      for (const auto& st : steps) {
        std::string where = "roles." + ent + "[" + std::to_string(idx++) + "]";
        Step step;
        const auto& trig = st.at("trigger");
        if (trig.is_string() && trig.get<std::string>() == "start") {
          step.trigger.start = true;
        } else if (trig.is_object() && trig.contains("receive")) {
          const auto& rcv = trig.at("receive");
          std::string pat;
          if (rcv.is_string()) {
            pat = rcv.get<std::string>();
          } else {
            pat = rcv.at("pattern").get<std::string>();
            if (rcv.contains("from")) {
              std::string from = rcv.at("from").get<std::string>();
              if (!m.is_entity(from)) model_fail(where, "unknown sender '" + from + "'");
              if (!m.has_link(from, ent))
                model_fail(where, "no link (" + from + ", " + ent + ")");
              step.trigger.from = from;
            }
          }
          std::set<std::string> pattern_vars;
          step.trigger.pattern =
              detail::resolve(parse_term(pat), scope, globals, true, &pattern_vars, where);
          scope.insert(pattern_vars.begin(), pattern_vars.end());
        } else {
          model_fail(where, "trigger must be \"start\" or {\"receive\": ...}");
        }

        for (const auto& f : st.value("fresh", json::array())) {
          step.fresh.push_back(f.get<std::string>());
          scope.insert(step.fresh.back());
        }
        for (const auto& b : st.value("bind", json::array())) {
          Binding binding;
          binding.name = b.at("name").get<std::string>();
          binding.expr = detail::resolve(parse_term(b.at("term").get<std::string>()), scope,
                                         globals, false, nullptr, where);
          step.bind.push_back(binding);
          scope.insert(binding.name);
        }
        for (const auto& g : st.value("guard", json::array())) {
          Guard guard;
          guard.left = detail::resolve(parse_term(g.at("left").get<std::string>()), scope,
                                       globals, false, nullptr, where);
          guard.right = detail::resolve(parse_term(g.at("right").get<std::string>()), scope,
                                        globals, false, nullptr, where);
          step.guards.push_back(guard);
        }
        if (st.contains("send") && !st.at("send").is_null()) {
          Send send;
          send.to = st.at("send").at("to").get<std::string>();
          if (!m.is_entity(send.to)) model_fail(where, "unknown endpoint '" + send.to + "'");
          if (!m.has_link(ent, send.to))
            model_fail(where, "no link (" + ent + ", " + send.to + ")");
          send.expr = detail::resolve(parse_term(st.at("send").at("term").get<std::string>()),
                                      scope, globals, false, nullptr, where);
          step.send = send;
        }
        for (const auto& c : st.value("claim", json::array())) {
          ClaimSpec claim;
          claim.label = c.at("label").get<std::string>();
          for (const auto& a : c.at("args"))
            claim.args.push_back(detail::resolve(parse_term(a.get<std::string>()), scope,
                                                 globals, false, nullptr, where));
          step.claims.push_back(claim);
        }
        step.step_kind = st.value("kind", std::string("protocol"));
        if (step.trigger.start && !step.send)
          model_fail(where, "start-trigger steps must send a message");
        script.steps.push_back(std::move(step));
      }
      m.roles[ent] = std::move(script);
    }
  }

  for (const auto& p : doc.value("properties", json::array())) {
    SecurityProperty sp;
    sp.name = p.at("name").get<std::string>();
    std::string kind = p.at("kind").get<std::string>();
    if (kind == "secrecy") {
      sp.kind = SecurityProperty::Kind::Secrecy;
      for (const auto& s : p.at("secrets")) {
        SecurityProperty::SecretSelector sel;
        sel.role = s.at("role").get<std::string>();
        sel.fresh = s.at("fresh").get<std::string>();
        bool found = false;
        auto it = m.roles.find(sel.role);
        if (it != m.roles.end())
          for (const auto& st : it->second.steps)
            for (const auto& f : st.fresh)
              if (f == sel.fresh) found = true;
        if (!found)
          detail::model_fail("properties." + sp.name,
                             "unknown fresh name '" + sel.role + "." + sel.fresh + "'");
        sp.secrets.push_back(sel);
      }
      if (sp.secrets.empty())
        detail::model_fail("properties." + sp.name, "secrecy needs at least one secret");
    } else if (kind == "agreement") {
      sp.kind = SecurityProperty::Kind::Agreement;
      sp.end_claim = p.at("end_claim").get<std::string>();
      sp.init_claim = p.at("init_claim").get<std::string>();
      for (const auto& i : p.value("matched_args", json::array()))
        sp.matched_args.push_back(i.get<int>());
      auto claim_exists = [&](const std::string& label) {
        for (const auto& [ent, script] : m.roles)
          for (const auto& st : script.steps)
            for (const auto& c : st.claims)
              if (c.label == label) return true;
        return false;
      };
      for (const auto& label : {sp.end_claim, sp.init_claim})
        if (!claim_exists(label))
          detail::model_fail("properties." + sp.name, "unknown claim '" + label + "'");
    } else {
      detail::model_fail("properties." + sp.name, "unknown property kind '" + kind + "'");
    }
    m.properties.push_back(std::move(sp));
  }

  if (doc.contains("bounds")) {
    const auto& b = doc.at("bounds");
    m.bounds.max_sessions = b.value("max_sessions", 1);
    m.bounds.max_trace_len = b.value("max_trace_len", 16);
    m.bounds.max_term_depth = b.value("max_term_depth", 3);
    if (m.bounds.max_sessions < 1 || m.bounds.max_trace_len < 1 || m.bounds.max_term_depth < 1)
      detail::model_fail("bounds", "all bounds must be >= 1");
  }

  // Atom-kind inference: sign() keys are private keys, fresh names nonces.
  auto infer_all = [&](const Term& t) { detail::infer_key_kinds(t, m.atom_kinds); };
  for (const auto& [e, ks] : m.initial_knowledge)
    for (const auto& t : ks) infer_all(t);
  for (auto& [e, script] : m.roles)
    for (auto& st : script.steps) {
      infer_all(st.trigger.pattern);
      for (auto& b : st.bind) infer_all(b.expr);
      for (auto& g : st.guards) { infer_all(g.left); infer_all(g.right); }
      if (st.send) infer_all(st.send->expr);
    }
  for (const auto& f : all_fresh) m.atom_kinds[f] = AtomKind::Nonce;
  m.atom_kinds[kAdversaryNonce] = AtomKind::Nonce;

  auto tag = [&](Term& t) { detail::apply_atom_kinds(t, m.atom_kinds); };
  for (auto& [e, ks] : m.initial_knowledge) {
    TermSet tagged;
    for (Term t : ks) { tag(t); tagged.insert(std::move(t)); }
    ks = std::move(tagged);
  }
  for (auto& [e, script] : m.roles)
    for (auto& st : script.steps) {
      tag(st.trigger.pattern);
      for (auto& b : st.bind) tag(b.expr);
      for (auto& g : st.guards) { tag(g.left); tag(g.right); }
      if (st.send) tag(st.send->expr);
      for (auto& c : st.claims)
        for (auto& a : c.args) tag(a);
    }

  m.components = m.entities;
  for (const auto& [d, _] : m.domains) m.components.push_back(d);
  std::sort(m.components.begin(), m.components.end());

  uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : doc.dump()) h = (h ^ ch) * 0x100000001b3ull;
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  m.digest = buf;
  return m;
}

inline AnaModel parse_model_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ModelError(std::string("invalid JSON: ") + e.what());
  }
  return parse_model(doc);
}

inline AnaModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ModelError("cannot open model file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_model_text(ss.str());
}

}  // namespace arhscope
