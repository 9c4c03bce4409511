#pragma once

// Execution traces: the even-length alternation of honest and
// adversary-controlled messages, plus claims and the activity labeling
// shared by witness deduplication and the mining pipeline.

#include <string>
#include <vector>

#include "arhscope/term.hpp"

namespace arhscope {

// Protocol: honest message (odd positions). Stall: honest no-op. Tick:
// adversary refrains. Injection: spoof-marked adversary message.
enum class MsgKind { Protocol, Stall, Tick, Injection };

struct Message {
  MsgKind kind = MsgKind::Tick;
  std::string sender;    // empty for stall/tick
  std::string receiver;  // empty for stall/tick
  Term payload = Term::tick();
  std::string tag = "protocol";  // producing step's kind; "tick" for no-ops

  static Message stall() { return {MsgKind::Stall, "", "", Term::tick(), "tick"}; }
  static Message tick() { return {MsgKind::Tick, "", "", Term::tick(), "tick"}; }

  friend bool operator==(const Message& a, const Message& b) {
    return a.kind == b.kind && a.sender == b.sender && a.receiver == b.receiver &&
           a.payload == b.payload;
  }
};

struct Claim {
  std::string label;
  std::string entity;
  std::vector<Term> args;
  int position = 0;  // 1-based trace position at which the claim fired

  friend bool operator==(const Claim&, const Claim&) = default;
};

// Private-key material the adversary reads out of a compromised entity
// before the run starts.
struct Extraction {
  std::string entity;
  std::string key_atom;
  friend bool operator==(const Extraction&, const Extraction&) = default;
};

struct ExecutionTrace {
  std::vector<Message> steps;  // even length; odd positions honest
  std::vector<Claim> claims;
  std::vector<Extraction> extractions;
  int id_hint = -1;
  std::string compromise_key;
  std::string property;
};

inline const std::string kActivitySep = ":";

// Component names may not contain the separator; escape defensively.
inline std::string escape_label_part(const std::string& s) {
  std::string out;
  for (char ch : s) {
    if (ch == ':' || ch == '\\') out += '\\';
    out += ch;
  }
  return out;
}

// f_a(m) = sender ∘ sep ∘ receiver ∘ sep ∘ content-label, with the spoofed
// endpoint (the claimed sender of an injection) marked by a '!' suffix.
inline std::string activity_label(const Message& m) {
  switch (m.kind) {
    case MsgKind::Stall:
    case MsgKind::Tick:
      return "-" + kActivitySep + "-" + kActivitySep + "tick";
    case MsgKind::Protocol:
      return escape_label_part(m.sender) + kActivitySep + escape_label_part(m.receiver) +
             kActivitySep + to_string(m.payload);
    case MsgKind::Injection:
      return escape_label_part(m.sender) + "!" + kActivitySep + escape_label_part(m.receiver) +
             kActivitySep + to_string(m.payload);
  }
  return "?";
}

inline std::string extraction_label(const Extraction& x) {
  return "adversary" + kActivitySep + escape_label_part(x.entity) + kActivitySep + "extract(" +
         x.key_atom + ")";
}

inline std::string claim_activity_label(const Claim& c) {
  std::string args;
  for (const auto& a : c.args) {
    if (!args.empty()) args += ',';
    args += to_string(a);
  }
  return escape_label_part(c.entity) + kActivitySep + escape_label_part(c.entity) +
         kActivitySep + "claim(" + c.label + (args.empty() ? "" : "," + args) + ")";
}

// Canonical behavior signature used to deduplicate witnesses.
inline std::string activity_sequence(const ExecutionTrace& w) {
  std::string out;
  for (const auto& m : w.steps) {
    out += activity_label(m);
    out += '\n';
  }
  return out;
}

}  // namespace arhscope
