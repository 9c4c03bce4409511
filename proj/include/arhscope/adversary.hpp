#pragma once

// Permissions, compromises, the pointwise order and CRASH-M capability
// predicates. All pure; compromises are small value types.

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "arhscope/model.hpp"

namespace arhscope {

// Bit 0 = read, bit 1 = write; the order c <= c' is bitwise inclusion,
// which gives exactly {} < r < rw, {} < w < rw with r, w incomparable.
enum class Permission : uint8_t { None = 0, Read = 1, Write = 2, ReadWrite = 3 };

inline bool perm_leq(Permission a, Permission b) {
  return (static_cast<uint8_t>(a) & ~static_cast<uint8_t>(b)) == 0;
}
inline bool has_read(Permission p) { return static_cast<uint8_t>(p) & 1; }
inline bool has_write(Permission p) { return static_cast<uint8_t>(p) & 2; }

inline std::string perm_name(Permission p) {
  switch (p) {
    case Permission::None: return "none";
    case Permission::Read: return "r";
    case Permission::Write: return "w";
    case Permission::ReadWrite: return "rw";
  }
  return "?";
}

inline Permission perm_from_name(const std::string& s) {
  if (s == "none" || s.empty()) return Permission::None;
  if (s == "r") return Permission::Read;
  if (s == "w") return Permission::Write;
  if (s == "rw") return Permission::ReadWrite;
  throw std::runtime_error("unknown permission '" + s + "'");
}

// Total map component -> permission over the model's sorted component list.
struct Compromise {
  std::vector<Permission> perms;  // indexed like AnaModel::components

  explicit Compromise(size_t n = 0) : perms(n, Permission::None) {}

  size_t size() const { return perms.size(); }
  Permission at(size_t i) const { return perms[i]; }

  bool empty() const {
    for (auto p : perms)
      if (p != Permission::None) return false;
    return true;
  }
  int dom_size() const {
    int n = 0;
    for (auto p : perms) n += (p != Permission::None);
    return n;
  }
  // Sum of granted capability bits; cover edges in the Hasse diagram raise
  // this by exactly one.
  int rank() const {
    int n = 0;
    for (auto p : perms) n += (has_read(p) ? 1 : 0) + (has_write(p) ? 1 : 0);
    return n;
  }

  // Base-4 code over the component order; bijective with the lattice.
  uint64_t code() const {
    uint64_t c = 0;
    for (size_t i = perms.size(); i-- > 0;) c = c * 4 + static_cast<uint64_t>(perms[i]);
    return c;
  }
  static Compromise from_code(uint64_t code, size_t n) {
    Compromise c(n);
    for (size_t i = 0; i < n; ++i) {
      c.perms[i] = static_cast<Permission>(code & 3);
      code >>= 2;
    }
    return c;
  }

  friend bool operator==(const Compromise&, const Compromise&) = default;
};

// Canonical serialization: "comp:perm" pairs sorted by component name.
inline std::string compromise_key(const Compromise& c, const AnaModel& m) {
  std::string out;
  for (size_t i = 0; i < c.size(); ++i) {
    if (c.at(i) == Permission::None) continue;
    if (!out.empty()) out += ',';
    out += m.components[i];
    out += ':';
    out += perm_name(c.at(i));
  }
  return out;
}

inline Compromise compromise_from_key(const std::string& key, const AnaModel& m) {
  Compromise c(m.components.size());
  size_t pos = 0;
  while (pos < key.size()) {
    size_t comma = key.find(',', pos);
    if (comma == std::string::npos) comma = key.size();
    std::string item = key.substr(pos, comma - pos);
    size_t colon = item.rfind(':');
    if (colon == std::string::npos) throw std::runtime_error("bad compromise key: " + key);
    std::string name = item.substr(0, colon);
    auto it = std::lower_bound(m.components.begin(), m.components.end(), name);
    if (it == m.components.end() || *it != name)
      throw std::runtime_error("unknown component in key: " + name);
    c.perms[it - m.components.begin()] = perm_from_name(item.substr(colon + 1));
    pos = comma + 1;
  }
  return c;
}

inline size_t component_index(const AnaModel& m, const std::string& name) {
  auto it = std::lower_bound(m.components.begin(), m.components.end(), name);
  if (it == m.components.end() || *it != name)
    throw std::runtime_error("unknown component '" + name + "'");
  return static_cast<size_t>(it - m.components.begin());
}

inline Compromise make_compromise(const AnaModel& m,
                                  const std::map<std::string, Permission>& grants) {
  Compromise c(m.components.size());
  for (const auto& [name, p] : grants) c.perms[component_index(m, name)] = p;
  return c;
}

// c <= c' pointwise.
inline bool leq(const Compromise& c, const Compromise& c2) {
  if (c.size() != c2.size()) throw std::runtime_error("compromise component-set mismatch");
  for (size_t i = 0; i < c.size(); ++i)
    if (!perm_leq(c.at(i), c2.at(i))) return false;
  return true;
}

// (c2 - c)(e) = none for e in dom(c), c2(e) otherwise.
inline Compromise subtract(const Compromise& c2, const Compromise& c) {
  if (c.size() != c2.size()) throw std::runtime_error("compromise component-set mismatch");
  Compromise out = c2;
  for (size_t i = 0; i < c.size(); ++i)
    if (c.at(i) != Permission::None) out.perms[i] = Permission::None;
  return out;
}

inline Permission perm_of(const Compromise& c, const AnaModel& m, const std::string& name) {
  return c.at(component_index(m, name));
}

inline bool read_compromised(const Compromise& c, const AnaModel& m, const std::string& comp) {
  return has_read(perm_of(c, m, comp));
}
inline bool write_compromised(const Compromise& c, const AnaModel& m, const std::string& comp) {
  return has_write(perm_of(c, m, comp));
}

inline bool entity_or_domain_read(const Compromise& c, const AnaModel& m,
                                  const std::string& entity) {
  if (read_compromised(c, m, entity)) return true;
  if (auto d = m.domain_containing(entity)) return read_compromised(c, m, *d);
  return false;
}

inline bool entity_or_domain_write(const Compromise& c, const AnaModel& m,
                                   const std::string& entity) {
  if (write_compromised(c, m, entity)) return true;
  if (auto d = m.domain_containing(entity)) return write_compromised(c, m, *d);
  return false;
}

// A message can be intercepted if sender or receiver is read-compromised,
// or a read-compromised domain contains either endpoint.
inline bool can_intercept(const Compromise& c, const AnaModel& m, const std::string& sender,
                          const std::string& receiver) {
  return entity_or_domain_read(c, m, sender) || entity_or_domain_read(c, m, receiver);
}

// Injection capability at an endpoint: the endpoint itself or its domain is
// write-compromised.
inline bool can_inject_as(const Compromise& c, const AnaModel& m, const std::string& endpoint) {
  return entity_or_domain_write(c, m, endpoint);
}

// Injection on a link (s, r): either the receiving endpoint is
// write-permitted, or the claimed sender sits inside a write-compromised
// domain (domain write allows spoofing members on links touching it).
inline bool can_inject_on(const Compromise& c, const AnaModel& m, const std::string& sender,
                          const std::string& receiver) {
  if (can_inject_as(c, m, receiver)) return true;
  if (auto d = m.domain_containing(sender))
    if (write_compromised(c, m, *d)) return true;
  return false;
}

}  // namespace arhscope
