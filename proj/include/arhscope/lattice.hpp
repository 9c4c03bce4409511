#pragma once

// Compromise lattice: cover relations of the pointwise permission order and
// scenario arithmetic. Nodes are identified by their base-4 code.

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "arhscope/adversary.hpp"

namespace arhscope {

// All covers above c: one atomic raise per successor, ordered by component
// (model order = sorted names), then permission (r before w).
inline std::vector<Compromise> successors(const Compromise& c) {
  std::vector<Compromise> out;
  for (size_t i = 0; i < c.size(); ++i) {
    switch (c.at(i)) {
      case Permission::None: {
        Compromise r = c, w = c;
        r.perms[i] = Permission::Read;
        w.perms[i] = Permission::Write;
        out.push_back(std::move(r));
        out.push_back(std::move(w));
        break;
      }
      case Permission::Read:
      case Permission::Write: {
        Compromise rw = c;
        rw.perms[i] = Permission::ReadWrite;
        out.push_back(std::move(rw));
        break;
      }
      case Permission::ReadWrite:
        break;
    }
  }
  return out;
}

// All covers below c (immediate predecessors), same ordering convention.
inline std::vector<Compromise> predecessors(const Compromise& c) {
  std::vector<Compromise> out;
  for (size_t i = 0; i < c.size(); ++i) {
    switch (c.at(i)) {
      case Permission::None:
        break;
      case Permission::Read:
      case Permission::Write: {
        Compromise n = c;
        n.perms[i] = Permission::None;
        out.push_back(std::move(n));
        break;
      }
      case Permission::ReadWrite: {
        Compromise r = c, w = c;
        r.perms[i] = Permission::Read;
        w.perms[i] = Permission::Write;
        out.push_back(std::move(r));
        out.push_back(std::move(w));
        break;
      }
    }
  }
  return out;
}

// 4^components × properties.
inline uint64_t scenario_count(int components, int properties) {
  if (components < 0 || properties < 0)
    throw std::runtime_error("scenario_count: inputs must be >= 0");
  if (components > 30) throw std::runtime_error("scenario_count: component count too large");
  return (uint64_t{1} << (2 * components)) * static_cast<uint64_t>(properties);
}

inline uint64_t lattice_size(size_t components) {
  if (components > 30) throw std::runtime_error("lattice too large to enumerate");
  return uint64_t{1} << (2 * components);
}

}  // namespace arhscope
