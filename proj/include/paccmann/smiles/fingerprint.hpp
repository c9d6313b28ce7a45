//
// paccmann-cpp: multi-modal anticancer drug sensitivity prediction.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <bitset>
#include <cstdint>

#include "paccmann/smiles/graph.hpp"

namespace paccmann::smiles {

/// Fixed-width circular fingerprint. Isomorphic graphs yield identical bits.
struct Fingerprint {
  static constexpr int kBits = 512;
  std::bitset<kBits> bits;

  bool operator==(const Fingerprint&) const = default;
  int popcount() const { return static_cast<int>(bits.count()); }
};

/// Morgan-style circular fingerprint. Initial per-atom identifier is the
/// FNV-1a hash of (element, degree, charge, H count, aromatic); each
/// iteration rehashes an atom's identifier together with its sorted
/// (bond order, neighbor identifier) pairs. Every identifier from every
/// iteration is folded modulo the width and its bit set, so bits at radius r
/// are a subset of bits at radius r+1. Bit-level identity with third-party
/// toolkits is not a goal.
Fingerprint morgan_fingerprint(const MolecularGraph& g, int radius = 2);

}  // namespace paccmann::smiles
