//
// paccmann-cpp: multi-modal anticancer drug sensitivity prediction.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "paccmann/common/error.hpp"
#include "paccmann/common/rng.hpp"

namespace paccmann::smiles {

class ParseError : public common::InputError {
 public:
  ParseError(const std::string& what, size_t position)
      : InputError(what + " (at position " + std::to_string(position) + ")"),
        position(position) {}
  size_t position;
};

class DisconnectedGraph : public common::InputError {
 public:
  using InputError::InputError;
};

enum class BondOrder : uint8_t {
  kSingle = 1,
  kDouble = 2,
  kTriple = 3,
  kAromatic = 4,
};

struct Atom {
  std::string element;   // normalized symbol, e.g. "C", "Cl"
  bool aromatic = false;
  int charge = 0;
  int h_count = 0;       // explicit hydrogens from bracket atoms

  bool operator==(const Atom&) const = default;
};

struct Bond {
  int a = 0;
  int b = 0;
  BondOrder order = BondOrder::kSingle;
};

/// Atoms and bonds parsed from SMILES. Stereo markers and isotope digits are
/// accepted by the grammar but not represented here; there is no implicit
/// valence model, so hydrogen counts are the explicit bracket counts only.
struct MolecularGraph {
  std::vector<Atom> atoms;
  std::vector<Bond> bonds;

  int atom_count() const { return static_cast<int>(atoms.size()); }
  /// (neighbor, bond order) pairs per atom.
  std::vector<std::vector<std::pair<int, BondOrder>>> adjacency() const;
};

/// Parse a SMILES string over the supported grammar: organic subset
/// B,C,N,O,P,S,F,Cl,Br,I, aromatic b,c,n,o,p,s, bracket atoms with isotope /
/// H-count / charge, branches, ring closures (including %nn), bond symbols
/// - = # : / \ and dot disconnections.
MolecularGraph parse(std::string_view s);

/// Depth-first serialization from start_atom with rng-shuffled neighbor
/// order. The output parses back to a graph isomorphic to g.
std::string serialize(const MolecularGraph& g, int start_atom, common::Rng& rng);

/// Exact graph-isomorphism test (atom attributes and bond orders must match).
/// Iterative color refinement prunes; backtracking completes the decision.
bool isomorphic(const MolecularGraph& a, const MolecularGraph& b);

}  // namespace paccmann::smiles
