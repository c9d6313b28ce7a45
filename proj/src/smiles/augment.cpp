//
// paccmann-cpp: multi-modal anticancer drug sensitivity prediction.
// SPDX-License-Identifier: Apache-2.0
//

#include "paccmann/smiles/augment.hpp"

#include <set>

#include "paccmann/common/error.hpp"
#include "paccmann/common/rng.hpp"
#include "paccmann/smiles/graph.hpp"

namespace paccmann::smiles {

std::vector<std::string> augment(std::string_view s, int n, uint64_t seed) {
  if (n < 1) throw common::Error("augment: n must be positive");
  const MolecularGraph g = parse(s);

  std::vector<std::string> out = {std::string(s)};
  std::set<std::string> seen(out.begin(), out.end());
  common::Rng rng(seed);
  for (int attempt = 0;
       attempt < 10 * n && static_cast<int>(out.size()) < n; ++attempt) {
    const int start = static_cast<int>(rng.uniform_index(g.atom_count()));
    std::string variant = serialize(g, start, rng);
    if (seen.insert(variant).second) out.push_back(std::move(variant));
  }
  return out;
}

}  // namespace paccmann::smiles
