//
// paccmann-cpp: multi-modal anticancer drug sensitivity prediction.
// SPDX-License-Identifier: Apache-2.0
//

#include "paccmann/smiles/fingerprint.hpp"

#include <algorithm>
#include <utility>
#include <vector>

#include "paccmann/common/error.hpp"
#include "paccmann/common/hash.hpp"

namespace paccmann::smiles {

Fingerprint morgan_fingerprint(const MolecularGraph& g, int radius) {
  if (g.atom_count() == 0) {
    throw common::Error("morgan_fingerprint: empty graph");
  }
  if (radius < 0) {
    throw common::Error("morgan_fingerprint: negative radius");
  }
  const auto adj = g.adjacency();

  std::vector<uint64_t> ids(g.atoms.size());
  for (int v = 0; v < g.atom_count(); ++v) {
    const Atom& a = g.atoms[v];
    ids[v] = common::Fnv1a64()
                 .str(a.element)
                 .u32(static_cast<uint32_t>(adj[v].size()))
                 .i32(a.charge)
                 .i32(a.h_count)
                 .u8(a.aromatic ? 1 : 0)
                 .digest();
  }

  Fingerprint fp;
  auto fold = [&](uint64_t id) { fp.bits.set(id % Fingerprint::kBits); };
  for (uint64_t id : ids) fold(id);

  for (int iter = 0; iter < radius; ++iter) {
    std::vector<uint64_t> next(ids.size());
    for (int v = 0; v < g.atom_count(); ++v) {
      std::vector<std::pair<uint8_t, uint64_t>> env;
      env.reserve(adj[v].size());
      for (auto [u, order] : adj[v]) {
        env.emplace_back(static_cast<uint8_t>(order), ids[u]);
      }
      std::sort(env.begin(), env.end());
      common::Fnv1a64 h;
      h.u64(ids[v]);
      for (auto [order, id] : env) h.u8(order).u64(id);
      next[v] = h.digest();
    }
    ids = std::move(next);
    for (uint64_t id : ids) fold(id);
  }
  return fp;
}

}  // namespace paccmann::smiles
