//
// paccmann-cpp: multi-modal anticancer drug sensitivity prediction.
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace paccmann::smiles {

/// Distinct SMILES serializations of one molecule. The first element is s
/// itself; the rest are randomized depth-first serializations, deduplicated.
/// Draws (start atom, neighbor shuffle) pairs for up to 10*n attempts, so a
/// highly symmetric molecule returns fewer than n strings. Deterministic
/// given (s, n, seed).
std::vector<std::string> augment(std::string_view s, int n, uint64_t seed);

}  // namespace paccmann::smiles
