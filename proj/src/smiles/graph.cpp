//
// paccmann-cpp: multi-modal anticancer drug sensitivity prediction.
// SPDX-License-Identifier: Apache-2.0
//

#include "paccmann/smiles/graph.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <tuple>

#include "paccmann/common/hash.hpp"
#include "paccmann/smiles/token.hpp"

namespace paccmann::smiles {

namespace {

bool is_organic_subset(const std::string& element) {
  static const std::set<std::string> kOrganic = {"B", "C",  "N",  "O", "P",
                                                 "S", "F", "Cl", "Br", "I"};
  return kOrganic.count(element) > 0;
}

bool is_aromatic_symbol(char c) {
  return c == 'b' || c == 'c' || c == 'n' || c == 'o' || c == 'p' || c == 's';
}

[[noreturn]] void fail(const std::string& what, size_t pos) {
  throw ParseError(what, pos);
}

// Parses the interior of a bracket-atom token, e.g. "[13CH3+2]" or "[nH]".
// Isotope digits and chirality markers are accepted and dropped.
Atom parse_bracket_atom(const std::string& tok, size_t pos) {
  size_t i = 1;
  const size_t end = tok.size() - 1;  // index of ']'
  auto require = [&](bool ok, const char* msg) {
    if (!ok) fail(std::string("bad bracket contents: ") + msg, pos);
  };
  while (i < end && std::isdigit(static_cast<unsigned char>(tok[i]))) ++i;

  Atom atom{};
  require(i < end, "missing element symbol");
  if (std::isupper(static_cast<unsigned char>(tok[i]))) {
    atom.element = tok[i++];
    if (i < end && std::islower(static_cast<unsigned char>(tok[i])) &&
        tok[i] != 'h') {
      atom.element += tok[i++];
    }
    atom.aromatic = false;
  } else if (is_aromatic_symbol(tok[i])) {
    atom.element = static_cast<char>(std::toupper(tok[i]));
    atom.aromatic = true;
    ++i;
  } else {
    require(false, "unrecognized element symbol");
  }

  while (i < end && tok[i] == '@') ++i;

  atom.h_count = 0;
  if (i < end && tok[i] == 'H') {
    ++i;
    atom.h_count = 1;
    if (i < end && std::isdigit(static_cast<unsigned char>(tok[i]))) {
      atom.h_count = 0;
      while (i < end && std::isdigit(static_cast<unsigned char>(tok[i]))) {
        atom.h_count = atom.h_count * 10 + (tok[i++] - '0');
      }
    }
  }

  atom.charge = 0;
  if (i < end && (tok[i] == '+' || tok[i] == '-')) {
    const char mark = tok[i];
    const int sign = mark == '+' ? 1 : -1;
    ++i;
    if (i < end && std::isdigit(static_cast<unsigned char>(tok[i]))) {
      int mag = 0;
      while (i < end && std::isdigit(static_cast<unsigned char>(tok[i]))) {
        mag = mag * 10 + (tok[i++] - '0');
      }
      atom.charge = sign * mag;
    } else {
      int mag = 1;
      while (i < end && tok[i] == mark) {
        ++mag;
        ++i;
      }
      atom.charge = sign * mag;
    }
  }

  require(i == end, "trailing characters");
  return atom;
}

BondOrder bond_from_symbol(char c) {
  switch (c) {
    case '=': return BondOrder::kDouble;
    case '#': return BondOrder::kTriple;
    case ':': return BondOrder::kAromatic;
    default: return BondOrder::kSingle;  // '-', '/', '\\' (stereo dropped)
  }
}

struct RingOpening {
  int atom;
  std::optional<BondOrder> order;
  size_t position;
};

uint64_t atom_hash(const Atom& a) {
  return common::Fnv1a64()
      .str(a.element)
      .u8(a.aromatic ? 1 : 0)
      .i32(a.charge)
      .i32(a.h_count)
      .digest();
}

// One round of neighborhood color refinement.
std::vector<uint64_t> refine(const MolecularGraph& g,
                             const std::vector<uint64_t>& colors) {
  auto adj = g.adjacency();
  std::vector<uint64_t> next(colors.size());
  for (int v = 0; v < g.atom_count(); ++v) {
    std::vector<std::pair<uint8_t, uint64_t>> env;
    env.reserve(adj[v].size());
    for (auto [u, order] : adj[v]) {
      env.emplace_back(static_cast<uint8_t>(order), colors[u]);
    }
    std::sort(env.begin(), env.end());
    common::Fnv1a64 h;
    h.u64(colors[v]);
    for (auto [order, c] : env) h.u8(order).u64(c);
    next[v] = h.digest();
  }
  return next;
}

std::vector<uint64_t> stable_colors(const MolecularGraph& g) {
  std::vector<uint64_t> colors(g.atom_count());
  for (int v = 0; v < g.atom_count(); ++v) colors[v] = atom_hash(g.atoms[v]);
  for (int round = 0; round < g.atom_count(); ++round) {
    colors = refine(g, colors);
  }
  return colors;
}

}  // namespace

std::vector<std::vector<std::pair<int, BondOrder>>> MolecularGraph::adjacency()
    const {
  std::vector<std::vector<std::pair<int, BondOrder>>> adj(atoms.size());
  for (const auto& b : bonds) {
    adj[b.a].emplace_back(b.b, b.order);
    adj[b.b].emplace_back(b.a, b.order);
  }
  return adj;
}

MolecularGraph parse(std::string_view s) {
  const auto tokens = tokenize_with_positions(s);
  MolecularGraph g;
  int prev = -1;
  std::optional<BondOrder> pending;
  size_t pending_pos = 0;
  std::vector<int> branch_stack;
  std::map<int, RingOpening> open_rings;
  std::set<std::pair<int, int>> seen_bonds;

  auto add_bond = [&](int a, int b, BondOrder order, size_t pos) {
    if (a == b) fail("ring closure bonds an atom to itself", pos);
    auto key = std::minmax(a, b);
    if (!seen_bonds.insert(key).second) fail("duplicate bond", pos);
    g.bonds.push_back({key.first, key.second, order});
  };
  auto default_order = [&](int a, int b) {
    return g.atoms[a].aromatic && g.atoms[b].aromatic ? BondOrder::kAromatic
                                                      : BondOrder::kSingle;
  };
  auto place_atom = [&](Atom atom, size_t pos) {
    g.atoms.push_back(std::move(atom));
    const int idx = static_cast<int>(g.atoms.size()) - 1;
    if (prev >= 0) {
      add_bond(prev, idx, pending ? *pending : default_order(prev, idx), pos);
    } else if (pending) {
      fail("bond symbol with no preceding atom", pending_pos);
    }
    pending.reset();
    prev = idx;
  };

  for (const auto& [tok, pos] : tokens) {
    const char c = tok[0];
    if (c == '[') {
      place_atom(parse_bracket_atom(tok, pos), pos);
    } else if (std::isupper(static_cast<unsigned char>(c))) {
      place_atom(Atom{tok, false, 0, -1}, pos);
    } else if (is_aromatic_symbol(c)) {
      place_atom(Atom{std::string(1, static_cast<char>(std::toupper(c))), true,
                      0, -1},
                 pos);
    } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '%') {
      if (prev < 0) fail("ring digit with no preceding atom", pos);
      const int num = c == '%' ? std::stoi(tok.substr(1)) : c - '0';
      auto it = open_rings.find(num);
      if (it == open_rings.end()) {
        open_rings[num] = {prev, pending, pos};
      } else {
        const RingOpening opening = it->second;
        open_rings.erase(it);
        if (opening.order && pending && *opening.order != *pending) {
          fail("ring closure bond orders disagree", pos);
        }
        BondOrder order = opening.order ? *opening.order
                          : pending     ? *pending
                                        : default_order(opening.atom, prev);
        add_bond(opening.atom, prev, order, pos);
      }
      pending.reset();
    } else if (c == '(') {
      if (prev < 0) fail("branch with no preceding atom", pos);
      if (pending) fail("bond symbol before branch opening", pos);
      branch_stack.push_back(prev);
    } else if (c == ')') {
      if (pending) fail("dangling bond at branch close", pending_pos);
      prev = branch_stack.back();
      branch_stack.pop_back();
    } else if (c == '.') {
      if (pending) fail("dangling bond at fragment separator", pending_pos);
      prev = -1;
    } else {
      if (pending) fail("two bond symbols in a row", pos);
      pending = bond_from_symbol(c);
      pending_pos = pos;
    }
  }

  if (pending) fail("dangling bond at end of string", pending_pos);
  if (!open_rings.empty()) {
    const auto& [num, opening] = *open_rings.begin();
    fail("unpaired ring digit " + std::to_string(num), opening.position);
  }
  return g;
}

namespace {

std::string atom_token(const Atom& a) {
  std::string symbol = a.element;
  if (a.aromatic) symbol[0] = static_cast<char>(std::tolower(symbol[0]));
  const bool plain =
      is_organic_subset(a.element) &&
      (!a.aromatic ||
       (a.element.size() == 1 && is_aromatic_symbol(symbol[0]))) &&
      a.charge == 0 && a.h_count < 0;
  if (plain) return symbol;

  std::string out = "[" + symbol;
  if (a.h_count == 1) {
    out += 'H';
  } else if (a.h_count > 1) {
    out += 'H' + std::to_string(a.h_count);
  }
  if (a.charge != 0) {
    out += a.charge > 0 ? '+' : '-';
    if (std::abs(a.charge) > 1) out += std::to_string(std::abs(a.charge));
  }
  return out + "]";
}

// Bond symbol to print between two atoms; empty when the default order for
// the endpoint pair already matches.
std::string bond_token(const MolecularGraph& g, int a, int b, BondOrder order) {
  const bool both_aromatic = g.atoms[a].aromatic && g.atoms[b].aromatic;
  switch (order) {
    case BondOrder::kSingle: return both_aromatic ? "-" : "";
    case BondOrder::kDouble: return "=";
    case BondOrder::kTriple: return "#";
    case BondOrder::kAromatic: return both_aromatic ? "" : ":";
  }
  return "";
}

struct TraversalPlan {
  // children[v]: tree edges out of v in emission order.
  std::vector<std::vector<std::pair<int, BondOrder>>> children;
  // leftover edges become ring closures, endpoints in emission order.
  std::vector<std::tuple<int, int, BondOrder>> rings;
  std::vector<int> preorder;
};

TraversalPlan plan_traversal(const MolecularGraph& g, int start,
                             common::Rng& rng) {
  struct Half {
    int to;
    BondOrder order;
    int edge;
  };
  std::vector<std::vector<Half>> adj(g.atoms.size());
  for (size_t e = 0; e < g.bonds.size(); ++e) {
    const auto& b = g.bonds[e];
    adj[b.a].push_back({b.b, b.order, static_cast<int>(e)});
    adj[b.b].push_back({b.a, b.order, static_cast<int>(e)});
  }

  TraversalPlan plan;
  plan.children.resize(g.atoms.size());
  std::vector<char> visited(g.atoms.size(), 0);
  std::vector<char> edge_used(g.bonds.size(), 0);
  std::vector<int> rank(g.atoms.size(), -1);

  std::vector<int> stack = {start};
  visited[start] = 1;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    rank[v] = static_cast<int>(plan.preorder.size());
    plan.preorder.push_back(v);
    auto halves = adj[v];
    rng.shuffle(halves);
    for (const auto& h : halves) {
      if (edge_used[h.edge]) continue;
      edge_used[h.edge] = 1;
      if (visited[h.to]) {
        plan.rings.emplace_back(h.to, v, h.order);
      } else {
        visited[h.to] = 1;
        plan.children[v].emplace_back(h.to, h.order);
      }
    }
    const auto& kids = plan.children[v];
    for (auto it = kids.rbegin(); it != kids.rend(); ++it) {
      stack.push_back(it->first);
    }
  }

  // Pop order above is exactly the preorder in which atoms will be printed;
  // orient each ring edge so its first endpoint is printed first.
  for (auto& [a, b, order] : plan.rings) {
    if (rank[a] > rank[b]) std::swap(a, b);
  }
  return plan;
}

}  // namespace

std::string serialize(const MolecularGraph& g, int start_atom,
                      common::Rng& rng) {
  if (g.atom_count() == 0) throw common::Error("serialize: empty graph");
  if (start_atom < 0 || start_atom >= g.atom_count()) {
    throw common::Error("serialize: start atom out of range");
  }
  auto plan = plan_traversal(g, start_atom, rng);
  if (static_cast<int>(plan.preorder.size()) != g.atom_count()) {
    throw DisconnectedGraph("graph is not connected");
  }

  struct RingHalf {
    int slot;  // index into plan.rings
    BondOrder order;
    int other;
  };
  std::vector<std::vector<RingHalf>> opens(g.atoms.size());
  std::vector<std::vector<RingHalf>> closes(g.atoms.size());
  for (size_t r = 0; r < plan.rings.size(); ++r) {
    const auto [a, b, order] = plan.rings[r];
    opens[a].push_back({static_cast<int>(r), order, b});
    closes[b].push_back({static_cast<int>(r), order, a});
  }

  std::vector<int> digit_of(plan.rings.size(), -1);
  std::set<int> free_digits;
  for (int d = 1; d < 100; ++d) free_digits.insert(d);

  std::string out;
  auto emit_digit = [&](int digit) {
    if (digit >= 10) out += '%';
    out += std::to_string(digit);
  };
  auto emit = [&](auto&& self, int v) -> void {
    out += atom_token(g.atoms[v]);
    for (const auto& h : opens[v]) {
      digit_of[h.slot] = *free_digits.begin();
      free_digits.erase(free_digits.begin());
      out += bond_token(g, v, h.other, h.order);
      emit_digit(digit_of[h.slot]);
    }
    for (const auto& h : closes[v]) {
      emit_digit(digit_of[h.slot]);
      free_digits.insert(digit_of[h.slot]);
    }
    const auto& kids = plan.children[v];
    for (size_t i = 0; i < kids.size(); ++i) {
      const bool last = i + 1 == kids.size();
      if (!last) out += '(';
      out += bond_token(g, v, kids[i].first, kids[i].second);
      self(self, kids[i].first);
      if (!last) out += ')';
    }
  };
  emit(emit, start_atom);
  return out;
}

bool isomorphic(const MolecularGraph& a, const MolecularGraph& b) {
  if (a.atom_count() != b.atom_count()) return false;
  if (a.bonds.size() != b.bonds.size()) return false;

  auto colors_a = stable_colors(a);
  auto colors_b = stable_colors(b);
  {
    auto sa = colors_a;
    auto sb = colors_b;
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    if (sa != sb) return false;
  }

  // Refinement only prunes; color-constrained backtracking decides.
  const int n = a.atom_count();
  std::map<std::pair<int, int>, BondOrder> edges_b;
  for (const auto& bond : b.bonds) {
    edges_b[{bond.a, bond.b}] = bond.order;
    edges_b[{bond.b, bond.a}] = bond.order;
  }
  auto adj_a = a.adjacency();

  std::vector<int> mapping(n, -1);
  std::vector<char> used(n, 0);
  auto extend = [&](auto&& self, int v) -> bool {
    if (v == n) return true;
    for (int w = 0; w < n; ++w) {
      if (used[w] || colors_a[v] != colors_b[w]) continue;
      if (!(a.atoms[v] == b.atoms[w])) continue;
      bool ok = true;
      for (auto [u, order] : adj_a[v]) {
        if (mapping[u] < 0) continue;
        auto it = edges_b.find({w, mapping[u]});
        if (it == edges_b.end() || it->second != order) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      mapping[v] = w;
      used[w] = 1;
      if (self(self, v + 1)) return true;
      mapping[v] = -1;
      used[w] = 0;
    }
    return false;
  };
  return extend(extend, 0);
}

}  // namespace paccmann::smiles
