#pragma once

#include <cstddef>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "bnvar/network.hpp"

namespace bnvar {

enum class TopologyClass { tree, singly_connected, multiply_connected };

constexpr std::string_view to_string(TopologyClass c) noexcept {
  switch (c) {
    case TopologyClass::tree: return "tree";
    case TopologyClass::singly_connected: return "singly_connected";
    case TopologyClass::multiply_connected: return "multiply_connected";
  }
  return "unknown";
}

struct TopologyReport {
  TopologyClass topology = TopologyClass::tree;
  /// Minimal set of roots whose instantiation leaves an acyclic skeleton.
  /// Empty unless multiply connected.
  std::vector<std::string> suggested_cutset;
  /// False when the network is multiply connected and no root set of size
  /// <= kMaxCutsetSize breaks every loop.
  bool root_cutset_available = true;
  std::size_t max_alternatives = 0;  // T
  std::size_t min_parents = 0;       // m, taken over every node including roots
  std::size_t max_parents = 0;       // M
  std::size_t node_count = 0;        // n
  std::size_t value_count = 0;       // v, stored probability values
};

inline constexpr std::size_t kMaxCutsetSize = 3;

/// True when the undirected skeleton restricted to nodes with `removed[v]`
/// false has no cycle. An empty `removed` keeps every node.
inline bool skeleton_is_acyclic(const Structure& g, const std::vector<bool>& removed = {}) {
  const std::size_t n = g.size();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  auto gone = [&](std::size_t v) { return !removed.empty() && removed[v]; };
  for (std::size_t c = 0; c < n; ++c) {
    if (gone(c)) continue;
    for (auto p : g.parents(c)) {
      if (gone(p)) continue;
      auto a = find(p), b = find(c);
      if (a == b) return false;
      parent[a] = b;
    }
  }
  return true;
}

inline TopologyReport classify_topology(const Network& net) {
  const Structure g(net);
  TopologyReport rep;
  rep.node_count = g.size();
  rep.min_parents = g.size() ? static_cast<std::size_t>(-1) : 0;
  bool at_most_one_parent = true;
  for (std::size_t v = 0; v < g.size(); ++v) {
    const auto np = g.parents(v).size();
    rep.max_alternatives = std::max(rep.max_alternatives, g.card(v));
    rep.min_parents = std::min(rep.min_parents, np);
    rep.max_parents = std::max(rep.max_parents, np);
    rep.value_count += g.row_count(v) * g.card(v);
    at_most_one_parent &= np <= 1;
  }

  if (at_most_one_parent) {
    rep.topology = TopologyClass::tree;
    return rep;
  }
  if (skeleton_is_acyclic(g)) {
    rep.topology = TopologyClass::singly_connected;
    return rep;
  }
  rep.topology = TopologyClass::multiply_connected;

  std::vector<std::size_t> roots;
  for (std::size_t v = 0; v < g.size(); ++v)
    if (g.is_root(v)) roots.push_back(v);

  // Exhaustive search by increasing size; lexicographic in declaration order.
  std::vector<bool> removed(g.size(), false);
  std::vector<std::size_t> pick;
  auto search = [&](auto&& self, std::size_t start, std::size_t left) -> bool {
    if (left == 0) return skeleton_is_acyclic(g, removed);
    for (std::size_t k = start; k + left <= roots.size(); ++k) {
      removed[roots[k]] = true;
      pick.push_back(roots[k]);
      if (self(self, k + 1, left - 1)) return true;
      pick.pop_back();
      removed[roots[k]] = false;
    }
    return false;
  };
  for (std::size_t size = 1; size <= std::min(kMaxCutsetSize, roots.size()); ++size) {
    if (search(search, 0, size)) {
      for (auto v : pick) rep.suggested_cutset.push_back(net.nodes[v].name);
      return rep;
    }
  }
  rep.root_cutset_available = false;
  return rep;
}

}  // namespace bnvar
