#pragma once

// Uncertain-network data model: nodes with discrete alternatives whose
// conditional probability rows are random vectors (Dirichlet, point, or
// finite-support). Each cpd row is one independent source of uncertainty.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "bnvar/error.hpp"

namespace bnvar {

/// Tolerance for "sums to one" on input probability vectors and weights.
inline constexpr double kSimplexTolerance = 1e-12;

struct Dirichlet {
  std::vector<std::int64_t> counts;
  bool operator==(const Dirichlet&) const = default;
};

struct Point {
  std::vector<double> probs;
  bool operator==(const Point&) const = default;
};

struct Atom {
  std::vector<double> probs;
  double weight = 0.0;
  bool operator==(const Atom&) const = default;
};

struct Finite {
  std::vector<Atom> atoms;
  bool operator==(const Finite&) const = default;
};

/// Uncertainty over one stored probability vector.
using DistributionSpec = std::variant<Dirichlet, Point, Finite>;

/// Number of alternatives the spec ranges over.
inline std::size_t dimension(const DistributionSpec& spec) {
  return std::visit(
      [](const auto& s) -> std::size_t {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Dirichlet>) return s.counts.size();
        else if constexpr (std::is_same_v<S, Point>) return s.probs.size();
        else return s.atoms.empty() ? 0 : s.atoms.front().probs.size();
      },
      spec);
}

struct NodeSpec {
  std::string name;
  std::vector<std::string> alternatives;
  std::vector<std::string> parents;
  /// One spec per parent configuration, row-major over the parents'
  /// alternative indices in declared order (last parent varies fastest).
  std::vector<DistributionSpec> cpd;

  std::size_t arity() const noexcept { return alternatives.size(); }
  std::optional<std::size_t> alternative_index(std::string_view label) const {
    auto it = std::find(alternatives.begin(), alternatives.end(), label);
    if (it == alternatives.end()) return std::nullopt;
    return static_cast<std::size_t>(it - alternatives.begin());
  }
  bool operator==(const NodeSpec&) const = default;
};

struct Network {
  std::string name;
  std::vector<NodeSpec> nodes;

  std::optional<std::size_t> find(std::string_view node) const {
    for (std::size_t i = 0; i < nodes.size(); ++i)
      if (nodes[i].name == node) return i;
    return std::nullopt;
  }
  std::size_t index_of(std::string_view node) const {
    if (auto i = find(node)) return *i;
    fail(ErrorCode::usage, "unknown node '" + std::string(node) + "'");
  }
  bool operator==(const Network&) const = default;
};

/// Instantiated nodes: node name -> alternative index.
using Evidence = std::map<std::string, std::size_t, std::less<>>;

/// One broken invariant. `row` is set when the violation is local to a cpd row.
struct Violation {
  std::string node;
  std::optional<std::size_t> row;
  std::string rule;
  std::string message;
  bool operator==(const Violation&) const = default;
};

using ValidationReport = std::vector<Violation>;

namespace detail {

inline bool on_simplex(std::span<const double> v) {
  double sum = 0.0;
  for (double x : v) {
    if (!(x >= 0.0) || !std::isfinite(x)) return false;
    sum += x;
  }
  return std::abs(sum - 1.0) <= kSimplexTolerance;
}

inline void check_spec(const NodeSpec& node, std::size_t row, const DistributionSpec& spec,
                       ValidationReport& out) {
  auto add = [&](std::string rule, std::string msg) {
    out.push_back({node.name, row, std::move(rule), std::move(msg)});
  };
  const std::size_t t = node.arity();
  std::visit(
      [&](const auto& s) {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Dirichlet>) {
          if (s.counts.size() != t)
            add("vector-length", "dirichlet has " + std::to_string(s.counts.size()) +
                                     " counts, node has " + std::to_string(t) + " alternatives");
          for (auto c : s.counts)
            if (c < 0) {
              add("negative-count", "dirichlet counts must be non-negative integers");
              break;
            }
        } else if constexpr (std::is_same_v<S, Point>) {
          if (s.probs.size() != t)
            add("vector-length", "point vector has " + std::to_string(s.probs.size()) +
                                     " entries, node has " + std::to_string(t) + " alternatives");
          else if (!on_simplex(s.probs))
            add("simplex", "point vector is not a probability vector");
        } else {
          if (s.atoms.empty()) {
            add("finite-empty", "finite spec has no atoms");
            return;
          }
          double total = 0.0;
          for (std::size_t a = 0; a < s.atoms.size(); ++a) {
            const Atom& atom = s.atoms[a];
            if (atom.probs.size() != t)
              add("vector-length", "atom " + std::to_string(a) + " has " +
                                       std::to_string(atom.probs.size()) + " entries, node has " +
                                       std::to_string(t) + " alternatives");
            else if (!on_simplex(atom.probs))
              add("simplex", "atom " + std::to_string(a) + " is not a probability vector");
            if (!(atom.weight > 0.0) || !std::isfinite(atom.weight))
              add("finite-weight", "atom " + std::to_string(a) + " weight must be positive");
            total += atom.weight;
          }
          if (std::abs(total - 1.0) > kSimplexTolerance)
            add("finite-weights-sum", "atom weights sum to " + std::to_string(total));
        }
      },
      spec);
}

// Kahn's algorithm over resolved parent indices; empty when a cycle exists.
inline std::vector<std::size_t> topological_order(
    const std::vector<std::vector<std::size_t>>& parents) {
  const std::size_t n = parents.size();
  std::vector<std::size_t> indegree(n, 0);
  std::vector<std::vector<std::size_t>> children(n);
  for (std::size_t v = 0; v < n; ++v) {
    indegree[v] = parents[v].size();
    for (auto p : parents[v]) children[p].push_back(v);
  }
  // Smallest declaration index first among ready nodes, for determinism.
  std::set<std::size_t> ready;
  for (std::size_t v = 0; v < n; ++v)
    if (indegree[v] == 0) ready.insert(v);
  std::vector<std::size_t> order;
  order.reserve(n);
  while (!ready.empty()) {
    auto v = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(v);
    for (auto c : children[v])
      if (--indegree[c] == 0) ready.insert(c);
  }
  if (order.size() != n) order.clear();
  return order;
}

}  // namespace detail

/// Checks every model invariant; violations are returned as data.
inline ValidationReport validate_network(const Network& net) {
  ValidationReport out;
  std::map<std::string, std::size_t, std::less<>> index;
  for (std::size_t i = 0; i < net.nodes.size(); ++i) {
    if (!index.emplace(net.nodes[i].name, i).second)
      out.push_back({net.nodes[i].name, std::nullopt, "duplicate-node", "node name declared twice"});
  }

  std::vector<std::vector<std::size_t>> parents(net.nodes.size());
  std::vector<bool> resolved(net.nodes.size(), true);
  for (std::size_t i = 0; i < net.nodes.size(); ++i) {
    const NodeSpec& node = net.nodes[i];
    if (node.arity() < 2)
      out.push_back({node.name, std::nullopt, "too-few-alternatives",
                     "node needs at least 2 alternatives"});
    std::set<std::string_view> labels;
    for (const auto& a : node.alternatives)
      if (!labels.insert(a).second)
        out.push_back({node.name, std::nullopt, "duplicate-alternative",
                       "alternative '" + a + "' declared twice"});

    std::set<std::string_view> seen;
    for (const auto& p : node.parents) {
      if (!seen.insert(p).second) {
        out.push_back({node.name, std::nullopt, "duplicate-parent", "parent '" + p + "' listed twice"});
        resolved[i] = false;
        continue;
      }
      auto it = index.find(p);
      if (it == index.end()) {
        out.push_back({node.name, std::nullopt, "unknown-parent", "parent '" + p + "' is not a node"});
        resolved[i] = false;
        continue;
      }
      if (it->second == i)
        out.push_back({node.name, std::nullopt, "cycle", "node lists itself as a parent"});
      parents[i].push_back(it->second);
    }
  }

  const bool all_resolved = std::find(resolved.begin(), resolved.end(), false) == resolved.end();
  if (all_resolved) {
    bool self_loop = false;
    for (std::size_t i = 0; i < parents.size(); ++i)
      self_loop |= std::find(parents[i].begin(), parents[i].end(), i) != parents[i].end();
    if (!self_loop && detail::topological_order(parents).empty() && !net.nodes.empty())
      out.push_back({net.nodes.front().name, std::nullopt, "cycle",
                     "parent references contain a directed cycle"});
  }

  for (std::size_t i = 0; i < net.nodes.size(); ++i) {
    const NodeSpec& node = net.nodes[i];
    if (resolved[i]) {
      std::size_t rows = 1;
      for (auto p : parents[i]) rows *= net.nodes[p].arity();
      if (node.cpd.size() != rows)
        out.push_back({node.name, std::nullopt, "cpd-row-count",
                       "cpd has " + std::to_string(node.cpd.size()) + " rows, expected " +
                           std::to_string(rows)});
    }
    for (std::size_t r = 0; r < node.cpd.size(); ++r) detail::check_spec(node, r, node.cpd[r], out);
  }
  return out;
}

/// Resolved graph structure of a valid network: cardinalities, parent and
/// child indices, topological order, and row-major cpd row addressing.
class Structure {
 public:
  explicit Structure(const Network& net) {
    const std::size_t n = net.nodes.size();
    cards_.resize(n);
    parents_.resize(n);
    children_.resize(n);
    strides_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      cards_[i] = net.nodes[i].arity();
      for (const auto& p : net.nodes[i].parents) parents_[i].push_back(net.index_of(p));
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (auto p : parents_[i]) children_[p].push_back(i);
      auto& s = strides_[i];
      s.assign(parents_[i].size(), 1);
      for (std::size_t k = parents_[i].size(); k-- > 1;)
        s[k - 1] = s[k] * cards_[parents_[i][k]];
    }
    order_ = detail::topological_order(parents_);
    if (order_.size() != n) fail(ErrorCode::schema, "network has a directed cycle");
  }

  std::size_t size() const noexcept { return cards_.size(); }
  std::size_t card(std::size_t v) const { return cards_[v]; }
  const std::vector<std::size_t>& cards() const noexcept { return cards_; }
  const std::vector<std::size_t>& parents(std::size_t v) const { return parents_[v]; }
  const std::vector<std::size_t>& children(std::size_t v) const { return children_[v]; }
  const std::vector<std::size_t>& topological_order() const noexcept { return order_; }

  std::size_t row_count(std::size_t v) const {
    std::size_t rows = 1;
    for (auto p : parents_[v]) rows *= cards_[p];
    return rows;
  }
  /// Row index of the configuration `values` (one entry per parent, declared order).
  std::size_t row_index(std::size_t v, std::span<const std::size_t> values) const {
    std::size_t r = 0;
    for (std::size_t k = 0; k < values.size(); ++k) r += values[k] * strides_[v][k];
    return r;
  }
  /// Stride of parent slot `k` in node `v`'s row index.
  std::size_t stride(std::size_t v, std::size_t k) const { return strides_[v][k]; }

  bool is_root(std::size_t v) const { return parents_[v].empty(); }

  /// Every proper ancestor of `v`.
  std::vector<bool> ancestors(std::size_t v) const {
    std::vector<bool> seen(size(), false);
    std::vector<std::size_t> stack(parents_[v].begin(), parents_[v].end());
    while (!stack.empty()) {
      auto u = stack.back();
      stack.pop_back();
      if (seen[u]) continue;
      seen[u] = true;
      stack.insert(stack.end(), parents_[u].begin(), parents_[u].end());
    }
    return seen;
  }

 private:
  std::vector<std::size_t> cards_;
  std::vector<std::vector<std::size_t>> parents_;
  std::vector<std::vector<std::size_t>> children_;
  std::vector<std::vector<std::size_t>> strides_;
  std::vector<std::size_t> order_;
};

/// Evidence as a per-node optional alternative index; checks names and ranges.
inline std::vector<std::optional<std::size_t>> resolve_evidence(const Network& net,
                                                                const Evidence& ev) {
  std::vector<std::optional<std::size_t>> out(net.nodes.size());
  for (const auto& [name, value] : ev) {
    auto i = net.find(name);
    if (!i) fail(ErrorCode::schema, "evidence names unknown node '" + name + "'");
    if (value >= net.nodes[*i].arity())
      fail(ErrorCode::schema, "evidence index " + std::to_string(value) + " out of range for node '" +
                                  name + "'");
    out[*i] = value;
  }
  return out;
}

/// Throws a schema or simplex error describing the first violation, if any.
inline void require_valid(const Network& net) {
  auto report = validate_network(net);
  if (report.empty()) return;
  const auto& v = report.front();
  std::string where = "node '" + v.node + "'";
  if (v.row) where += " row " + std::to_string(*v.row);
  fail(v.rule == "simplex" || v.rule == "finite-weights-sum" ? ErrorCode::simplex : ErrorCode::schema,
       where + ": " + v.rule + ": " + v.message);
}

/// Divides each point vector, atom, and weight list by its sum. Only called
/// on validated networks, where every sum is within kSimplexTolerance of 1.
/// Vectors already summing to 1 up to rounding are left bit-for-bit intact.
inline void renormalize(Network& net) {
  constexpr double kRounding = 1e-15;
  auto scale = [](std::vector<double>& v) {
    double s = std::accumulate(v.begin(), v.end(), 0.0);
    if (std::abs(s - 1.0) > kRounding)
      for (double& x : v) x /= s;
  };
  for (auto& node : net.nodes)
    for (auto& spec : node.cpd) {
      if (auto* p = std::get_if<Point>(&spec)) scale(p->probs);
      if (auto* f = std::get_if<Finite>(&spec)) {
        std::vector<double> weights;
        for (auto& a : f->atoms) {
          scale(a.probs);
          weights.push_back(a.weight);
        }
        scale(weights);
        for (std::size_t k = 0; k < weights.size(); ++k) f->atoms[k].weight = weights[k];
      }
    }
}

}  // namespace bnvar
