#pragma once

// Exact inference on a network whose parameters are fixed numbers, by
// variable elimination over the full factorization.

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "bnvar/error.hpp"
#include "bnvar/network.hpp"
#include "bnvar/parameter_moments.hpp"

namespace bnvar {

/// Same shape as a Network, but every cpd row is a plain probability vector.
/// `tables[v]` is row-major: row r (parent configuration), then alternative.
struct PointNetwork {
  std::vector<std::string> names;
  std::vector<std::vector<std::string>> alternatives;
  std::vector<std::size_t> cards;
  std::vector<std::vector<std::size_t>> parents;
  std::vector<std::vector<double>> tables;

  /// Structure of `net` with zero-filled tables.
  static PointNetwork skeleton(const Network& net) {
    const Structure g(net);
    PointNetwork p;
    for (std::size_t v = 0; v < g.size(); ++v) {
      p.names.push_back(net.nodes[v].name);
      p.alternatives.push_back(net.nodes[v].alternatives);
      p.cards.push_back(g.card(v));
      p.parents.push_back(g.parents(v));
      p.tables.emplace_back(g.row_count(v) * g.card(v), 0.0);
    }
    return p;
  }

  std::size_t size() const noexcept { return cards.size(); }
  std::size_t row_count(std::size_t v) const { return tables[v].size() / cards[v]; }
  std::span<double> row(std::size_t v, std::size_t r) { return {tables[v].data() + r * cards[v], cards[v]}; }
  std::span<const double> row(std::size_t v, std::size_t r) const {
    return {tables[v].data() + r * cards[v], cards[v]};
  }
  void set_row(std::size_t v, std::size_t r, std::span<const double> probs) {
    if (probs.size() != cards[v]) fail(ErrorCode::usage, "row length mismatch for node '" + names[v] + "'");
    std::copy(probs.begin(), probs.end(), row(v, r).begin());
  }

  std::optional<std::size_t> find(std::string_view node) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == node) return i;
    return std::nullopt;
  }
};

/// Replaces every stored distribution by its mean vector.
inline PointNetwork instantiate_expected(const Network& net) {
  auto p = PointNetwork::skeleton(net);
  for (std::size_t v = 0; v < net.nodes.size(); ++v)
    for (std::size_t r = 0; r < net.nodes[v].cpd.size(); ++r) {
      const auto m = moments_of(net.nodes[v].cpd[r]);
      p.set_row(v, r, std::span<const double>(m.mean.data(), m.size()));
    }
  return p;
}

namespace detail {

/// Table over `vars` (row-major, last variable fastest).
struct Factor {
  std::vector<std::size_t> vars;
  std::vector<std::size_t> cards;
  std::vector<double> values;

  bool has(std::size_t v) const { return std::find(vars.begin(), vars.end(), v) != vars.end(); }
};

inline Factor factor_product(const Factor& a, const Factor& b) {
  Factor out;
  out.vars = a.vars;
  out.cards = a.cards;
  for (std::size_t k = 0; k < b.vars.size(); ++k)
    if (!a.has(b.vars[k])) {
      out.vars.push_back(b.vars[k]);
      out.cards.push_back(b.cards[k]);
    }
  const std::size_t nv = out.vars.size();
  // Stride of each output variable inside a and b (0 when absent).
  std::vector<std::size_t> sa(nv, 0), sb(nv, 0);
  auto strides_into = [&](const Factor& f, std::vector<std::size_t>& s) {
    std::size_t stride = 1;
    for (std::size_t k = f.vars.size(); k-- > 0;) {
      auto pos = std::find(out.vars.begin(), out.vars.end(), f.vars[k]) - out.vars.begin();
      s[pos] = stride;
      stride *= f.cards[k];
    }
  };
  strides_into(a, sa);
  strides_into(b, sb);
  std::size_t total = 1;
  for (auto c : out.cards) total *= c;
  out.values.resize(total);
  std::vector<std::size_t> idx(nv, 0);
  std::size_t ia = 0, ib = 0;
  for (std::size_t n = 0; n < total; ++n) {
    out.values[n] = a.values[ia] * b.values[ib];
    for (std::size_t k = nv; k-- > 0;) {
      if (++idx[k] < out.cards[k]) {
        ia += sa[k];
        ib += sb[k];
        break;
      }
      ia -= sa[k] * (out.cards[k] - 1);
      ib -= sb[k] * (out.cards[k] - 1);
      idx[k] = 0;
    }
  }
  return out;
}

// Keeps the slice var == value (or sums over var when value is empty).
inline Factor factor_collapse(const Factor& f, std::size_t var, std::optional<std::size_t> value) {
  const auto pos = static_cast<std::size_t>(std::find(f.vars.begin(), f.vars.end(), var) - f.vars.begin());
  std::size_t inner = 1;
  for (std::size_t k = pos + 1; k < f.vars.size(); ++k) inner *= f.cards[k];
  const std::size_t card = f.cards[pos];
  const std::size_t outer = f.values.size() / (inner * card);
  Factor out;
  out.vars = f.vars;
  out.cards = f.cards;
  out.vars.erase(out.vars.begin() + static_cast<std::ptrdiff_t>(pos));
  out.cards.erase(out.cards.begin() + static_cast<std::ptrdiff_t>(pos));
  out.values.assign(outer * inner, 0.0);
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t x = 0; x < card; ++x) {
      if (value && x != *value) continue;
      for (std::size_t i = 0; i < inner; ++i) out.values[o * inner + i] += f.values[(o * card + x) * inner + i];
    }
  return out;
}

inline std::vector<Factor> network_factors(const PointNetwork& net,
                                           const std::vector<std::optional<std::size_t>>& ev) {
  std::vector<Factor> factors;
  for (std::size_t v = 0; v < net.size(); ++v) {
    Factor f;
    f.vars = net.parents[v];
    f.vars.push_back(v);
    for (auto u : f.vars) f.cards.push_back(net.cards[u]);
    f.values = net.tables[v];
    for (auto u : std::vector<std::size_t>(f.vars))
      if (ev[u]) f = factor_collapse(f, u, ev[u]);
    factors.push_back(std::move(f));
  }
  return factors;
}

// Min-degree ordering over the interaction graph of `factors`; ties go to
// the smallest node index.
inline std::vector<std::size_t> min_degree_order(std::vector<std::set<std::size_t>> scopes,
                                                 std::vector<std::size_t> to_eliminate) {
  std::vector<std::size_t> order;
  while (!to_eliminate.empty()) {
    std::size_t best = 0, best_degree = static_cast<std::size_t>(-1);
    for (std::size_t k = 0; k < to_eliminate.size(); ++k) {
      std::set<std::size_t> nbrs;
      for (const auto& s : scopes)
        if (s.count(to_eliminate[k])) nbrs.insert(s.begin(), s.end());
      nbrs.erase(to_eliminate[k]);
      if (nbrs.size() < best_degree || (nbrs.size() == best_degree && to_eliminate[k] < to_eliminate[best])) {
        best = k;
        best_degree = nbrs.size();
      }
    }
    const auto v = to_eliminate[best];
    std::set<std::size_t> merged;
    std::vector<std::set<std::size_t>> rest;
    for (auto& s : scopes) {
      if (s.count(v)) merged.insert(s.begin(), s.end());
      else rest.push_back(std::move(s));
    }
    merged.erase(v);
    rest.push_back(std::move(merged));
    scopes = std::move(rest);
    order.push_back(v);
    to_eliminate.erase(to_eliminate.begin() + static_cast<std::ptrdiff_t>(best));
  }
  return order;
}

inline std::string describe_evidence(const PointNetwork& net, const std::vector<std::optional<std::size_t>>& ev) {
  std::string s = "{";
  bool first = true;
  for (std::size_t v = 0; v < net.size(); ++v)
    if (ev[v]) {
      s += (first ? "" : ", ") + net.names[v] + "=" + net.alternatives[v][*ev[v]];
      first = false;
    }
  return s + "}";
}

inline std::vector<std::optional<std::size_t>> resolve_point_evidence(const PointNetwork& net, const Evidence& ev) {
  std::vector<std::optional<std::size_t>> out(net.size());
  for (const auto& [name, value] : ev) {
    auto v = net.find(name);
    if (!v) fail(ErrorCode::schema, "evidence names unknown node '" + name + "'");
    if (value >= net.cards[*v]) fail(ErrorCode::schema, "evidence index out of range for node '" + name + "'");
    out[*v] = value;
  }
  return out;
}

// Unnormalized P(query, evidence) with the given elimination order (or
// min-degree when `order` is empty).
inline std::vector<double> joint_with_evidence(const PointNetwork& net, const std::vector<std::optional<std::size_t>>& ev,
                                               std::size_t query, std::span<const std::size_t> order) {
  auto factors = network_factors(net, ev);
  std::vector<std::size_t> elim;
  if (order.empty()) {
    std::vector<std::size_t> hidden;
    for (std::size_t v = 0; v < net.size(); ++v)
      if (!ev[v] && v != query) hidden.push_back(v);
    std::vector<std::set<std::size_t>> scopes;
    for (const auto& f : factors) scopes.emplace_back(f.vars.begin(), f.vars.end());
    elim = min_degree_order(std::move(scopes), std::move(hidden));
  } else {
    for (auto v : order)
      if (!ev[v] && v != query) elim.push_back(v);
  }
  for (auto v : elim) {
    Factor merged{{}, {}, {1.0}};
    std::vector<Factor> rest;
    for (auto& f : factors) {
      if (f.has(v)) merged = factor_product(merged, f);
      else rest.push_back(std::move(f));
    }
    rest.push_back(factor_collapse(merged, v, std::nullopt));
    factors = std::move(rest);
  }
  Factor result{{}, {}, {1.0}};
  for (const auto& f : factors) result = factor_product(result, f);
  for (auto u : std::vector<std::size_t>(result.vars))
    if (u != query) result = factor_collapse(result, u, std::nullopt);

  if (ev[query]) {
    std::vector<double> out(net.cards[query], 0.0);
    out[*ev[query]] = result.values.at(0);
    return out;
  }
  return result.values;
}

}  // namespace detail

/// P(node | evidence). `order` optionally fixes the elimination order
/// (variables not eliminated are skipped); min-degree otherwise.
inline std::vector<double> exact_marginal(const PointNetwork& net, const Evidence& ev, std::size_t node,
                                          std::span<const std::size_t> order = {}) {
  if (node >= net.size()) fail(ErrorCode::usage, "node index out of range");
  const auto resolved = detail::resolve_point_evidence(net, ev);
  auto joint = detail::joint_with_evidence(net, resolved, node, order);
  const double z = std::accumulate(joint.begin(), joint.end(), 0.0);
  if (!(z > 0.0))
    fail(ErrorCode::zero_evidence, "evidence " + detail::describe_evidence(net, resolved) + " has probability zero");
  for (double& x : joint) x /= z;
  return joint;
}

/// Conditional marginals of every node, in declaration order.
inline std::vector<std::vector<double>> exact_marginals(const PointNetwork& net, const Evidence& ev = {}) {
  std::vector<std::vector<double>> out;
  out.reserve(net.size());
  for (std::size_t v = 0; v < net.size(); ++v) out.push_back(exact_marginal(net, ev, v));
  return out;
}

}  // namespace bnvar
