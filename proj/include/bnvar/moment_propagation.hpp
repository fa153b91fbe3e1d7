#pragma once

// Exact first and second moments of node marginals when every stored cpd
// row is an independent random probability vector.
//
// For a node X with parents Y_1..Y_P that are mutually independent,
//
//   p(x_i) = sum_c theta_c[i] prod_k p(y_k = c_k)
//
// and E(p(x_i) p(x_j)) expands into products of cpd-row moments and parent
// moments: the same row c on both sides contributes E(theta_c[i] theta_c[j]),
// different rows factor into means, and each parent contributes
// E(p(y_k = c_k) p(y_k = c'_k)).
//
// Conditioning generalizes this to K joint conditions (values of
// instantiated nodes). Conditions share uncertain rows, so the engine carries
// the cross-condition moments J^{(m,m')}_{ij} = E(p(x_i | c_m) p(x_j | c_m'))
// and a sliced row is "the same row" under m and m' only when the
// instantiated parents take the same values.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "bnvar/error.hpp"
#include "bnvar/network.hpp"
#include "bnvar/parameter_moments.hpp"
#include "bnvar/topology.hpp"

namespace bnvar {

/// Moments of a node's (possibly conditional) marginal vector.
struct NodeMoments {
  std::string node;
  Eigen::VectorXd mean;      // E(p(x_i))
  Eigen::MatrixXd second;    // E(p(x_i) p(x_j))
  Eigen::VectorXd variance;  // second(i, i) - mean(i)^2
  /// Number of (i, j, row pair) term products summed to produce `second`.
  std::uint64_t term_products = 0;

  std::size_t size() const noexcept { return static_cast<std::size_t>(mean.size()); }
};

/// Per-condition means and cross-condition second moments of one node.
struct ConditionedMoments {
  std::string node;
  std::vector<Eigen::VectorXd> mean;   // [m](i) = E(p(x_i | c_m))
  std::vector<Eigen::MatrixXd> joint;  // [m * K + m'](i, j) = E(p(x_i | c_m) p(x_j | c_m'))
  std::uint64_t term_products = 0;

  std::size_t conditions() const noexcept { return mean.size(); }
  const Eigen::MatrixXd& J(std::size_t m, std::size_t mp) const { return joint[m * conditions() + mp]; }
  Eigen::MatrixXd& J(std::size_t m, std::size_t mp) { return joint[m * conditions() + mp]; }
};

/// Moments for every node, in declaration order.
struct NetworkMoments {
  std::vector<NodeMoments> nodes;

  const NodeMoments& at(std::string_view name) const {
    for (const auto& n : nodes)
      if (n.node == name) return n;
    fail(ErrorCode::usage, "no moments for node '" + std::string(name) + "'");
  }
  std::uint64_t term_products() const {
    std::uint64_t total = 0;
    for (const auto& n : nodes) total += n.term_products;
    return total;
  }
};

/// S_ii - mu_i^2.
inline double variance_of(const NodeMoments& m, std::size_t i) {
  if (i >= m.size()) fail(ErrorCode::usage, "alternative index " + std::to_string(i) + " out of range");
  return m.second(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) -
         m.mean(static_cast<Eigen::Index>(i)) * m.mean(static_cast<Eigen::Index>(i));
}

namespace detail {

inline NodeMoments finish(std::string node, Eigen::VectorXd mean, Eigen::MatrixXd second, std::uint64_t terms) {
  NodeMoments out{std::move(node), std::move(mean), std::move(second), {}, terms};
  out.variance = out.second.diagonal() - out.mean.cwiseProduct(out.mean);
  return out;
}

inline ConditionedMoments single_condition(const NodeMoments& m) {
  return {m.node, {m.mean}, {m.second}, m.term_products};
}

inline ConditionedMoments indicator_moments(std::string node, std::size_t card, std::span<const std::size_t> values) {
  const std::size_t k = values.size();
  ConditionedMoments out{std::move(node), {}, {}, 0};
  for (std::size_t m = 0; m < k; ++m) out.mean.push_back(Eigen::VectorXd::Unit(static_cast<Eigen::Index>(card),
                                                                                static_cast<Eigen::Index>(values[m])));
  for (std::size_t m = 0; m < k; ++m)
    for (std::size_t mp = 0; mp < k; ++mp) out.joint.push_back(out.mean[m] * out.mean[mp].transpose());
  return out;
}

/// Core expansion. `parents[k]` are the (mutually independent) free
/// parents; `row_of(c, m)` is the row index used for free configuration c
/// (row-major over `parents`) under condition m; `rows[r]` its moments.
template <class RowOf>
ConditionedMoments mix(std::string node, std::span<const ConditionedMoments* const> parents,
                       std::span<const MomentTable> rows, std::size_t conditions, RowOf row_of) {
  const std::size_t np = parents.size();
  std::vector<std::size_t> cards(np);
  std::size_t configs = 1;
  for (std::size_t k = 0; k < np; ++k) {
    cards[k] = parents[k]->mean.front().size();
    configs *= cards[k];
  }
  // digits[c][k]: value of free parent k in configuration c.
  std::vector<std::vector<std::size_t>> digits(configs, std::vector<std::size_t>(np, 0));
  for (std::size_t c = 0; c < configs; ++c)
    for (std::size_t k = np, rest = c; k-- > 0;) {
      digits[c][k] = rest % cards[k];
      rest /= cards[k];
    }

  const auto t = static_cast<Eigen::Index>(rows.front().size());
  ConditionedMoments out{std::move(node), {}, {}, 0};
  out.mean.assign(conditions, Eigen::VectorXd::Zero(t));
  out.joint.assign(conditions * conditions, Eigen::MatrixXd::Zero(t, t));

  for (std::size_t m = 0; m < conditions; ++m)
    for (std::size_t c = 0; c < configs; ++c) {
      double w = 1.0;
      for (std::size_t k = 0; k < np; ++k) w *= parents[k]->mean[m](static_cast<Eigen::Index>(digits[c][k]));
      out.mean[m] += w * rows[row_of(c, m)].mean;
    }

  Eigen::MatrixXd weight(configs, configs);
  for (std::size_t m = 0; m < conditions; ++m)
    for (std::size_t mp = 0; mp < conditions; ++mp) {
      for (std::size_t c = 0; c < configs; ++c)
        for (std::size_t cp = 0; cp < configs; ++cp) {
          double w = 1.0;
          for (std::size_t k = 0; k < np; ++k)
            w *= parents[k]->J(m, mp)(static_cast<Eigen::Index>(digits[c][k]), static_cast<Eigen::Index>(digits[cp][k]));
          weight(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(cp)) = w;
        }
      Eigen::MatrixXd& acc = out.J(m, mp);
      for (std::size_t c = 0; c < configs; ++c) {
        const std::size_t r = row_of(c, m);
        for (std::size_t cp = 0; cp < configs; ++cp) {
          const double w = weight(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(cp));
          const std::size_t rp = row_of(cp, mp);
          if (r == rp) acc += w * rows[r].second;
          else acc += w * (rows[r].mean * rows[rp].mean.transpose());
          out.term_products += static_cast<std::uint64_t>(t * t);
        }
      }
    }
  return out;
}

inline std::vector<std::vector<MomentTable>> row_moments(const Network& net) {
  std::vector<std::vector<MomentTable>> out(net.nodes.size());
  for (std::size_t v = 0; v < net.nodes.size(); ++v)
    for (const auto& spec : net.nodes[v].cpd) out[v].push_back(moments_of(spec));
  return out;
}

/// Propagates through the network with the nodes in `fixed` instantiated;
/// `values[m][v]` is the value of fixed node v under condition m. Every
/// free node's free parents must be independent, i.e. the skeleton without
/// the fixed nodes must be acyclic (checked by callers).
inline std::vector<ConditionedMoments> propagate_conditions(const Network& net, const Structure& g,
                                                            const std::vector<bool>& fixed,
                                                            const std::vector<std::vector<std::size_t>>& values) {
  const std::size_t k = values.size();
  const auto rows = row_moments(net);
  std::vector<ConditionedMoments> out(g.size());
  for (auto v : g.topological_order()) {
    if (fixed[v]) {
      std::vector<std::size_t> vals(k);
      for (std::size_t m = 0; m < k; ++m) vals[m] = values[m][v];
      out[v] = indicator_moments(net.nodes[v].name, g.card(v), vals);
      continue;
    }
    const auto& pa = g.parents(v);
    std::vector<const ConditionedMoments*> free;
    std::vector<std::size_t> free_strides;
    std::vector<std::size_t> fixed_offset(k, 0);
    for (std::size_t s = 0; s < pa.size(); ++s) {
      if (fixed[pa[s]]) {
        for (std::size_t m = 0; m < k; ++m) fixed_offset[m] += values[m][pa[s]] * g.stride(v, s);
      } else {
        free.push_back(&out[pa[s]]);
        free_strides.push_back(g.stride(v, s));
      }
    }
    std::vector<std::size_t> free_cards;
    std::size_t configs = 1;
    for (auto* p : free) {
      free_cards.push_back(static_cast<std::size_t>(p->mean.front().size()));
      configs *= free_cards.back();
    }
    std::vector<std::size_t> free_offset(configs, 0);
    for (std::size_t c = 0; c < configs; ++c)
      for (std::size_t s = free.size(), rest = c; s-- > 0;) {
        free_offset[c] += (rest % free_cards[s]) * free_strides[s];
        rest /= free_cards[s];
      }
    out[v] = mix(net.nodes[v].name, free, rows[v], k,
                 [&](std::size_t c, std::size_t m) { return fixed_offset[m] + free_offset[c]; });
  }
  return out;
}

inline NetworkMoments single_condition_result(const Network& net, std::vector<ConditionedMoments> cm) {
  NetworkMoments out;
  for (std::size_t v = 0; v < net.nodes.size(); ++v)
    out.nodes.push_back(finish(net.nodes[v].name, std::move(cm[v].mean.front()), std::move(cm[v].joint.front()),
                               cm[v].term_products));
  return out;
}

}  // namespace detail

/// Moments of a child's marginal from its parents' moments (parents assumed
/// mutually independent) and one MomentTable per parent configuration,
/// row-major over `parents`.
inline NodeMoments mix_child_moments(std::span<const NodeMoments> parents, std::span<const MomentTable> cpt,
                                     std::string node = {}) {
  std::size_t configs = 1;
  for (const auto& p : parents) configs *= p.size();
  if (cpt.size() != configs)
    fail(ErrorCode::usage, "cpt has " + std::to_string(cpt.size()) + " rows, parents need " + std::to_string(configs));
  if (cpt.empty()) fail(ErrorCode::usage, "cpt is empty");
  for (const auto& row : cpt)
    if (row.size() != cpt.front().size() || row.size() < 2) fail(ErrorCode::usage, "cpt rows have inconsistent sizes");

  std::vector<ConditionedMoments> wrapped;
  wrapped.reserve(parents.size());
  for (const auto& p : parents) wrapped.push_back(detail::single_condition(p));
  std::vector<const ConditionedMoments*> ptrs;
  for (const auto& w : wrapped) ptrs.push_back(&w);
  auto cm = detail::mix(std::move(node), ptrs, cpt, 1, [](std::size_t c, std::size_t) { return c; });
  return detail::finish(std::move(cm.node), std::move(cm.mean.front()), std::move(cm.joint.front()), cm.term_products);
}

/// Prior moments of every node of a singly connected network.
inline NetworkMoments propagate_prior_moments(const Network& net) {
  const Structure g(net);
  if (!skeleton_is_acyclic(g))
    fail(ErrorCode::unsupported, "network '" + net.name +
                                     "' is multiply connected; use conditioned prior moments with a root cutset");
  std::vector<bool> fixed(g.size(), false);
  return detail::single_condition_result(net, detail::propagate_conditions(net, g, fixed, {{}}));
}

/// Moments conditional on evidence that sits strictly upstream: every
/// ancestor of an evidence node must itself be evidence. Children of
/// evidence nodes then see sliced cpd rows as their new distributions, and
/// the remaining network (evidence removed) must be singly connected.
/// Evidence nodes are reported with their indicator vector and zero variance.
inline NetworkMoments downstream_evidence_moments(const Network& net, const Evidence& ev) {
  const Structure g(net);
  const auto resolved = resolve_evidence(net, ev);
  std::vector<bool> fixed(g.size(), false);
  std::vector<std::size_t> values(g.size(), 0);
  for (std::size_t v = 0; v < g.size(); ++v)
    if (resolved[v]) {
      fixed[v] = true;
      values[v] = *resolved[v];
    }
  for (std::size_t w = 0; w < g.size(); ++w) {
    if (!fixed[w]) continue;
    const auto anc = g.ancestors(w);
    for (std::size_t u = 0; u < g.size(); ++u)
      if (anc[u] && !fixed[u])
        fail(ErrorCode::unsupported, "evidence on '" + net.nodes[w].name + "' has uninstantiated ancestor '" +
                                         net.nodes[u].name +
                                         "'; only downward propagation is exact, use the Monte Carlo estimate");
  }
  if (!skeleton_is_acyclic(g, fixed))
    fail(ErrorCode::unsupported, "network stays multiply connected after removing the evidence nodes");
  return detail::single_condition_result(net, detail::propagate_conditions(net, g, fixed, {values}));
}

/// Per-condition and cross-condition moments for every node when the root
/// nodes in `cutset` are instantiated, one condition per joint value
/// (row-major over `cutset` in the given order).
inline std::vector<ConditionedMoments> propagate_conditioned(const Network& net,
                                                             std::span<const std::string> cutset) {
  const Structure g(net);
  std::vector<bool> fixed(g.size(), false);
  std::vector<std::size_t> members;
  for (const auto& name : cutset) {
    const auto v = net.index_of(name);
    if (!g.is_root(v)) fail(ErrorCode::unsupported, "cutset node '" + name + "' is not a root");
    if (fixed[v]) fail(ErrorCode::usage, "cutset lists '" + name + "' twice");
    fixed[v] = true;
    members.push_back(v);
  }
  if (!skeleton_is_acyclic(g, fixed))
    fail(ErrorCode::unsupported, "cutset does not break every loop of network '" + net.name + "'");

  std::size_t k = 1;
  for (auto v : members) k *= g.card(v);
  std::vector<std::vector<std::size_t>> values(k, std::vector<std::size_t>(g.size(), 0));
  for (std::size_t m = 0; m < k; ++m)
    for (std::size_t s = members.size(), rest = m; s-- > 0;) {
      values[m][members[s]] = rest % g.card(members[s]);
      rest /= g.card(members[s]);
    }
  return detail::propagate_conditions(net, g, fixed, values);
}

/// Prior moments via conditioning on a set of root nodes whose removal
/// leaves a singly connected network:
///   mu   = sum_m mu^(m) E(p(c_m))
///   S    = sum_{m,m'} J^{(m,m')} E(p(c_m) p(c_m'))
/// where p(c_m) is the product of the cutset roots' own probabilities, which
/// are independent of every row below them.
inline NetworkMoments conditioned_prior_moments(const Network& net, std::span<const std::string> cutset) {
  const auto cm = propagate_conditioned(net, cutset);
  const Structure g(net);
  std::vector<std::size_t> members;
  for (const auto& name : cutset) members.push_back(net.index_of(name));
  std::vector<MomentTable> root_tables;
  for (auto v : members) root_tables.push_back(moments_of(net.nodes[v].cpd.front()));

  const std::size_t k = cm.front().conditions();
  std::vector<std::vector<std::size_t>> digits(k, std::vector<std::size_t>(members.size(), 0));
  for (std::size_t m = 0; m < k; ++m)
    for (std::size_t s = members.size(), rest = m; s-- > 0;) {
      digits[m][s] = rest % g.card(members[s]);
      rest /= g.card(members[s]);
    }
  Eigen::VectorXd w1(static_cast<Eigen::Index>(k));
  Eigen::MatrixXd w2(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
  for (std::size_t m = 0; m < k; ++m) {
    double w = 1.0;
    for (std::size_t s = 0; s < members.size(); ++s) w *= root_tables[s].mean(static_cast<Eigen::Index>(digits[m][s]));
    w1(static_cast<Eigen::Index>(m)) = w;
    for (std::size_t mp = 0; mp < k; ++mp) {
      double ww = 1.0;
      for (std::size_t s = 0; s < members.size(); ++s)
        ww *= root_tables[s].second(static_cast<Eigen::Index>(digits[m][s]), static_cast<Eigen::Index>(digits[mp][s]));
      w2(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(mp)) = ww;
    }
  }

  NetworkMoments out;
  for (std::size_t v = 0; v < g.size(); ++v) {
    const auto pos = std::find(members.begin(), members.end(), v);
    if (pos != members.end()) {
      const auto& t = root_tables[static_cast<std::size_t>(pos - members.begin())];
      out.nodes.push_back(detail::finish(net.nodes[v].name, t.mean, t.second, 0));
      continue;
    }
    const auto& c = cm[v];
    const auto t = c.mean.front().size();
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(t);
    Eigen::MatrixXd second = Eigen::MatrixXd::Zero(t, t);
    for (std::size_t m = 0; m < k; ++m) {
      mean += w1(static_cast<Eigen::Index>(m)) * c.mean[m];
      for (std::size_t mp = 0; mp < k; ++mp) second += w2(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(mp)) * c.J(m, mp);
    }
    out.nodes.push_back(detail::finish(c.node, std::move(mean), std::move(second), c.term_products));
  }
  return out;
}

}  // namespace bnvar
