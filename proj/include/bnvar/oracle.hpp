#pragma once

// Brute-force ground truth. When every stored row has finitely many
// possible values, the distribution of any inferred probability is a finite
// mixture: enumerate every combination of atoms, run exact inference on
// each resulting point network, and weight by the product of atom weights.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "bnvar/error.hpp"
#include "bnvar/moment_propagation.hpp"
#include "bnvar/network.hpp"
#include "bnvar/point_inference.hpp"

namespace bnvar {

inline constexpr std::uint64_t kMaxAtomCombinations = 1'000'000;

/// One possible world: an atom choice for every stored row, with its weight.
struct AtomCombination {
  std::vector<std::size_t> choice;
  double weight = 1.0;
};

namespace detail {

struct EnumeratedRow {
  std::size_t node;
  std::size_t row;
  std::vector<Atom> atoms;
};

inline std::vector<EnumeratedRow> enumerable_rows(const Network& net) {
  std::vector<EnumeratedRow> rows;
  std::uint64_t combinations = 1;
  for (std::size_t v = 0; v < net.nodes.size(); ++v)
    for (std::size_t r = 0; r < net.nodes[v].cpd.size(); ++r) {
      const auto& spec = net.nodes[v].cpd[r];
      if (std::holds_alternative<Dirichlet>(spec))
        fail(ErrorCode::not_enumerable, "node '" + net.nodes[v].name + "' row " + std::to_string(r) +
                                            " is Dirichlet; enumeration needs point or finite specs");
      EnumeratedRow er{v, r, {}};
      if (const auto* p = std::get_if<Point>(&spec)) er.atoms.push_back({p->probs, 1.0});
      else er.atoms = std::get<Finite>(spec).atoms;
      combinations *= er.atoms.size();
      if (combinations > kMaxAtomCombinations)
        fail(ErrorCode::not_enumerable, "more than " + std::to_string(kMaxAtomCombinations) + " atom combinations");
      rows.push_back(std::move(er));
    }
  return rows;
}

// Compensated running sum.
struct KahanSum {
  double sum = 0.0, carry = 0.0;
  void add(double x) {
    const double y = x - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

/// Calls visit(point_network, weight) once per atom combination, in
/// mixed-radix order (last row fastest).
template <class Visit>
void for_each_combination(const Network& net, Visit&& visit) {
  const auto rows = enumerable_rows(net);
  auto pnet = PointNetwork::skeleton(net);
  std::vector<std::size_t> choice(rows.size(), 0);
  for (std::size_t k = 0; k < rows.size(); ++k) pnet.set_row(rows[k].node, rows[k].row, rows[k].atoms[0].probs);
  while (true) {
    double w = 1.0;
    for (std::size_t k = 0; k < rows.size(); ++k) w *= rows[k].atoms[choice[k]].weight;
    visit(static_cast<const PointNetwork&>(pnet), AtomCombination{choice, w});
    std::size_t k = rows.size();
    while (k-- > 0) {
      if (++choice[k] < rows[k].atoms.size()) {
        pnet.set_row(rows[k].node, rows[k].row, rows[k].atoms[choice[k]].probs);
        break;
      }
      choice[k] = 0;
      pnet.set_row(rows[k].node, rows[k].row, rows[k].atoms[0].probs);
    }
    if (k == static_cast<std::size_t>(-1)) return;
  }
}

}  // namespace detail

/// Exact moments of P(node | ev) over every atom combination.
inline NodeMoments enumerate_exact_moments(const Network& net, const Evidence& ev, std::string_view node) {
  const auto v = net.index_of(node);
  const auto t = static_cast<Eigen::Index>(net.nodes[v].arity());
  std::vector<detail::KahanSum> mean(static_cast<std::size_t>(t));
  std::vector<detail::KahanSum> second(static_cast<std::size_t>(t * t));
  detail::for_each_combination(net, [&](const PointNetwork& p, const AtomCombination& combo) {
    const auto x = exact_marginal(p, ev, v);
    for (Eigen::Index i = 0; i < t; ++i) {
      mean[static_cast<std::size_t>(i)].add(combo.weight * x[static_cast<std::size_t>(i)]);
      for (Eigen::Index j = 0; j < t; ++j)
        second[static_cast<std::size_t>(i * t + j)].add(combo.weight * x[static_cast<std::size_t>(i)] *
                                                        x[static_cast<std::size_t>(j)]);
    }
  });
  Eigen::VectorXd mu(t);
  Eigen::MatrixXd s(t, t);
  for (Eigen::Index i = 0; i < t; ++i) {
    mu(i) = mean[static_cast<std::size_t>(i)].sum;
    for (Eigen::Index j = 0; j < t; ++j) s(i, j) = second[static_cast<std::size_t>(i * t + j)].sum;
  }
  return detail::finish(std::string(node), std::move(mu), std::move(s), 0);
}

/// Oracle moments for every node, in declaration order (one pass over the
/// combinations).
inline NetworkMoments enumerate_exact_moments(const Network& net, const Evidence& ev = {}) {
  const std::size_t n = net.nodes.size();
  std::vector<std::vector<detail::KahanSum>> mean(n), second(n);
  for (std::size_t v = 0; v < n; ++v) {
    mean[v].resize(net.nodes[v].arity());
    second[v].resize(net.nodes[v].arity() * net.nodes[v].arity());
  }
  detail::for_each_combination(net, [&](const PointNetwork& p, const AtomCombination& combo) {
    const auto marginals = exact_marginals(p, ev);
    for (std::size_t v = 0; v < n; ++v) {
      const auto& x = marginals[v];
      const std::size_t t = x.size();
      for (std::size_t i = 0; i < t; ++i) {
        mean[v][i].add(combo.weight * x[i]);
        for (std::size_t j = 0; j < t; ++j) second[v][i * t + j].add(combo.weight * x[i] * x[j]);
      }
    }
  });
  NetworkMoments out;
  for (std::size_t v = 0; v < n; ++v) {
    const auto t = static_cast<Eigen::Index>(net.nodes[v].arity());
    Eigen::VectorXd mu(t);
    Eigen::MatrixXd s(t, t);
    for (Eigen::Index i = 0; i < t; ++i) {
      mu(i) = mean[v][static_cast<std::size_t>(i)].sum;
      for (Eigen::Index j = 0; j < t; ++j) s(i, j) = second[v][static_cast<std::size_t>(i * t + j)].sum;
    }
    out.nodes.push_back(detail::finish(net.nodes[v].name, std::move(mu), std::move(s), 0));
  }
  return out;
}

/// Distribution of the value P(node = alt | ev) across atom combinations:
/// distinct values (merged within `merge_tol`) ascending, with total weight.
inline std::vector<std::pair<double, double>> enumerate_value_distribution(const Network& net, const Evidence& ev,
                                                                           std::string_view node, std::size_t alt,
                                                                           double merge_tol = 1e-12) {
  const auto v = net.index_of(node);
  if (alt >= net.nodes[v].arity()) fail(ErrorCode::usage, "alternative index out of range");
  std::vector<std::pair<double, double>> raw;
  detail::for_each_combination(net, [&](const PointNetwork& p, const AtomCombination& combo) {
    raw.emplace_back(exact_marginal(p, ev, v)[alt], combo.weight);
  });
  std::sort(raw.begin(), raw.end());
  std::vector<std::pair<double, double>> out;
  for (const auto& [x, w] : raw) {
    if (!out.empty() && x - out.back().first <= merge_tol) out.back().second += w;
    else out.emplace_back(x, w);
  }
  return out;
}

/// Number of atom combinations the oracle would visit.
inline std::uint64_t atom_combination_count(const Network& net) {
  std::uint64_t n = 1;
  for (const auto& r : detail::enumerable_rows(net)) n *= r.atoms.size();
  return n;
}

}  // namespace bnvar
