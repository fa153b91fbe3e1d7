#pragma once

#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <variant>

#include <Eigen/Dense>

#include "bnvar/error.hpp"
#include "bnvar/network.hpp"

namespace bnvar {

/// First and second moments of one random probability vector p:
/// mean(i) = E(p_i), second(i, j) = E(p_i p_j).
struct MomentTable {
  Eigen::VectorXd mean;
  Eigen::MatrixXd second;

  std::size_t size() const noexcept { return static_cast<std::size_t>(mean.size()); }
  double variance(std::size_t i) const { return second(i, i) - mean(i) * mean(i); }
};

/// Moments of the Dirichlet density proportional to prod_i p_i^{a_i} with
/// non-negative integer counts a_i (so the usual shape parameters are a_i + 1).
inline MomentTable dirichlet_moments(std::span<const std::int64_t> counts) {
  const auto t = static_cast<Eigen::Index>(counts.size());
  if (t < 2) fail(ErrorCode::usage, "dirichlet needs at least 2 alternatives");
  for (auto c : counts)
    if (c < 0) fail(ErrorCode::usage, "dirichlet counts must be non-negative");

  const double total = static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::int64_t{0})) +
                       static_cast<double>(t);
  MomentTable m{Eigen::VectorXd(t), Eigen::MatrixXd(t, t)};
  for (Eigen::Index i = 0; i < t; ++i) m.mean(i) = (static_cast<double>(counts[i]) + 1.0) / total;
  for (Eigen::Index i = 0; i < t; ++i) {
    const double ai = static_cast<double>(counts[i]) + 1.0;
    for (Eigen::Index j = 0; j < t; ++j) {
      const double aj = static_cast<double>(counts[j]) + 1.0;
      m.second(i, j) = i == j ? (ai + 1.0) / (total + 1.0) * m.mean(i) : ai * aj / ((total + 1.0) * total);
    }
  }
  return m;
}

/// Moments of a distribution with finitely many atoms: weighted averages of
/// each atom's entries and pairwise products.
inline MomentTable finite_support_moments(std::span<const Atom> atoms) {
  if (atoms.empty()) fail(ErrorCode::usage, "finite spec has no atoms");
  const auto t = static_cast<Eigen::Index>(atoms.front().probs.size());
  MomentTable m{Eigen::VectorXd::Zero(t), Eigen::MatrixXd::Zero(t, t)};
  for (const auto& a : atoms) {
    if (static_cast<Eigen::Index>(a.probs.size()) != t)
      fail(ErrorCode::usage, "finite atoms have inconsistent lengths");
    const Eigen::Map<const Eigen::VectorXd> v(a.probs.data(), t);
    m.mean += a.weight * v;
    m.second += a.weight * v * v.transpose();
  }
  return m;
}

inline MomentTable moments_of(const DistributionSpec& spec) {
  return std::visit(
      [](const auto& s) -> MomentTable {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Dirichlet>) {
          return dirichlet_moments(s.counts);
        } else if constexpr (std::is_same_v<S, Point>) {
          const Atom atom{s.probs, 1.0};
          return finite_support_moments(std::span<const Atom>(&atom, 1));
        } else {
          return finite_support_moments(s.atoms);
        }
      },
      spec);
}

}  // namespace bnvar
