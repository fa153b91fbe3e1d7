#pragma once

// Random probability vectors for Monte Carlo trials. Dirichlet vectors are
// drawn one component at a time: each component is a Beta draw, obtained by
// inverting the Beta CDF at a uniform number, scaled by the mass left over.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <variant>
#include <vector>

#include "bnvar/error.hpp"
#include "bnvar/network.hpp"
#include "bnvar/special_functions.hpp"

namespace bnvar {

/// Source of reals uniform on [0, 1]. A low-discrepancy sequence can be
/// plugged in anywhere a RandomStream is accepted.
template <class S>
concept UniformStream = requires(S& s) {
  { s.next() } -> std::convertible_to<double>;
};

/// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of the stream for cpd row `row` in trial `trial`:
/// splitmix64(splitmix64(splitmix64(master) ^ trial) ^ row).
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t trial, std::uint64_t row) noexcept {
  return splitmix64(splitmix64(splitmix64(master) ^ trial) ^ row);
}

/// Deterministic pseudo-random stream; the same seed gives the same
/// sequence on every platform (mt19937_64 plus a fixed 53-bit conversion).
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}
  double next() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

/// Replays a fixed list of numbers; throws once exhausted.
class ReplayStream {
 public:
  ReplayStream(std::initializer_list<double> values) : values_(values) {}
  explicit ReplayStream(std::vector<double> values) : values_(std::move(values)) {}
  double next() {
    if (pos_ >= values_.size()) fail(ErrorCode::usage, "replay stream exhausted");
    return values_[pos_++];
  }

 private:
  std::vector<double> values_;
  std::size_t pos_ = 0;
};

inline constexpr double kBetaInverseTolerance = 1e-10;
inline constexpr int kBetaInverseMaxIterations = 200;

/// Solves I_x(alpha, beta) = r for x by safeguarded Newton iteration inside
/// a shrinking bracket; stops once |I_x - r| <= tol.
inline double beta_inverse_cdf(double alpha, double beta, double r, double tol = kBetaInverseTolerance) {
  if (!(alpha > 0.0) || !(beta > 0.0)) fail(ErrorCode::usage, "beta shape parameters must be positive");
  if (!(r >= 0.0 && r <= 1.0)) fail(ErrorCode::usage, "beta_inverse_cdf needs r in [0, 1]");
  if (!(tol > 0.0)) fail(ErrorCode::usage, "beta_inverse_cdf needs tol > 0");
  if (r == 0.0) return 0.0;
  if (r == 1.0) return 1.0;

  double lo = 0.0, hi = 1.0;
  double x = alpha / (alpha + beta);
  for (int it = 0; it < kBetaInverseMaxIterations; ++it) {
    const double diff = ibeta(alpha, beta, x) - r;
    if (std::abs(diff) <= tol) return x;
    (diff < 0.0 ? lo : hi) = x;
    const double pdf = beta_pdf(alpha, beta, x);
    double next = pdf > 0.0 && std::isfinite(pdf) ? x - diff / pdf : lo;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == x) break;
    x = next;
  }
  fail(ErrorCode::no_convergence, "beta_inverse_cdf(" + std::to_string(alpha) + ", " + std::to_string(beta) +
                                      ", " + std::to_string(r) + ") did not converge");
}

/// Draws one probability vector from `spec`.
///  - dirichlet: stick-breaking; stage i draws Beta(a_i + 1, sum_{k>i}(a_k + 1))
///    by CDF inversion, the last component is one minus the others.
///  - point: returns the vector, consuming nothing.
///  - finite: one draw picks the first atom whose cumulative weight exceeds it.
template <UniformStream Stream>
std::vector<double> sample_parameter_vector(const DistributionSpec& spec, Stream& stream) {
  return std::visit(
      [&](const auto& s) -> std::vector<double> {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, Dirichlet>) {
          const std::size_t t = s.counts.size();
          if (t < 2) fail(ErrorCode::usage, "dirichlet needs at least 2 alternatives");
          std::vector<double> out(t, 0.0);
          double rest_shape = 0.0;
          for (auto c : s.counts) rest_shape += static_cast<double>(c) + 1.0;
          double remaining = 1.0, used = 0.0;
          for (std::size_t i = 0; i + 1 < t; ++i) {
            const double shape = static_cast<double>(s.counts[i]) + 1.0;
            rest_shape -= shape;
            const double y = beta_inverse_cdf(shape, rest_shape, static_cast<double>(stream.next()));
            out[i] = remaining * y;
            remaining -= out[i];
            used += out[i];
          }
          out[t - 1] = std::max(0.0, 1.0 - used);
          return out;
        } else if constexpr (std::is_same_v<S, Point>) {
          return s.probs;
        } else {
          if (s.atoms.empty()) fail(ErrorCode::usage, "finite spec has no atoms");
          const double r = static_cast<double>(stream.next());
          double cumulative = 0.0;
          for (const auto& a : s.atoms) {
            cumulative += a.weight;
            if (r < cumulative) return a.probs;
          }
          return s.atoms.back().probs;
        }
      },
      spec);
}

}  // namespace bnvar
