#pragma once

// Monte Carlo distribution of an inferred probability. Each trial draws
// every stored row independently (the posterior over the row distributions
// is taken to be the prior), runs exact inference on the resulting point
// network, and records P(query | evidence).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "bnvar/error.hpp"
#include "bnvar/network.hpp"
#include "bnvar/point_inference.hpp"
#include "bnvar/sampling.hpp"
#include "bnvar/special_functions.hpp"

namespace bnvar {

struct Query {
  std::string node;
  std::size_t alternative = 0;
  Evidence evidence;
};

struct SampleSummary {
  Query query;
  std::size_t n = 0;
  /// P(query | evidence) in the network of expected row values.
  double reference_mean = 0.0;
  /// Sum of (x_i - reference_mean)^2.
  double sq_dev_sum = 0.0;
  double sample_mean = 0.0;
  std::vector<double> sorted_sample;
  double min = 0.0;
  double max = 0.0;

  /// sqrt(S / n): standard deviation about the reference mean.
  double std_estimate() const { return n ? std::sqrt(sq_dev_sum / static_cast<double>(n)) : 0.0; }
};

/// 95% confidence interval for the standard deviation.
struct StdCI {
  double level = 0.95;
  double a_n = 0.0;
  double b_n = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double width() const { return upper - lower; }
};

struct ToleranceInterval {
  double lower = 0.0;
  double upper = 0.0;
  double p = 0.0;      // fraction of the distribution covered
  double gamma = 0.0;  // confidence that it is covered
};

inline constexpr double kZLower = -1.96;  // z_.975
inline constexpr double kZUpper = 1.96;   // z_.025
inline constexpr std::uint64_t kPlannerCap = 1'000'000'000;
inline constexpr std::size_t kMinCiTrials = 101;

/// Large-n approximations of the chi-square quantiles with 2n - 1 degrees.
inline double chi_square_a(std::uint64_t n) {
  const double r = std::sqrt(2.0 * static_cast<double>(n) - 1.0);
  return 0.5 * (kZLower + r) * (kZLower + r);
}
inline double chi_square_b(std::uint64_t n) {
  const double r = std::sqrt(2.0 * static_cast<double>(n) - 1.0);
  return 0.5 * (kZUpper + r) * (kZUpper + r);
}

/// (b^{1/2} - a^{1/2}) / (a^{1/2} b^{1/2}) = 1/sqrt(a) - 1/sqrt(b).
inline double ci_width_factor(std::uint64_t n) {
  return 1.0 / std::sqrt(chi_square_a(n)) - 1.0 / std::sqrt(chi_square_b(n));
}

/// Worst-case CI width when every x_i lies in [0, 1].
inline double ci_width_bound_absolute(std::uint64_t n, double expected) {
  return std::sqrt(static_cast<double>(n)) * std::max(expected, 1.0 - expected) * ci_width_factor(n);
}

/// Worst-case ratio of CI width to the expected value.
inline double ci_width_bound_relative(std::uint64_t n, double expected) {
  return std::sqrt(static_cast<double>(n)) * std::max(1.0, (1.0 - expected) / expected) * ci_width_factor(n);
}

namespace detail {

inline void check_query(const Network& net, const Query& q) {
  const auto v = net.find(q.node);
  if (!v) fail(ErrorCode::usage, "query names unknown node '" + q.node + "'");
  if (q.alternative >= net.nodes[*v].arity()) fail(ErrorCode::usage, "query alternative out of range");
}

// Smallest n in [lo, cap] with ok(n), for a predicate that is monotone
// (false then true); doubling then bisection.
template <class Pred>
std::uint64_t smallest_satisfying(std::uint64_t lo, Pred ok, const char* what) {
  if (ok(lo)) return lo;
  std::uint64_t bad = lo, hi = lo;
  while (true) {
    if (hi >= kPlannerCap) fail(ErrorCode::cap_exceeded, std::string(what) + ": no n <= 10^9 satisfies the target");
    bad = hi;
    hi = std::min<std::uint64_t>(hi * 2, kPlannerCap);
    if (ok(hi)) break;
  }
  while (hi - bad > 1) {
    const auto mid = bad + (hi - bad) / 2;
    (ok(mid) ? hi : bad) = mid;
  }
  return hi;
}

}  // namespace detail

/// Runs `n` independent trials. Trial i seeds the stream of global cpd row
/// r (declaration order) with derive_seed(master_seed, i, r), so results do
/// not depend on `threads` (0 picks the hardware concurrency).
inline SampleSummary run_trials(const Network& net, const Query& query, std::size_t n, std::uint64_t master_seed,
                                unsigned threads = 0) {
  if (n == 0) fail(ErrorCode::usage, "trial count must be at least 1");
  detail::check_query(net, query);
  const auto target = net.index_of(query.node);

  SampleSummary s;
  s.query = query;
  s.n = n;
  s.reference_mean = exact_marginal(instantiate_expected(net), query.evidence, target)[query.alternative];

  const auto skeleton = PointNetwork::skeleton(net);
  std::vector<double> xs(n, 0.0);

  auto run_range = [&](std::size_t begin, std::size_t end, std::optional<std::size_t>& failed_at,
                       std::exception_ptr& error) {
    PointNetwork p = skeleton;
    for (std::size_t i = begin; i < end; ++i) {
      try {
        std::uint64_t global_row = 0;
        for (std::size_t v = 0; v < net.nodes.size(); ++v)
          for (std::size_t r = 0; r < net.nodes[v].cpd.size(); ++r, ++global_row) {
            RandomStream stream(derive_seed(master_seed, i, global_row));
            p.set_row(v, r, sample_parameter_vector(net.nodes[v].cpd[r], stream));
          }
        xs[i] = exact_marginal(p, query.evidence, target)[query.alternative];
      } catch (const Error& e) {
        failed_at = i;
        error = e.code() == ErrorCode::zero_evidence
                    ? std::make_exception_ptr(Error(e.code(), "trial " + std::to_string(i) + ": " + e.what()))
                    : std::current_exception();
        return;
      } catch (...) {
        failed_at = i;
        error = std::current_exception();
        return;
      }
    }
  };

  unsigned workers = threads ? threads : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  std::vector<std::optional<std::size_t>> failed(workers);
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (n + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
      const std::size_t begin = std::min(n, w * chunk), end = std::min(n, begin + chunk);
      if (w + 1 == workers) run_range(begin, end, failed[w], errors[w]);
      else pool.emplace_back([&, w, begin, end] { run_range(begin, end, failed[w], errors[w]); });
    }
  }
  for (unsigned w = 0; w < workers; ++w)
    if (errors[w]) std::rethrow_exception(errors[w]);

  double sum = 0.0;
  for (double x : xs) {
    s.sq_dev_sum += (x - s.reference_mean) * (x - s.reference_mean);
    sum += x;
  }
  s.sample_mean = sum / static_cast<double>(n);
  std::sort(xs.begin(), xs.end());
  s.min = xs.front();
  s.max = xs.back();
  s.sorted_sample = std::move(xs);
  return s;
}

/// [sqrt(S / b(n)), sqrt(S / a(n))]; needs n > 100.
inline StdCI std_confidence_interval(const SampleSummary& s) {
  if (s.n < kMinCiTrials) fail(ErrorCode::usage, "confidence interval needs more than 100 trials");
  StdCI ci;
  ci.a_n = chi_square_a(s.n);
  ci.b_n = chi_square_b(s.n);
  ci.lower = std::sqrt(s.sq_dev_sum / ci.b_n);
  ci.upper = std::sqrt(s.sq_dev_sum / ci.a_n);
  return ci;
}

/// Smallest n > 100 whose worst-case CI width is below epsilon.
inline std::uint64_t plan_n_absolute(double expected, double epsilon) {
  if (!(expected > 0.0 && expected < 1.0)) fail(ErrorCode::usage, "expected value must lie in (0, 1)");
  if (!(epsilon > 0.0)) fail(ErrorCode::usage, "epsilon must be positive");
  return detail::smallest_satisfying(
      kMinCiTrials, [&](std::uint64_t n) { return ci_width_bound_absolute(n, expected) < epsilon; }, "plan_n_absolute");
}

/// Smallest n > 100 whose worst-case CI width relative to E is below epsilon.
inline std::uint64_t plan_n_relative(double expected, double epsilon) {
  if (!(expected > 0.0 && expected < 1.0)) fail(ErrorCode::usage, "expected value must lie in (0, 1)");
  if (!(epsilon > 0.0)) fail(ErrorCode::usage, "epsilon must be positive");
  return detail::smallest_satisfying(
      kMinCiTrials, [&](std::uint64_t n) { return ci_width_bound_relative(n, expected) < epsilon; }, "plan_n_relative");
}

/// Confidence that [min, max] of n draws covers a fraction p of the
/// distribution: 1 + (n-1) p^n - n p^(n-1).
inline double minmax_tolerance_gamma(std::uint64_t n, double p) {
  if (n < 2) fail(ErrorCode::usage, "tolerance interval needs at least 2 samples");
  if (!(p > 0.0 && p < 1.0)) fail(ErrorCode::usage, "p must lie in (0, 1)");
  const double nd = static_cast<double>(n);
  return 1.0 + (nd - 1.0) * std::pow(p, nd) - nd * std::pow(p, nd - 1.0);
}

/// Smallest n with minmax_tolerance_gamma(n, p) >= gamma_target.
inline std::uint64_t plan_tolerance_n(double p, double gamma_target) {
  if (!(p > 0.0 && p < 1.0)) fail(ErrorCode::usage, "p must lie in (0, 1)");
  if (!(gamma_target > 0.0 && gamma_target < 1.0)) fail(ErrorCode::usage, "gamma must lie in (0, 1)");
  return detail::smallest_satisfying(
      2, [&](std::uint64_t n) { return minmax_tolerance_gamma(n, p) >= gamma_target; }, "plan_tolerance_n");
}

/// Confidence that [x_(i), x_(j)] (1-based order statistics of n draws)
/// covers a fraction p: 1 - I_p(j - i, n - j + i + 1).
inline double order_stat_tolerance_gamma(std::uint64_t n, std::uint64_t i, std::uint64_t j, double p) {
  if (!(i >= 1 && i < j && j <= n)) fail(ErrorCode::usage, "order statistics need 1 <= i < j <= n");
  if (!(p >= 0.0 && p <= 1.0)) fail(ErrorCode::usage, "p must lie in [0, 1]");
  return ibetac(static_cast<double>(j - i), static_cast<double>(n - j + i + 1), p);
}

inline double order_stat_tolerance_gamma(const SampleSummary& s, std::uint64_t i, std::uint64_t j, double p) {
  return order_stat_tolerance_gamma(s.n, i, j, p);
}

inline ToleranceInterval order_stat_tolerance_interval(const SampleSummary& s, std::size_t i, std::size_t j, double p) {
  const double g = order_stat_tolerance_gamma(s.n, i, j, p);
  return {s.sorted_sample[i - 1], s.sorted_sample[j - 1], p, g};
}

inline ToleranceInterval minmax_tolerance_interval(const SampleSummary& s, double p) {
  return {s.min, s.max, p, minmax_tolerance_gamma(s.n, p)};
}

}  // namespace bnvar
