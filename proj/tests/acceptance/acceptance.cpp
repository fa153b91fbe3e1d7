// Acceptance checks, one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria (0 when all pass).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "bnvar/bnvar.hpp"
#include "support/networks.hpp"

using namespace bnvar;
namespace bt = bnvar::testing;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Everything later criteria need to re-check against the bounds.
std::vector<NodeMoments> g_moments;
struct McEstimate {
  double expected;
  double var_estimate;  // S / n
  double var_sigma;     // standard error of S / n
};
std::vector<McEstimate> g_mc;

struct Check {
  bool ok = true;
  std::ostringstream detail;
  void require(bool cond, const std::string& what) {
    if (!cond) {
      if (!ok) detail << "; ";
      detail << what;
      ok = false;
    }
  }
};

double max_abs_diff(const NodeMoments& a, const NodeMoments& b) {
  return std::max((a.mean - b.mean).cwiseAbs().maxCoeff(), (a.second - b.second).cwiseAbs().maxCoeff());
}

void record(const NetworkMoments& nm) {
  for (const auto& m : nm.nodes) g_moments.push_back(m);
}

void record_mc(const SampleSummary& s) {
  const double n = static_cast<double>(s.n);
  double sum = 0.0, sum2 = 0.0;
  for (double x : s.sorted_sample) {
    const double d = (x - s.reference_mean) * (x - s.reference_mean);
    sum += d;
    sum2 += d * d;
  }
  const double mean = sum / n;
  const double var = std::max(0.0, sum2 / n - mean * mean);
  g_mc.push_back({s.reference_mean, s.sq_dev_sum / n, std::sqrt(var / n)});
}

// 1: two-node flat Dirichlet example.
Check criterion1() {
  Check c;
  const auto net = bt::two_node();
  const auto t0 = Clock::now();
  const auto nm = propagate_prior_moments(net);
  const double elapsed = seconds_since(t0);
  record(nm);
  const auto& e = nm.at("E");
  const auto& f = nm.at("F");
  c.require(std::abs(e.mean(0) - 0.5) <= 1e-12, "E mean");
  c.require(std::abs(e.second(0, 0) - 1.0 / 3.0) <= 1e-12, "E second");
  c.require(std::abs(e.second(0, 1) - 1.0 / 6.0) <= 1e-12, "E cross");
  c.require(std::abs(variance_of(e, 0) - 1.0 / 12.0) <= 1e-12, "E variance");
  c.require(std::abs(f.mean(0) - 0.5) <= 1e-12, "F mean");
  c.require(std::abs(f.second(0, 0) - 11.0 / 36.0) <= 1e-12, "F second");
  c.require(std::abs(variance_of(f, 0) - 1.0 / 18.0) <= 1e-12, "F variance");
  c.require(std::abs(variance_of(e, 0) - 0.0833) <= 5e-5, "printed .0833");
  c.require(std::abs(f.second(0, 0) - 0.3056) <= 5e-5, "printed .3056");
  c.require(std::abs(variance_of(f, 0) - 0.0556) <= 5e-5, "printed .0556");
  c.require(elapsed < 1e-3, "runtime >= 1 ms");
  c.detail << (c.ok ? "" : " | ") << "V(E)=" << variance_of(e, 0) << " E(pf1^2)=" << f.second(0, 0)
           << " V(F)=" << variance_of(f, 0) << " runtime=" << elapsed * 1e6 << "us";
  return c;
}

// 2: urn example.
Check criterion2() {
  Check c;
  const auto net = bt::urn();
  const auto dist = enumerate_value_distribution(net, {}, "F", 0);
  const double xs[] = {0.25, 0.375, 0.625, 0.75};
  c.require(dist.size() == 4, "support size " + std::to_string(dist.size()));
  for (std::size_t k = 0; k < std::min<std::size_t>(4, dist.size()); ++k) {
    c.require(std::abs(dist[k].first - xs[k]) <= 1e-12, "support value " + std::to_string(k));
    c.require(std::abs(dist[k].second - 0.25) <= 1e-12, "weight " + std::to_string(k));
  }
  const auto nm = propagate_prior_moments(net);
  record(nm);
  const auto& f = nm.at("F");
  c.require(std::abs(f.mean(0) - 0.5) <= 1e-12, "mean");
  c.require(std::abs(variance_of(f, 0) - 0.0390625) <= 1e-12, "variance");
  c.detail << (c.ok ? "" : " | ") << "support {.25,.375,.625,.75} x 1/4, mu=" << f.mean(0)
           << " V=" << variance_of(f, 0);
  return c;
}

// 3: randomized oracle equivalence.
Check criterion3() {
  Check c;
  const auto t0 = Clock::now();
  std::mt19937_64 rng(20240601);
  const bt::RandomNetworkOptions tree_opt{.max_nodes = 6, .max_alternatives = 3, .max_atoms = 3};
  const bt::RandomNetworkOptions loop_opt{.max_nodes = 6, .max_alternatives = 3, .max_atoms = 3, .multiply_connected = true};
  const int per_kind = 110;
  double worst[3] = {0, 0, 0};
  int evidence_cases = 0;
  for (int k = 0; k < per_kind; ++k) {
    const auto net = bt::random_finite_network(rng, tree_opt);
    const auto prior = propagate_prior_moments(net);
    const auto oracle = enumerate_exact_moments(net);
    record(prior);
    for (std::size_t v = 0; v < net.nodes.size(); ++v)
      worst[0] = std::max(worst[0], max_abs_diff(prior.nodes[v], oracle.nodes[v]));

    const auto ev = bt::random_upstream_evidence(rng, net);
    const auto down = downstream_evidence_moments(net, ev);
    const auto oracle_ev = enumerate_exact_moments(net, ev);
    record(down);
    ++evidence_cases;
    for (std::size_t v = 0; v < net.nodes.size(); ++v)
      worst[1] = std::max(worst[1], max_abs_diff(down.nodes[v], oracle_ev.nodes[v]));
  }
  int cutset_cases = 0;
  for (int k = 0; k < per_kind; ++k) {
    const auto net = bt::random_finite_network(rng, loop_opt);
    const auto topo = classify_topology(net);
    if (topo.topology != TopologyClass::multiply_connected || topo.suggested_cutset.empty()) {
      c.require(false, "generator produced a network without a root cutset");
      continue;
    }
    const auto cond = conditioned_prior_moments(net, topo.suggested_cutset);
    const auto oracle = enumerate_exact_moments(net);
    record(cond);
    ++cutset_cases;
    for (std::size_t v = 0; v < net.nodes.size(); ++v)
      worst[2] = std::max(worst[2], max_abs_diff(cond.nodes[v], oracle.nodes[v]));
  }
  const double elapsed = seconds_since(t0);
  c.require(worst[0] <= 1e-12, "prior mismatch");
  c.require(worst[1] <= 1e-12, "evidence mismatch");
  c.require(worst[2] <= 1e-12, "cutset mismatch");
  c.require(elapsed < 30.0, "runtime >= 30 s");
  c.detail << (c.ok ? "" : " | ") << per_kind << " prior, " << evidence_cases << " evidence, " << cutset_cases
           << " cutset networks; max |diff| " << worst[0] << " / " << worst[1] << " / " << worst[2] << "; "
           << elapsed << " s";
  return c;
}

// 4: planner consistency.
Check criterion4() {
  Check c;
  const auto n = plan_n_absolute(0.5, 0.1);
  const double w200 = ci_width_bound_absolute(200, 0.5);
  c.require(n <= 200, "plan_n_absolute(.5,.1) = " + std::to_string(n));
  c.require(w200 < 0.1, "width at 200");
  c.require(std::abs(chi_square_a(200) - 162.270) <= 1e-3, "a(200)");
  c.require(std::abs(chi_square_b(200) - 240.572) <= 1e-3, "b(200)");
  c.detail << (c.ok ? "" : " | ") << "n=" << n << " width(200)=" << w200 << " a(200)=" << chi_square_a(200)
           << " b(200)=" << chi_square_b(200);
  return c;
}

// 5: CI coverage and planned width.
Check criterion5() {
  Check c;
  const auto t0 = Clock::now();
  const auto net = bt::two_node();
  const Query q{"F", 0, {}};
  const double true_std = std::sqrt(1.0 / 18.0);
  int covered = 0;
  for (std::uint64_t run = 0; run < 100; ++run) {
    const auto s = run_trials(net, q, 200, 1000 + run);
    record_mc(s);
    const auto ci = std_confidence_interval(s);
    if (ci.lower <= true_std && true_std <= ci.upper) ++covered;
  }
  double worst_ratio = 0.0;
  int planned_runs = 0;
  for (double eps : {0.1, 0.05, 0.03}) {
    const auto n = plan_n_absolute(0.5, eps);
    for (std::uint64_t run = 0; run < 5; ++run) {
      const auto s = run_trials(net, q, n, 5000 + run);
      record_mc(s);
      const double w = std_confidence_interval(s).width();
      worst_ratio = std::max(worst_ratio, w / eps);
      c.require(w < eps, "planned width");
      ++planned_runs;
    }
  }
  const double elapsed = seconds_since(t0);
  c.require(covered >= 90, "coverage " + std::to_string(covered) + "/100");
  c.require(elapsed < 60.0, "runtime >= 60 s");
  c.detail << (c.ok ? "" : " | ") << covered << "/100 intervals contain sqrt(1/18); " << planned_runs
           << " planned runs, max width/eps " << worst_ratio << "; " << elapsed << " s";
  return c;
}

// 6: tolerance machinery.
Check criterion6() {
  Check c;
  const double g46 = minmax_tolerance_gamma(46, 0.9);
  const auto n = plan_tolerance_n(0.9, 0.95);
  c.require(g46 >= 0.9515 && g46 <= 0.9523, "gamma(46,.9)");
  c.require(n == 46, "plan_tolerance_n = " + std::to_string(n));
  double worst = 0.0;
  for (std::uint64_t m : {101u, 1000u, 10000u})
    for (double p : {0.5, 0.9, 0.99, 0.999})
      worst = std::max(worst, std::abs(order_stat_tolerance_gamma(m, 1, m, p) - minmax_tolerance_gamma(m, p)));
  c.require(worst <= 1e-10, "order statistic vs min-max");

  // P(A = a1) is Beta(3, 1) distributed: CDF x^3.
  Network net{"beta31", {bt::node("A", {"a1", "a2"}, {}, {Dirichlet{{2, 0}}})}};
  int covered = 0;
  const int runs = 200;
  for (int run = 0; run < runs; ++run) {
    const auto s = run_trials(net, {"A", 0, {}}, n, 90000 + static_cast<std::uint64_t>(run));
    const double mass = std::pow(s.max, 3) - std::pow(s.min, 3);
    if (mass >= 0.9) ++covered;
  }
  const double frac = static_cast<double>(covered) / runs;
  c.require(frac >= 0.90, "empirical coverage");
  c.detail << (c.ok ? "" : " | ") << "gamma(46,.9)=" << g46 << " plan=" << n << " max |order-minmax|=" << worst
           << " coverage " << covered << "/" << runs;
  return c;
}

// 7: variance bounds on everything produced above.
Check criterion7() {
  Check c;
  std::size_t checked = 0, violations = 0;
  for (const auto& m : g_moments)
    for (std::size_t i = 0; i < m.size(); ++i) {
      const double e = m.mean(static_cast<Eigen::Index>(i));
      const double v = variance_of(m, i);
      ++checked;
      bool ok = v <= variance_upper_bound(std::clamp(e, 0.0, 1.0)) + 1e-12;
      if (e > 1e-12) ok = ok && std::sqrt(std::max(0.0, v)) / e <= relative_std_bound(std::min(e, 1.0)) + 1e-9;
      if (!ok) ++violations;
    }
  std::size_t mc_checked = 0, mc_violations = 0;
  for (const auto& s : g_mc) {
    ++mc_checked;
    const double bound = variance_upper_bound(s.expected);
    const double slack = 3.0 * s.var_sigma;
    bool ok = s.var_estimate <= bound + slack;
    ok = ok && std::sqrt(s.var_estimate) / s.expected <= std::sqrt((bound + slack)) / s.expected;
    if (!ok) ++mc_violations;
  }
  c.require(violations == 0, std::to_string(violations) + " moment violations");
  c.require(mc_violations == 0, std::to_string(mc_violations) + " MC violations");
  c.require(variance_upper_bound(0.5) == 0.25, "bound at .5");
  c.require(checked > 0 && mc_checked > 0, "nothing to check");
  c.detail << (c.ok ? "" : " | ") << checked << " moment entries, " << mc_checked
           << " MC estimates within bounds; bound(.5)=" << variance_upper_bound(0.5);
  return c;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mx += std::log(x[k]);
    my += std::log(y[k]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0, sxx = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxy += (std::log(x[k]) - mx) * (std::log(y[k]) - my);
    sxx += (std::log(x[k]) - mx) * (std::log(x[k]) - mx);
  }
  return sxy / sxx;
}

// 8: term-product growth.
Check criterion8() {
  Check c;
  for (std::size_t parents = 1; parents <= 3; ++parents) {
    std::vector<double> ts, counts;
    for (std::size_t t = 2; t <= 5; ++t) {
      const std::vector<std::int64_t> flat(t, 0);
      const auto row = dirichlet_moments(flat);
      const NodeMoments parent{"P", row.mean, row.second, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(t)), 0};
      const std::vector<NodeMoments> ps(parents, parent);
      std::size_t configs = 1;
      for (std::size_t k = 0; k < parents; ++k) configs *= t;
      const std::vector<MomentTable> cpt(configs, row);
      const auto child = mix_child_moments(ps, cpt, "C");
      ts.push_back(static_cast<double>(t));
      counts.push_back(static_cast<double>(child.term_products));
    }
    const double slope = loglog_slope(ts, counts);
    const double predicted = 2.0 * static_cast<double>(parents) + 2.0;
    c.require(std::abs(slope - predicted) <= 0.3, "P=" + std::to_string(parents));
    if (parents > 1) c.detail << ", ";
    c.detail << "P=" << parents << " slope " << slope << " (predicted " << predicted << ")";
  }
  return c;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Check()>>> criteria = {
      {"two-node flat Dirichlet example", criterion1},
      {"urn example", criterion2},
      {"oracle equivalence on random networks", criterion3},
      {"trial planner consistency", criterion4},
      {"std CI coverage and planned width", criterion5},
      {"tolerance interval machinery", criterion6},
      {"variance bounds", criterion7},
      {"term-product growth", criterion8},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Check c;
    try {
      c = criteria[k].second();
    } catch (const std::exception& e) {
      c.ok = false;
      c.detail << "exception: " << e.what();
    }
    if (!c.ok) ++failed;
    std::printf("%s criterion %zu: %s: %s\n", c.ok ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(),
                c.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed;
}
