#include <gtest/gtest.h>

#include <cmath>

#include "bnvar/mc_variance.hpp"
#include "support/networks.hpp"

using namespace bnvar;
namespace bt = bnvar::testing;

TEST(ChiSquare, Constants) {
  EXPECT_NEAR(chi_square_a(200), 162.26983066334114, 1e-9);
  EXPECT_NEAR(chi_square_b(200), 240.57176933665883, 1e-9);
}

TEST(StdConfidenceInterval, Example) {
  SampleSummary s;
  s.n = 200;
  s.sq_dev_sum = 2.0;
  const auto ci = std_confidence_interval(s);
  EXPECT_NEAR(ci.lower, 0.0911785, 1e-7);
  EXPECT_NEAR(ci.upper, 0.1110187, 1e-7);
  EXPECT_LT(ci.lower, s.std_estimate());
  EXPECT_GT(ci.upper, s.std_estimate());
  s.n = 100;
  EXPECT_THROW(std_confidence_interval(s), Error);
}

TEST(PlanN, Absolute) {
  EXPECT_EQ(plan_n_absolute(0.5, 0.1), 197u);
  EXPECT_NEAR(ci_width_bound_absolute(196, 0.5), 0.100233, 1e-6);
  EXPECT_NEAR(ci_width_bound_absolute(197, 0.5), 0.099972, 1e-6);
  EXPECT_NEAR(ci_width_bound_absolute(200, 0.5), 0.0992007, 1e-7);
  EXPECT_EQ(plan_n_absolute(0.5, 10.0), 101u);
  EXPECT_EQ(plan_n_absolute(0.9, 0.1), 628u);
  EXPECT_EQ(plan_n_absolute(0.1, 0.1), 628u);
  EXPECT_EQ(plan_n_absolute(0.5, 0.05), 774u);
}

TEST(PlanN, Relative) {
  EXPECT_EQ(plan_n_relative(0.5, 0.1), 774u);
  EXPECT_NEAR(ci_width_bound_relative(200, 0.5), 0.198401, 1e-6);
  EXPECT_EQ(plan_n_relative(0.2, 0.1), 12298u);
}

TEST(PlanN, CapExceeded) {
  try {
    plan_n_relative(0.0001, 0.01);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::cap_exceeded);
  }
}

TEST(PlanN, Monotone) {
  std::uint64_t prev = 0;
  for (double eps : {0.5, 0.2, 0.1, 0.05, 0.02}) {
    const auto n = plan_n_absolute(0.3, eps);
    EXPECT_GE(n, prev);
    EXPECT_LT(ci_width_bound_absolute(n, 0.3), eps);
    if (n > kMinCiTrials) EXPECT_GE(ci_width_bound_absolute(n - 1, 0.3), eps);
    prev = n;
  }
}

TEST(Tolerance, MinMaxGamma) {
  EXPECT_NEAR(minmax_tolerance_gamma(46, 0.9), 0.9519962, 1e-7);
  EXPECT_NEAR(minmax_tolerance_gamma(45, 0.9), 0.9476322, 1e-7);
  EXPECT_NEAR(minmax_tolerance_gamma(2, 0.5), 0.25, 1e-15);
  EXPECT_NEAR(minmax_tolerance_gamma(100, 0.9), 0.99967831, 1e-8);
}

TEST(Tolerance, PlanN) {
  EXPECT_EQ(plan_tolerance_n(0.9, 0.95), 46u);
  EXPECT_EQ(plan_tolerance_n(0.9, 0.9996), 98u);
  EXPECT_EQ(plan_tolerance_n(0.95, 0.99), 130u);
  EXPECT_EQ(plan_tolerance_n(0.5, 0.25), 2u);
}

TEST(Tolerance, OrderStatisticGamma) {
  EXPECT_NEAR(order_stat_tolerance_gamma(5, 1, 5, 0.5), 13.0 / 16.0, 1e-14);
  EXPECT_NEAR(order_stat_tolerance_gamma(20, 3, 17, 0.7), 0.391990187799076, 1e-12);
  EXPECT_NEAR(order_stat_tolerance_gamma(50, 5, 45, 0.8), 0.4164405815339339, 1e-12);
  // The extreme order statistics reduce to the min-max formula.
  EXPECT_NEAR(order_stat_tolerance_gamma(46, 1, 46, 0.9), minmax_tolerance_gamma(46, 0.9), 1e-12);
}

TEST(RunTrials, DeterministicAcrossThreadCounts) {
  const auto net = bt::two_node();
  const Query q{"F", 0, {}};
  const auto a = run_trials(net, q, 500, 1234, 1);
  const auto b = run_trials(net, q, 500, 1234, 4);
  const auto c = run_trials(net, q, 500, 1234, 3);
  EXPECT_EQ(a.sorted_sample, b.sorted_sample);
  EXPECT_EQ(a.sq_dev_sum, b.sq_dev_sum);
  EXPECT_EQ(a.sq_dev_sum, c.sq_dev_sum);
  EXPECT_NE(run_trials(net, q, 500, 1235, 1).sq_dev_sum, a.sq_dev_sum);
  EXPECT_DOUBLE_EQ(a.reference_mean, 0.5);
  EXPECT_TRUE(std::is_sorted(a.sorted_sample.begin(), a.sorted_sample.end()));
  EXPECT_EQ(a.min, a.sorted_sample.front());
}

TEST(RunTrials, VarianceEstimateTwoNode) {
  const auto s = run_trials(bt::two_node(), {"F", 0, {}}, 10000, 7);
  EXPECT_NEAR(s.sq_dev_sum / static_cast<double>(s.n), 1.0 / 18.0, 0.005);
  const auto ci = std_confidence_interval(s);
  EXPECT_LT(ci.lower, std::sqrt(1.0 / 18.0));
  EXPECT_GT(ci.upper, std::sqrt(1.0 / 18.0));
}

TEST(RunTrials, UrnSampleMatchesSupport) {
  const auto s = run_trials(bt::urn(), {"F", 0, {}}, 2000, 3);
  for (double x : s.sorted_sample) {
    const bool in_support = std::abs(x - 0.25) < 1e-15 || std::abs(x - 0.375) < 1e-15 ||
                            std::abs(x - 0.625) < 1e-15 || std::abs(x - 0.75) < 1e-15;
    EXPECT_TRUE(in_support) << x;
  }
  EXPECT_NEAR(s.sq_dev_sum / 2000.0, 0.0390625, 0.004);
}

TEST(RunTrials, ZeroProbabilityEvidenceNamesTrial) {
  Network net{"zero", {}};
  net.nodes.push_back(bt::node("A", {"a1", "a2"}, {}, {Finite{{{{1.0, 0.0}, 0.5}, {{0.0, 1.0}, 0.5}}}}));
  net.nodes.push_back(bt::node("B", {"b1", "b2"}, {"A"}, {Point{{1.0, 0.0}}, Point{{0.5, 0.5}}}));
  try {
    run_trials(net, {"A", 0, {{"B", 1}}}, 200, 11, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::zero_evidence);
    EXPECT_EQ(std::string(e.what()).rfind("trial ", 0), 0u) << e.what();
  }
}

TEST(RunTrials, RejectsBadArguments) {
  const auto net = bt::two_node();
  EXPECT_THROW(run_trials(net, {"F", 0, {}}, 0, 1), Error);
  EXPECT_THROW(run_trials(net, {"F", 2, {}}, 10, 1), Error);
  EXPECT_THROW(run_trials(net, {"Q", 0, {}}, 10, 1), Error);
}

TEST(ToleranceIntervals, FromSample) {
  const auto s = run_trials(bt::two_node(), {"F", 0, {}}, 46, 5);
  const auto mm = minmax_tolerance_interval(s, 0.9);
  EXPECT_EQ(mm.lower, s.min);
  EXPECT_EQ(mm.upper, s.max);
  EXPECT_NEAR(mm.gamma, 0.9519962, 1e-7);
  const auto os = order_stat_tolerance_interval(s, 2, 45, 0.9);
  EXPECT_EQ(os.lower, s.sorted_sample[1]);
  EXPECT_EQ(os.upper, s.sorted_sample[44]);
  EXPECT_NEAR(os.gamma, order_stat_tolerance_gamma(s, 2, 45, 0.9), 1e-15);
  EXPECT_THROW(order_stat_tolerance_interval(s, 5, 3, 0.9), Error);
  EXPECT_THROW(order_stat_tolerance_interval(s, 1, 47, 0.9), Error);
}
