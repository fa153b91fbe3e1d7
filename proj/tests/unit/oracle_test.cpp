#include <gtest/gtest.h>

#include "bnvar/oracle.hpp"
#include "support/networks.hpp"

using namespace bnvar;
namespace bt = bnvar::testing;

TEST(Oracle, UrnValueDistribution) {
  const auto d = enumerate_value_distribution(bt::urn(), {}, "F", 0);
  ASSERT_EQ(d.size(), 4u);
  const double xs[] = {0.25, 0.375, 0.625, 0.75};
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_NEAR(d[k].first, xs[k], 1e-15);
    EXPECT_NEAR(d[k].second, 0.25, 1e-15);
  }
  EXPECT_EQ(atom_combination_count(bt::urn()), 8u);
}

TEST(Oracle, UrnMoments) {
  const auto m = enumerate_exact_moments(bt::urn(), {}, "F");
  EXPECT_NEAR(m.mean(0), 0.5, 1e-15);
  EXPECT_NEAR(m.second(0, 0), 37.0 / 128.0, 1e-15);
  const auto all = enumerate_exact_moments(bt::urn());
  EXPECT_NEAR(all.at("F").variance(0), 5.0 / 128.0, 1e-15);
  EXPECT_NEAR(all.at("E").variance(0), 1.0 / 16.0, 1e-15);
}

TEST(Oracle, EvidenceConditionsEachCombination) {
  // Given F = heads, P(E = heads | F) averaged over the 8 combinations.
  const auto m = enumerate_exact_moments(bt::urn(), {{"F", 0}}, "E");
  double want = 0.0;
  for (double u : {0.25, 0.75})
    for (double v : {0.25, 0.75})
      for (double w : {0.25, 0.75}) want += (u * v / (u * v + (1 - u) * w)) / 8.0;
  EXPECT_NEAR(m.mean(0), want, 1e-15);
}

TEST(Oracle, PointNetworkHasOneCombination) {
  const auto net = bt::diamond(Point{{0.4, 0.6}});
  EXPECT_EQ(atom_combination_count(net), 1u);
  EXPECT_NEAR(enumerate_exact_moments(net).at("F").variance(0), 0.0, 1e-16);
}

TEST(Oracle, DirichletRowsAreNotEnumerable) {
  try {
    enumerate_exact_moments(bt::two_node());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::not_enumerable);
  }
}

TEST(Oracle, TooManyCombinations) {
  Network net{"wide", {}};
  const Finite ten{std::vector<Atom>(10, Atom{{0.5, 0.5}, 0.1})};
  for (int k = 0; k < 7; ++k) net.nodes.push_back(bt::node("N" + std::to_string(k), {"a", "b"}, {}, {ten}));
  EXPECT_THROW(atom_combination_count(net), Error);
}
