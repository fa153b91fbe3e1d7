#include <gtest/gtest.h>

#include "bnvar/report.hpp"
#include "support/networks.hpp"

using namespace bnvar;
namespace bt = bnvar::testing;

TEST(Report, NodeMomentsRoundTrip) {
  const auto nm = propagate_prior_moments(bt::urn());
  const auto net = bt::urn();
  const auto j = report::to_json(nm, net);
  ASSERT_EQ(j.size(), 2u);
  for (std::size_t v = 0; v < 2; ++v) {
    const auto back = report::node_moments_from_json(report::json::parse(j[v].dump()));
    EXPECT_EQ(back.node, nm.nodes[v].node);
    EXPECT_EQ(back.mean, nm.nodes[v].mean);
    EXPECT_EQ(back.second, nm.nodes[v].second);
    EXPECT_EQ(back.term_products, nm.nodes[v].term_products);
  }
  EXPECT_EQ(j[1]["alternatives"][0], "heads");
  EXPECT_DOUBLE_EQ(j[1]["bound"][0].get<double>(), 0.25);
  EXPECT_DOUBLE_EQ(j[1]["bound_ratio"][0].get<double>(), 0.0390625 / 0.25);
}

TEST(Report, KeyOrder) {
  const auto j = report::to_json(classify_topology(bt::diamond(bt::flat2())));
  EXPECT_EQ(j.begin().key(), "class");
  EXPECT_EQ(j["class"], "multiply_connected");
  EXPECT_EQ(j["suggested_cutset"][0], "C");
}

TEST(Report, MomentTableUsesSixDigits) {
  const auto net = bt::two_node();
  const auto text = report::moment_table(propagate_prior_moments(net), net);
  EXPECT_NE(text.find("0.0555556"), std::string::npos) << text;
  EXPECT_NE(text.find("node F"), std::string::npos);
}
