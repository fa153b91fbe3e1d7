#include <gtest/gtest.h>

#include <cmath>

#include "bnvar/bounds.hpp"

using namespace bnvar;

TEST(Bounds, VarianceUpperBound) {
  EXPECT_DOUBLE_EQ(variance_upper_bound(0.5), 0.25);
  EXPECT_DOUBLE_EQ(variance_upper_bound(0.1), 0.09);
  EXPECT_DOUBLE_EQ(variance_upper_bound(0.0), 0.0);
  EXPECT_DOUBLE_EQ(variance_upper_bound(1.0), 0.0);
  EXPECT_THROW(variance_upper_bound(1.5), Error);
  EXPECT_THROW(variance_upper_bound(-0.1), Error);
}

TEST(Bounds, RelativeStdBound) {
  EXPECT_DOUBLE_EQ(relative_std_bound(0.5), 1.0);
  EXPECT_NEAR(relative_std_bound(0.1), 3.0, 1e-15);
  EXPECT_DOUBLE_EQ(relative_std_bound(1.0), 0.0);
  EXPECT_THROW(relative_std_bound(0.0), Error);
}

TEST(Bounds, TwoNodeVarianceIsBelowBound) {
  EXPECT_LT(1.0 / 18.0, variance_upper_bound(0.5));
  EXPECT_LE(std::sqrt(1.0 / 18.0) / 0.5, relative_std_bound(0.5));
}
