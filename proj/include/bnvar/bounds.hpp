#pragma once

#include <cmath>
#include <string>

#include "bnvar/error.hpp"

namespace bnvar {

/// Any random p in [0, 1] has V(p) <= E(p) - E(p)^2, since E(p^2) <= E(p).
inline double variance_upper_bound(double expected) {
  if (!(expected >= 0.0 && expected <= 1.0))
    fail(ErrorCode::usage, "expected value " + std::to_string(expected) + " outside [0, 1]");
  return expected - expected * expected;
}

/// Upper bound on std(p) / E(p), i.e. sqrt(1/E - 1).
inline double relative_std_bound(double expected) {
  if (!(expected > 0.0 && expected <= 1.0))
    fail(ErrorCode::usage, "relative bound needs an expected value in (0, 1]");
  return std::sqrt(1.0 / expected - 1.0);
}

}  // namespace bnvar
