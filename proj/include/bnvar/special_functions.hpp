#pragma once

#include <cmath>
#include <limits>

#include "bnvar/error.hpp"

namespace bnvar {

namespace detail {

// Continued fraction for the incomplete beta (modified Lentz). Converges
// quickly for x < (a + 1) / (a + b + 2); callers use the symmetry
// I_x(a, b) = 1 - I_{1-x}(b, a) on the other side.
inline double ibeta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIterations = 20000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIterations; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  fail(ErrorCode::no_convergence, "incomplete beta continued fraction did not converge");
}

// x^a (1-x)^b / (a B(a, b)) style prefactor, in log space.
inline double ibeta_log_prefactor(double a, double b, double x) {
  return std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
}

}  // namespace detail

/// Regularized incomplete beta I_x(a, b) for a, b > 0.
inline double ibeta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) fail(ErrorCode::usage, "ibeta needs positive shape parameters");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double front = std::exp(detail::ibeta_log_prefactor(a, b, x));
  if (x < (a + 1.0) / (a + b + 2.0)) return front * detail::ibeta_continued_fraction(a, b, x) / a;
  return 1.0 - front * detail::ibeta_continued_fraction(b, a, 1.0 - x) / b;
}

/// Complement 1 - I_x(a, b), evaluated without cancellation when it is small.
inline double ibetac(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) fail(ErrorCode::usage, "ibetac needs positive shape parameters");
  if (x <= 0.0) return 1.0;
  if (x >= 1.0) return 0.0;
  const double front = std::exp(detail::ibeta_log_prefactor(a, b, x));
  if (x < (a + 1.0) / (a + b + 2.0)) return 1.0 - front * detail::ibeta_continued_fraction(a, b, x) / a;
  return front * detail::ibeta_continued_fraction(b, a, 1.0 - x) / b;
}

/// Beta(a, b) density.
inline double beta_pdf(double a, double b, double x) {
  if (x < 0.0 || x > 1.0) return 0.0;
  if (x == 0.0) return a < 1.0 ? std::numeric_limits<double>::infinity() : (a == 1.0 ? b : 0.0);
  if (x == 1.0) return b < 1.0 ? std::numeric_limits<double>::infinity() : (b == 1.0 ? a : 0.0);
  return std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + (a - 1.0) * std::log(x) +
                  (b - 1.0) * std::log1p(-x));
}

}  // namespace bnvar
