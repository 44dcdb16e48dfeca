#pragma once

// Standard-normal tail and interval machinery. Everything downstream
// (quantizer cell masses, EM posterior terms, likelihoods) reduces to the
// functions in this header, so they are written to keep full relative
// accuracy in both tails and to stay meaningful far below the smallest
// positive double via the log-space variants.

#include <cfloat>
#include <cmath>
#include <limits>

namespace fieldest {

inline constexpr double kLogSqrt2Pi = 0.9189385332046727417803297;  // log(sqrt(2*pi))
inline constexpr double kSqrt2 = 1.4142135623730950488016887;

// Density of N(0,1) at x.
inline double normal_pdf(double x) {
  return std::exp(-0.5 * x * x - kLogSqrt2Pi);
}

inline double log_normal_pdf(double x) {
  return -0.5 * x * x - kLogSqrt2Pi;
}

// Upper tail P[X > x] for X ~ N(0,1).
inline double q_function(double x) {
  return 0.5 * std::erfc(x / kSqrt2);
}

// log P[X > x], finite and accurate for every finite x.
// Three regimes: the left half uses log1p against the mirrored tail, the
// bulk takes the log of erfc directly (erfc keeps full relative accuracy
// down to ~1e-268 at x = 35), and beyond that an asymptotic expansion of
// the Mills ratio takes over, truncated where the next term falls below
// double rounding.
inline double log_q_function(double x) {
  if (x < 0.0) {
    return std::log1p(-0.5 * std::erfc(-x / kSqrt2));
  }
  if (x < 35.0) {
    return std::log(0.5 * std::erfc(x / kSqrt2));
  }
  const double q = 1.0 / (x * x);
  const double series = q * (-1.0 + q * (3.0 + q * (-15.0 + q * 105.0)));
  return -0.5 * x * x - std::log(x) - kLogSqrt2Pi + std::log1p(series);
}

// P[a <= X < b] for X ~ N(0,1); a <= b, either endpoint may be infinite.
// The branch keeps the computation in whichever of erf/erfc is free of
// cancellation against the constant 1.
inline double interval_mass(double a, double b) {
  if (a >= 2.0) {
    return 0.5 * (std::erfc(a / kSqrt2) - std::erfc(b / kSqrt2));
  }
  if (b <= -2.0) {
    return 0.5 * (std::erfc(-b / kSqrt2) - std::erfc(-a / kSqrt2));
  }
  return 0.5 * (std::erf(b / kSqrt2) - std::erf(a / kSqrt2));
}

// log P[a <= X < b]. Falls back to tail-difference form once the linear
// mass underflows (or goes subnormal, where its relative accuracy is
// already compromised). Returns -inf for a == b.
inline double log_interval_mass(double a, double b) {
  const double m = interval_mass(a, b);
  if (m >= DBL_MIN) {
    return std::log(m);
  }
  if (a >= 0.0) {  // right tail: Q(a) - Q(b)
    const double la = log_q_function(a);
    const double lb = b == std::numeric_limits<double>::infinity()
                          ? -std::numeric_limits<double>::infinity()
                          : log_q_function(b);
    const double d = lb - la;
    return d < 0.0 ? la + std::log1p(-std::exp(d)) : -std::numeric_limits<double>::infinity();
  }
  if (b <= 0.0) {  // left tail, mirrored
    const double lb = log_q_function(-b);
    const double la = a == -std::numeric_limits<double>::infinity()
                          ? -std::numeric_limits<double>::infinity()
                          : log_q_function(-a);
    const double d = la - lb;
    return d < 0.0 ? lb + std::log1p(-std::exp(d)) : -std::numeric_limits<double>::infinity();
  }
  // a < 0 < b with underflowed mass: only possible for a vanishingly thin
  // interval around the origin.
  return std::log(b - a) - kLogSqrt2Pi;
}

// Mean shift of N(0,1) truncated to [a, b]: (pdf(a) - pdf(b)) / mass,
// evaluated through the log mass so it stays finite when the mass itself
// underflows. Infinite endpoints contribute zero density.
inline double truncated_mean_shift(double a, double b, double log_mass) {
  const double ta = std::isinf(a) ? 0.0 : std::exp(log_normal_pdf(a) - log_mass);
  const double tb = std::isinf(b) ? 0.0 : std::exp(log_normal_pdf(b) - log_mass);
  return ta - tb;
}

}  // namespace fieldest
