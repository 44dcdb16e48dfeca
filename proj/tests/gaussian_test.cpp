#include "fieldest/gaussian.hpp"

#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "oracles.hpp"

namespace {

using fieldest::interval_mass;
using fieldest::log_interval_mass;
using fieldest::log_q_function;
using fieldest::q_function;
using fieldest::truncated_mean_shift;

constexpr double kInf = std::numeric_limits<double>::infinity();

TEST(QFunction, KnownValues) {
  EXPECT_DOUBLE_EQ(q_function(0.0), 0.5);
  // Reference values computed with 40-digit arithmetic.
  EXPECT_NEAR(q_function(1.0), 0.15865525393145705141, 1e-16);
  EXPECT_NEAR(q_function(2.0), 0.0227501319481792072, 1e-17);
  EXPECT_NEAR(q_function(-1.0), 1.0 - 0.15865525393145705141, 1e-15);
}

TEST(QFunction, ComplementIdentity) {
  for (double x = -6.0; x <= 6.0; x += 0.37) {
    EXPECT_NEAR(q_function(x) + q_function(-x), 1.0, 1e-14) << "x=" << x;
  }
}

TEST(LogQFunction, MatchesLinearEvaluationInBulk) {
  for (double x = -8.0; x <= 30.0; x += 0.173) {
    const double direct = std::log(q_function(x));
    EXPECT_NEAR(log_q_function(x), direct, 1e-12 * std::max(1.0, std::abs(direct))) << "x=" << x;
  }
}

TEST(LogQFunction, FrozenTailValues) {
  // 40-digit reference values; the x >= 35 branch is the asymptotic series.
  EXPECT_NEAR(log_q_function(5.0), -15.064998393988725736, 1e-12 * 15.06);
  EXPECT_NEAR(log_q_function(20.0), -203.91715537109726394, 1e-12 * 203.9);
  EXPECT_NEAR(log_q_function(35.0), -616.97510126192251347, 1e-12 * 617.0);
  EXPECT_NEAR(log_q_function(50.0), -1254.8313611394199013, 1e-12 * 1254.8);
  EXPECT_NEAR(log_q_function(100.0), -5005.5242086942050886, 1e-12 * 5005.5);
  EXPECT_NEAR(log_q_function(1000.0), -500007.82669481218431, 1e-12 * 500007.8);
}

TEST(LogQFunction, ContinuousAtBranchSeam) {
  const double below = log_q_function(std::nextafter(35.0, 0.0));
  const double above = log_q_function(std::nextafter(35.0, 100.0));
  EXPECT_NEAR(below, above, 1e-9);
}

TEST(IntervalMass, MatchesSimpsonAcrossBranches) {
  const double cases[][2] = {{-0.5, 0.3}, {2.5, 3.5}, {-4.2, -3.1}, {1.9, 2.1},
                             {-2.05, -1.95}, {0.0, 6.0}, {-7.0, 7.0}};
  for (const auto& c : cases) {
    const double oracle = oracles::adaptive_simpson(oracles::std_normal_pdf, c[0], c[1], 1e-15);
    EXPECT_NEAR(interval_mass(c[0], c[1]), oracle, 1e-13) << c[0] << "," << c[1];
  }
  // Frozen high-precision spot checks.
  EXPECT_NEAR(interval_mass(-0.5, 0.3), 0.30937388346296573671, 1e-15);
  EXPECT_NEAR(interval_mass(2.5, 3.5), 0.0059770362467406101306, 1e-17);
}

TEST(IntervalMass, InfiniteEndpoints) {
  EXPECT_DOUBLE_EQ(interval_mass(-kInf, kInf), 1.0);
  EXPECT_NEAR(interval_mass(-kInf, 0.0), 0.5, 1e-15);
  EXPECT_NEAR(interval_mass(2.0, kInf), q_function(2.0), 1e-17);
  EXPECT_DOUBLE_EQ(interval_mass(1.3, 1.3), 0.0);
}

TEST(LogIntervalMass, MatchesLinearWhenRepresentable) {
  const double cases[][2] = {{-1.0, 2.0}, {3.0, 4.0}, {-9.5, -8.5}, {10.0, 12.0}, {-kInf, 1.0}};
  for (const auto& c : cases) {
    const double m = interval_mass(c[0], c[1]);
    ASSERT_GT(m, 0.0);
    EXPECT_NEAR(log_interval_mass(c[0], c[1]), std::log(m),
                1e-12 * std::max(1.0, std::abs(std::log(m))))
        << c[0] << "," << c[1];
  }
}

TEST(LogIntervalMass, FarTailFrozenValue) {
  // P[40 <= X < 41] underflows the linear scale entirely.
  EXPECT_EQ(interval_mass(40.0, 41.0), 0.0);
  EXPECT_NEAR(log_interval_mass(40.0, 41.0), -804.60844201375378817, 1e-9 * 804.6);
  // Mirrored left tail.
  EXPECT_NEAR(log_interval_mass(-41.0, -40.0), -804.60844201375378817, 1e-9 * 804.6);
  // Unbounded far tail equals the tail function itself.
  EXPECT_NEAR(log_interval_mass(50.0, kInf), log_q_function(50.0), 1e-12 * 1254.8);
}

TEST(TruncatedMeanShift, MatchesSimpsonRatio) {
  const double cases[][2] = {{-1.0, 0.5}, {1.0, 2.0}, {-3.0, -2.0}, {0.0, 8.0}};
  for (const auto& c : cases) {
    const double num = oracles::adaptive_simpson(
        [](double t) { return t * oracles::std_normal_pdf(t); }, c[0], c[1], 1e-15);
    const double den = oracles::adaptive_simpson(oracles::std_normal_pdf, c[0], c[1], 1e-15);
    const double lm = log_interval_mass(c[0], c[1]);
    EXPECT_NEAR(truncated_mean_shift(c[0], c[1], lm), num / den, 1e-11) << c[0] << "," << c[1];
  }
}

TEST(TruncatedMeanShift, FarTailAndInfiniteEndpoints) {
  // Mean of N(0,1) truncated to [38,39]; frozen 40-digit value.
  const double lm = log_interval_mass(38.0, 39.0);
  EXPECT_NEAR(truncated_mean_shift(38.0, 39.0, lm), 38.026279466575868969, 1e-9 * 38.0);
  // Full support: no shift.
  EXPECT_EQ(truncated_mean_shift(-kInf, kInf, 0.0), 0.0);
  // Upper tail [2, inf): shift = pdf(2)/Q(2).
  const double lm2 = log_interval_mass(2.0, kInf);
  EXPECT_NEAR(truncated_mean_shift(2.0, kInf, lm2),
              oracles::std_normal_pdf(2.0) / q_function(2.0), 1e-12);
}

TEST(TruncatedMeanShift, StaysInsideInterval) {
  oracles::TestRng rng(71);
  for (int i = 0; i < 200; ++i) {
    const double a = rng.uniform(-30.0, 29.0);
    const double b = a + rng.uniform(0.01, 3.0);
    const double shift = truncated_mean_shift(a, b, log_interval_mass(a, b));
    EXPECT_GE(shift, a) << a << "," << b;
    EXPECT_LE(shift, b) << a << "," << b;
  }
}

}  // namespace
