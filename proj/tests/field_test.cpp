#include "fieldest/field.hpp"

#include <cmath>
#include <stdexcept>

#include <gtest/gtest.h>

#include "fieldest/quadrature.hpp"
#include "oracles.hpp"

namespace {

using fieldest::ConfigError;
using fieldest::eval;
using fieldest::FieldParams;
using fieldest::GaussianBellField;
using fieldest::gauss_legendre_rule;
using fieldest::grad_theta;
using fieldest::hess_theta;
using fieldest::integrate_over_region;
using fieldest::Region;

const GaussianBellField kReference{{8.0, 4.0, 4.0}, 4.0};
const Region kRegion{0.0, 8.0, 0.0, 8.0};

TEST(FieldEval, PeakAndFrozenPoint) {
  EXPECT_EQ(eval(kReference, 4.0, 4.0), 8.0);  // exp(0) is exact
  // 8*exp(-13/8), frozen from 40-digit arithmetic.
  EXPECT_NEAR(eval(kReference, 6.0, 7.0), 1.5752934016335524005, 1e-14);
}

TEST(FieldEval, RadialSymmetry) {
  for (double d = 0.25; d < 5.0; d += 0.75) {
    EXPECT_DOUBLE_EQ(eval(kReference, 4.0 + d, 4.0), eval(kReference, 4.0 - d, 4.0));
    EXPECT_DOUBLE_EQ(eval(kReference, 4.0, 4.0 + d), eval(kReference, 4.0, 4.0 - d));
  }
}

TEST(FieldEval, DecaysWithDistance) {
  double prev = eval(kReference, 4.0, 4.0);
  for (double d = 0.5; d < 6.0; d += 0.5) {
    const double v = eval(kReference, 4.0 + d, 4.0);
    EXPECT_LT(v, prev);
    prev = v;
  }
}

TEST(FieldGrad, MatchesFiniteDifferences) {
  oracles::TestRng rng(411);
  for (int i = 0; i < 100; ++i) {
    const GaussianBellField f{{rng.uniform(1.0, 10.0), rng.uniform(0.0, 8.0), rng.uniform(0.0, 8.0)},
                              rng.uniform(1.0, 8.0)};
    const double x = rng.uniform(-1.0, 9.0);
    const double y = rng.uniform(-1.0, 9.0);
    const auto analytic = grad_theta(f, x, y);
    const auto fd = oracles::fd_gradient(
        [&](const FieldParams& p) { return eval({p, f.spread_sq}, x, y); }, f.params);
    for (int t = 0; t < 3; ++t) {
      EXPECT_NEAR(analytic[t], fd[t], 1e-6 * std::max(1.0, std::abs(analytic[t])))
          << "instance " << i << " component " << t;
    }
  }
}

TEST(FieldHess, MatchesFiniteDifferencesOfGradient) {
  oracles::TestRng rng(412);
  for (int i = 0; i < 100; ++i) {
    const GaussianBellField f{{rng.uniform(1.0, 10.0), rng.uniform(0.0, 8.0), rng.uniform(0.0, 8.0)},
                              rng.uniform(1.0, 8.0)};
    const double x = rng.uniform(-1.0, 9.0);
    const double y = rng.uniform(-1.0, 9.0);
    const auto analytic = hess_theta(f, x, y);
    const auto fd = oracles::fd_jacobian(
        [&](const FieldParams& p) { return grad_theta({p, f.spread_sq}, x, y); }, f.params, 1e-6);
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) {
        EXPECT_NEAR(analytic[r][c], fd[r][c], 1e-5 * std::max(1.0, std::abs(analytic[r][c])))
            << "instance " << i << " entry " << r << "," << c;
      }
    }
  }
}

TEST(FieldHess, SymmetricAndCurvedAtPeak) {
  const auto h = hess_theta(kReference, 4.0, 4.0);
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      EXPECT_DOUBLE_EQ(h[r][c], h[c][r]);
    }
  }
  EXPECT_DOUBLE_EQ(h[0][0], 0.0);
  // At the peak, d2G/dxc2 = -mu/spread_sq.
  EXPECT_NEAR(h[1][1], -2.0, 1e-14);
  EXPECT_NEAR(h[2][2], -2.0, 1e-14);
}

TEST(FieldValidate, RejectsBadParameters) {
  EXPECT_THROW(validate(GaussianBellField{{0.0, 4.0, 4.0}, 4.0}), ConfigError);
  EXPECT_THROW(validate(GaussianBellField{{-1.0, 4.0, 4.0}, 4.0}), ConfigError);
  EXPECT_THROW(validate(GaussianBellField{{8.0, 4.0, 4.0}, 0.0}), ConfigError);
  EXPECT_THROW(validate(GaussianBellField{{8.0, NAN, 4.0}, 4.0}), ConfigError);
  EXPECT_THROW(validate(Region{0.0, 0.0, 0.0, 8.0}), ConfigError);
  EXPECT_THROW(validate(Region{8.0, 0.0, 0.0, 8.0}), ConfigError);
  EXPECT_NO_THROW(validate(kReference));
}

TEST(GaussLegendre, FivePointRuleMatchesClassicTable) {
  const auto rule = gauss_legendre_rule(5);
  const double nodes[5] = {-0.906179845938664, -0.5384693101056831, 0.0, 0.5384693101056831,
                           0.906179845938664};
  const double weights[5] = {0.23692688505618908, 0.47862867049936647, 0.5688888888888889,
                             0.47862867049936647, 0.23692688505618908};
  for (int i = 0; i < 5; ++i) {
    EXPECT_NEAR(rule.nodes[i], nodes[i], 1e-15);
    EXPECT_NEAR(rule.weights[i], weights[i], 1e-15);
  }
}

TEST(GaussLegendre, WeightsSumToTwoAndNodesSymmetric) {
  for (int n : {2, 3, 8, 17, 64, 96}) {
    const auto rule = gauss_legendre_rule(n);
    double sum = 0.0;
    for (double w : rule.weights) {
      sum += w;
    }
    EXPECT_NEAR(sum, 2.0, 1e-13) << "n=" << n;
    for (int i = 0; i < n; ++i) {
      EXPECT_NEAR(rule.nodes[i], -rule.nodes[n - 1 - i], 1e-15) << "n=" << n;
    }
  }
}

TEST(Integrate, ExactForPolynomials) {
  // x^2*y over [0,2]x[0,3] = (8/3)*(9/2) = 12.
  const double v = integrate_over_region([](double x, double y) { return x * x * y; },
                                         Region{0.0, 2.0, 0.0, 3.0}, 8);
  EXPECT_NEAR(v, 12.0, 1e-12);
}

TEST(Integrate, FrozenFieldEnergy) {
  // Integral of G^2 over the reference region: 256*pi*erf(2)^2, frozen from
  // 40-digit arithmetic.
  const double v = integrate_over_region(
      [&](double x, double y) {
        const double g = eval(kReference, x, y);
        return g * g;
      },
      kRegion, 64);
  EXPECT_NEAR(v, 796.74120184767288427, 1e-9);
}

TEST(Integrate, DeterministicAndResolutionStable) {
  const auto f = [&](double x, double y) { return eval(kReference, x, y); };
  const double a = integrate_over_region(f, kRegion, 64);
  const double b = integrate_over_region(f, kRegion, 64);
  EXPECT_EQ(a, b);
  const double c = integrate_over_region(f, kRegion, 96);
  EXPECT_NEAR(a, c, 1e-10 * std::abs(a));
}

TEST(Integrate, ReportsNonFiniteSamplePoint) {
  try {
    integrate_over_region(
        [](double x, double y) {
          return (x > 1.0 && y > 1.0) ? std::numeric_limits<double>::quiet_NaN() : 1.0;
        },
        Region{0.0, 2.0, 0.0, 2.0}, 4);
    FAIL() << "expected std::runtime_error";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("non-finite integrand"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("("), std::string::npos);
  }
}

TEST(Integrate, RejectsBadResolution) {
  EXPECT_THROW(integrate_over_region([](double, double) { return 1.0; }, kRegion, 0), ConfigError);
}

}  // namespace
