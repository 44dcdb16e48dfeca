#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "fieldest/field.hpp"
#include "fieldest/quadrature.hpp"

namespace fieldest {

// Tukey box summary. Quartiles use the type-7 (linear interpolation of
// order statistics) convention; whiskers reach the most extreme samples
// within 1.5 IQR of the quartiles; everything beyond is an outlier.
struct BoxStats {
  double median;
  double q25;
  double q75;
  double whisker_low;
  double whisker_high;
  std::vector<double> outliers;
};

struct TrialResult {
  int trial_index;
  FieldParams theta_hat;
  bool converged;
  int iterations;
  double se;   // squared location error; +inf for diverged trials
  double ise;  // normalized integrated square error; +inf for diverged trials
};

// Squared distance between estimated and true peak locations. A non-finite
// estimate reports the +inf divergence sentinel.
inline double location_squared_error(const FieldParams& est, const FieldParams& truth) {
  if (!(std::isfinite(est.mu) && std::isfinite(est.xc) && std::isfinite(est.yc))) {
    return std::numeric_limits<double>::infinity();
  }
  const double dx = est.xc - truth.xc;
  const double dy = est.yc - truth.yc;
  return dx * dx + dy * dy;
}

// Integral of (G_est - G_true)^2 over the region, normalized by the
// integral of G_true^2. Same sentinel convention as above.
inline double integrated_square_error(const FieldParams& est, const FieldParams& truth,
                                      double spread_sq, const Region& region, int nodes = 64) {
  if (!(std::isfinite(est.mu) && std::isfinite(est.xc) && std::isfinite(est.yc))) {
    return std::numeric_limits<double>::infinity();
  }
  const GaussianBellField fe{est, spread_sq};
  const GaussianBellField ft{truth, spread_sq};
  const double num = integrate_over_region(
      [&](double x, double y) {
        const double d = eval(fe, x, y) - eval(ft, x, y);
        return d * d;
      },
      region, nodes);
  const double den = integrate_over_region(
      [&](double x, double y) {
        const double g = eval(ft, x, y);
        return g * g;
      },
      region, nodes);
  return num / den;
}

// Type-7 quantile of an ascending-sorted sample.
inline double quantile_type7(const std::vector<double>& sorted, double p) {
  const std::size_t n = sorted.size();
  if (n == 1) {
    return sorted[0];
  }
  const double h = static_cast<double>(n - 1) * p;
  const std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= n) {
    return sorted[n - 1];
  }
  return sorted[lo] + (h - lo) * (sorted[lo + 1] - sorted[lo]);
}

// Box summary of the finite samples; non-finite entries (divergence
// sentinels) are excluded here and accounted for separately by callers.
inline BoxStats box_stats(std::span<const double> samples) {
  std::vector<double> finite;
  finite.reserve(samples.size());
  for (double v : samples) {
    if (std::isfinite(v)) {
      finite.push_back(v);
    }
  }
  if (finite.empty()) {
    throw std::invalid_argument("box_stats needs at least one finite sample");
  }
  std::sort(finite.begin(), finite.end());
  BoxStats b;
  b.median = quantile_type7(finite, 0.5);
  b.q25 = quantile_type7(finite, 0.25);
  b.q75 = quantile_type7(finite, 0.75);
  const double iqr = b.q75 - b.q25;
  const double lo_fence = b.q25 - 1.5 * iqr;
  const double hi_fence = b.q75 + 1.5 * iqr;
  b.whisker_low = b.q75;
  b.whisker_high = b.q25;
  for (double v : finite) {
    if (v >= lo_fence) {
      b.whisker_low = std::min(v, b.whisker_low);
    }
    if (v <= hi_fence) {
      b.whisker_high = std::max(v, b.whisker_high);
    }
  }
  for (double v : finite) {
    if (v < lo_fence || v > hi_fence) {
      b.outliers.push_back(v);
    }
  }
  return b;
}

// P[SE > tau] in percent for each threshold, non-increasing in tau.
// Divergence sentinels (+inf) exceed every threshold. Thresholds are
// expected ascending.
inline std::vector<std::pair<double, double>> outlier_curve(std::span<const double> se_samples,
                                                            std::span<const double> thresholds) {
  if (se_samples.empty()) {
    throw std::invalid_argument("outlier_curve needs at least one sample");
  }
  std::vector<std::pair<double, double>> curve;
  curve.reserve(thresholds.size());
  for (double tau : thresholds) {
    std::size_t n = 0;
    for (double v : se_samples) {
      if (v > tau) {
        ++n;
      }
    }
    curve.emplace_back(tau,
                       100.0 * static_cast<double>(n) / static_cast<double>(se_samples.size()));
  }
  return curve;
}

}  // namespace fieldest
