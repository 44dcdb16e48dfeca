#pragma once

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <utility>
#include <vector>

#include "fieldest/error.hpp"
#include "fieldest/field.hpp"

namespace fieldest {

struct GaussLegendreRule {
  std::vector<double> nodes;    // on [-1, 1], ascending
  std::vector<double> weights;  // sums to 2
};

// Nodes/weights of the n-point Gauss-Legendre rule, found by Newton
// iteration on the Legendre recurrence from the Chebyshev initial guess.
// Deterministic for a given n; exact for polynomials of degree 2n-1.
inline GaussLegendreRule gauss_legendre_rule(int n) {
  if (n < 1) {
    throw ConfigError("quadrature rule needs at least one node per axis");
  }
  GaussLegendreRule rule;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 0.0);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int pass = 0; pass < 100; ++pass) {
      // p2 walks the recurrence up to P_n(x), p1 trails P_{n-1}(x).
      double p2 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p0 = p1;
        p1 = p2;
        p2 = ((2.0 * j + 1.0) * x * p1 - j * p0) / (j + 1.0);
      }
      dp = n * (x * p2 - p1) / (x * x - 1.0);
      const double step = p2 / dp;
      x -= step;
      if (std::abs(step) < 1e-15) {
        break;
      }
    }
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

// Tensor-product Gauss-Legendre integral of f(x, y) over an axis-aligned
// region. The reduction order is fixed (row-major over the node grid), so
// the result is bit-identical across runs and thread counts for a given
// resolution. A non-finite sample aborts with the offending grid point.
template <class F>
double integrate_over_region(F&& f, const Region& region, int nodes_per_axis = 64) {
  validate(region);
  const GaussLegendreRule rule = gauss_legendre_rule(nodes_per_axis);
  const double cx = 0.5 * (region.x_min + region.x_max);
  const double hx = 0.5 * region.width();
  const double cy = 0.5 * (region.y_min + region.y_max);
  const double hy = 0.5 * region.height();
  double sum = 0.0;
  for (int i = 0; i < nodes_per_axis; ++i) {
    const double x = cx + hx * rule.nodes[i];
    double row = 0.0;
    for (int j = 0; j < nodes_per_axis; ++j) {
      const double y = cy + hy * rule.nodes[j];
      const double v = f(x, y);
      if (!std::isfinite(v)) {
        char buf[128];
        std::snprintf(buf, sizeof(buf), "non-finite integrand sample at (%.17g, %.17g)", x, y);
        throw std::runtime_error(buf);
      }
      row += rule.weights[j] * v;
    }
    sum += rule.weights[i] * row;
  }
  return sum * hx * hy;
}

}  // namespace fieldest
