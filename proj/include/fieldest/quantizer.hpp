#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "fieldest/error.hpp"
#include "fieldest/gaussian.hpp"

namespace fieldest {

// M-level scalar quantizer. boundaries has M+1 entries (the outer two may
// be infinite, making the extreme cells unbounded); cell j is the
// lower-closed interval [boundaries[j], boundaries[j+1]) carrying
// reproduction_points[j].
struct QuantizerSpec {
  std::vector<double> boundaries;
  std::vector<double> reproduction_points;

  int levels() const { return static_cast<int>(reproduction_points.size()); }
};

inline void validate(const QuantizerSpec& q) {
  const std::size_t m = q.reproduction_points.size();
  if (m < 1) {
    throw ConfigError("quantizer needs at least one level");
  }
  if (q.boundaries.size() != m + 1) {
    throw ConfigError("quantizer needs exactly levels+1 boundaries");
  }
  for (std::size_t i = 0; i + 1 < q.boundaries.size(); ++i) {
    if (!(q.boundaries[i] < q.boundaries[i + 1])) {
      throw ConfigError("quantizer boundaries must be strictly increasing");
    }
  }
  for (std::size_t j = 0; j < m; ++j) {
    const double nu = q.reproduction_points[j];
    if (!std::isfinite(nu) || nu < q.boundaries[j] || nu > q.boundaries[j + 1]) {
      throw ConfigError("reproduction point " + std::to_string(j) + " lies outside its cell");
    }
  }
}

// Uniform quantizer: interior boundaries offset + step, offset + 2*step,
// ..., extreme cells unbounded, reproduction points at cell midpoints
// (extended by step/2 into the unbounded cells).
inline QuantizerSpec make_uniform(int levels, double step, double offset = 0.0) {
  if (levels < 2) {
    throw ConfigError("uniform quantizer needs at least 2 levels, got " + std::to_string(levels));
  }
  if (!(std::isfinite(step) && step > 0.0)) {
    throw ConfigError("quantizer step must be finite and > 0");
  }
  if (!std::isfinite(offset)) {
    throw ConfigError("quantizer offset must be finite");
  }
  QuantizerSpec q;
  q.boundaries.resize(levels + 1);
  q.reproduction_points.resize(levels);
  q.boundaries.front() = -std::numeric_limits<double>::infinity();
  q.boundaries.back() = std::numeric_limits<double>::infinity();
  for (int i = 1; i < levels; ++i) {
    q.boundaries[i] = offset + i * step;
  }
  for (int j = 0; j < levels; ++j) {
    const double lo = j == 0 ? q.boundaries[1] - step : q.boundaries[j];
    const double hi = j == levels - 1 ? q.boundaries[levels - 1] + step : q.boundaries[j + 1];
    q.reproduction_points[j] = 0.5 * (lo + hi);
  }
  return q;
}

// Index of the lower-closed cell containing r.
inline std::size_t cell_index(const QuantizerSpec& q, double r) {
  const auto first = q.boundaries.begin() + 1;
  const auto last = q.boundaries.end() - 1;
  return static_cast<std::size_t>(std::upper_bound(first, last, r) - first);
}

inline double quantize(const QuantizerSpec& q, double r) {
  return q.reproduction_points[cell_index(q, r)];
}

// P[quantize(g + sigma*W) = level j] for W ~ N(0,1).
inline double cell_probability(const QuantizerSpec& q, std::size_t j, double g, double sigma) {
  if (!(sigma > 0.0)) {
    throw ConfigError("sensor noise sigma must be > 0");
  }
  return interval_mass((q.boundaries[j] - g) / sigma, (q.boundaries[j + 1] - g) / sigma);
}

inline double log_cell_probability(const QuantizerSpec& q, std::size_t j, double g, double sigma) {
  if (!(sigma > 0.0)) {
    throw ConfigError("sensor noise sigma must be > 0");
  }
  return log_interval_mass((q.boundaries[j] - g) / sigma, (q.boundaries[j + 1] - g) / sigma);
}

inline std::vector<double> cell_probabilities(const QuantizerSpec& q, double g, double sigma) {
  std::vector<double> p(q.reproduction_points.size());
  for (std::size_t j = 0; j < p.size(); ++j) {
    p[j] = cell_probability(q, j, g, sigma);
  }
  return p;
}

// E[quantize(g + sigma*W)^2]; the second moment of the quantizer output,
// used for channel SNR calibration.
inline double expected_square(const QuantizerSpec& q, double g, double sigma) {
  double s = 0.0;
  for (std::size_t j = 0; j < q.reproduction_points.size(); ++j) {
    const double nu = q.reproduction_points[j];
    s += nu * nu * cell_probability(q, j, g, sigma);
  }
  return s;
}

}  // namespace fieldest
