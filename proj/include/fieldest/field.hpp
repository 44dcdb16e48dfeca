#pragma once

#include <array>
#include <cmath>
#include <string>

#include "fieldest/error.hpp"

namespace fieldest {

// Parameter vector estimated by the fusion center: peak amplitude and
// peak location. The spread of the bell is known a priori and lives on
// GaussianBellField, not here.
struct FieldParams {
  double mu;
  double xc;
  double yc;
};

inline constexpr int kNumParams = 3;

using ParamVector = std::array<double, kNumParams>;
using ParamMatrix = std::array<ParamVector, kNumParams>;

// Gaussian bell G(x,y) = mu * exp(-((x-xc)^2 + (y-yc)^2) / (2*spread_sq)).
// spread_sq is the squared spread (c^2), known and never estimated.
struct GaussianBellField {
  FieldParams params;
  double spread_sq;
};

// Axis-aligned deployment area.
struct Region {
  double x_min, x_max;
  double y_min, y_max;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double area() const { return width() * height(); }
};

inline void validate(const FieldParams& p) {
  if (!(std::isfinite(p.mu) && std::isfinite(p.xc) && std::isfinite(p.yc))) {
    throw ConfigError("field parameters must be finite");
  }
  if (!(p.mu > 0.0)) {
    throw ConfigError("field amplitude mu must be > 0, got " + std::to_string(p.mu));
  }
}

inline void validate(const GaussianBellField& f) {
  validate(f.params);
  if (!(std::isfinite(f.spread_sq) && f.spread_sq > 0.0)) {
    throw ConfigError("field spread_sq must be finite and > 0");
  }
}

inline void validate(const Region& r) {
  if (!(std::isfinite(r.x_min) && std::isfinite(r.x_max) && std::isfinite(r.y_min) &&
        std::isfinite(r.y_max))) {
    throw ConfigError("region bounds must be finite");
  }
  if (!(r.x_min < r.x_max && r.y_min < r.y_max)) {
    throw ConfigError("region must have positive extent on both axes");
  }
}

inline double eval(const GaussianBellField& f, double x, double y) {
  const double dx = x - f.params.xc;
  const double dy = y - f.params.yc;
  return f.params.mu * std::exp(-(dx * dx + dy * dy) / (2.0 * f.spread_sq));
}

// Gradient of eval with respect to (mu, xc, yc) at a fixed point.
inline ParamVector grad_theta(const GaussianBellField& f, double x, double y) {
  const double g = eval(f, x, y);
  const double u = (x - f.params.xc) / f.spread_sq;
  const double v = (y - f.params.yc) / f.spread_sq;
  return {g / f.params.mu, g * u, g * v};
}

// Hessian of eval with respect to (mu, xc, yc); symmetric, d2/dmu2 = 0.
inline ParamMatrix hess_theta(const GaussianBellField& f, double x, double y) {
  const double g = eval(f, x, y);
  const double e = g / f.params.mu;
  const double u = (x - f.params.xc) / f.spread_sq;
  const double v = (y - f.params.yc) / f.spread_sq;
  const double w = 1.0 / f.spread_sq;
  ParamMatrix h;
  h[0] = {0.0, e * u, e * v};
  h[1] = {e * u, g * (u * u - w), g * u * v};
  h[2] = {e * v, g * u * v, g * (v * v - w)};
  return h;
}

}  // namespace fieldest
