#pragma once

// EM estimator for the fusion center. The incomplete data are the received
// values Z_k = quantize(G_k + W_k) + N_k; the complete data add the
// pre-quantization observations R_k. The E-step reduces to two per-sensor
// scalars, the posterior mean A_k = E[R_k | z_k] and posterior mass B_k
// (identically 1 in exact arithmetic, kept as a live consistency check),
// and the M-step maximizes the resulting quadratic surrogate with a damped
// Newton iteration on its gradient.
//
// All per-sensor sums are evaluated in log space: each quantizer cell
// contributes exp(t_j) with t_j = log cell mass + log channel kernel, and
// in low-noise settings t_j reaches magnitudes around -1e6, far below what
// a linear-scale sum can represent. The log-sum-exp form is algebraically
// identical and keeps the posterior meaningful there. Cells are pruned to
// windows around the three candidate posterior modes; the summand is
// concave along the cell axis, so everything outside the windows sits at
// least e^-1000 below the peak.

#include <algorithm>
#include <array>
#include <cfloat>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fieldest/error.hpp"
#include "fieldest/field.hpp"
#include "fieldest/gaussian.hpp"
#include "fieldest/netsim.hpp"
#include "fieldest/quantizer.hpp"

namespace fieldest {

struct EmConfig {
  int max_em_iters = 5000;
  double em_tol = 1e-6;  // sup-norm bound on the EM parameter step
  int max_newton_iters = 50;
  double newton_tol = 1e-10;  // 2-norm bound on the inner residual
  int damping = 30;           // max step halvings per Newton iteration
  double jacobian_ridge = 1e-8;
  double max_condition = 1e12;  // 1-norm condition bound before the ridge kicks in
};

inline void validate(const EmConfig& c) {
  if (c.max_em_iters < 1 || c.max_newton_iters < 1) {
    throw ConfigError("iteration caps must be at least 1");
  }
  if (!(c.em_tol > 0.0) || !(c.newton_tol > 0.0)) {
    throw ConfigError("convergence tolerances must be > 0");
  }
  if (c.damping < 0 || !(c.jacobian_ridge >= 0.0) || !(c.max_condition > 0.0)) {
    throw ConfigError("damping, jacobian_ridge and max_condition must be non-negative");
  }
}

struct EmDiagnostics {
  long long density_floor_hits = 0;  // sensor densities below the smallest normal double
  long long ridge_uses = 0;
  long long step_halvings = 0;
};

// Frozen E-step quantities, indexed by sensor.
struct PosteriorTerms {
  std::vector<double> mean;  // A_k
  std::vector<double> mass;  // B_k
};

namespace detail {

inline constexpr double kLogDblMin = -708.3964185322641;  // log(DBL_MIN)
inline constexpr double kWindowWidth = 45.0;              // in posterior standard deviations

struct CellWindow {
  std::size_t lo, hi;  // inclusive
};

struct AbScratch {
  std::vector<std::size_t> cells;
  std::vector<double> za, zb;  // standardized cell boundaries
  std::vector<double> lmass;   // log cell probabilities
  std::vector<double> t;       // per-cell log contributions
};

struct SensorPosterior {
  double log_kernel;  // log sum_j p_j * exp(-(z - nu_j)^2 / (2 eta^2))
  double mean;        // A
  double mass;        // B
};

// Candidate cells for one sensor: union of windows around the prior mode
// g, the data mode z, and their precision-weighted blend.
inline void collect_candidates(const QuantizerSpec& q, double z, double g, double sigma,
                               double eta, std::vector<std::size_t>& cells) {
  const double post_var = 1.0 / (1.0 / (sigma * sigma) + 1.0 / (eta * eta));
  const double blend = post_var * (g / (sigma * sigma) + z / (eta * eta));
  std::array<CellWindow, 3> w = {
      CellWindow{cell_index(q, g - kWindowWidth * sigma), cell_index(q, g + kWindowWidth * sigma)},
      CellWindow{cell_index(q, z - kWindowWidth * eta), cell_index(q, z + kWindowWidth * eta)},
      CellWindow{cell_index(q, blend - kWindowWidth * std::sqrt(post_var)),
                 cell_index(q, blend + kWindowWidth * std::sqrt(post_var))},
  };
  std::sort(w.begin(), w.end(), [](const CellWindow& a, const CellWindow& b) { return a.lo < b.lo; });
  cells.clear();
  std::size_t next = 0;
  for (const CellWindow& cw : w) {
    for (std::size_t j = std::max(cw.lo, next); j <= cw.hi; ++j) {
      cells.push_back(j);
    }
    next = std::max(next, cw.hi + 1);
  }
}

inline SensorPosterior sensor_posterior(const QuantizerSpec& q, double z, double g, double sigma,
                                        double eta, AbScratch& s) {
  collect_candidates(q, z, g, sigma, eta, s.cells);
  const std::size_t n = s.cells.size();
  s.za.resize(n);
  s.zb.resize(n);
  s.lmass.resize(n);
  s.t.resize(n);
  double tmax = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = s.cells[i];
    s.za[i] = (q.boundaries[j] - g) / sigma;
    s.zb[i] = (q.boundaries[j + 1] - g) / sigma;
    s.lmass[i] = log_interval_mass(s.za[i], s.zb[i]);
    const double d = (z - q.reproduction_points[j]) / eta;
    s.t[i] = s.lmass[i] - 0.5 * d * d;
    tmax = std::max(tmax, s.t[i]);
  }
  double sumexp = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sumexp += std::exp(s.t[i] - tmax);
  }
  const double lse = tmax + std::log(sumexp);
  double mean = 0.0;
  double mass = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = std::exp(s.t[i] - lse);
    mass += w;
    // Mean of the sensor observation truncated to cell j, shifted back to
    // the prior center.
    mean += w * (g + sigma * truncated_mean_shift(s.za[i], s.zb[i], s.lmass[i]));
  }
  return {lse, mean, mass};
}

inline double log_density_offset(const NoiseConfig& noise) {
  return -0.5 * std::log(noise.eta2) - kLogSqrt2Pi;
}

}  // namespace detail

// Density of the received value z under field value g: a mixture of
// Gaussians centered at the reproduction points, weighted by the cell
// probabilities. Floored at the smallest positive normal double; floored
// evaluations are counted in the diagnostics.
inline double received_density(double z, double g, const QuantizerSpec& q,
                               const NoiseConfig& noise, EmDiagnostics* diag = nullptr) {
  detail::AbScratch s;
  const auto post =
      detail::sensor_posterior(q, z, g, std::sqrt(noise.sigma2), std::sqrt(noise.eta2), s);
  const double log_fz = post.log_kernel + detail::log_density_offset(noise);
  if (log_fz < detail::kLogDblMin) {
    if (diag != nullptr) {
      ++diag->density_floor_hits;
    }
    return DBL_MIN;
  }
  return std::exp(log_fz);
}

// Posterior mean E[R | z] of the pre-quantization observation (the A term
// of the E-step).
inline double posterior_mean(double z, double g, const QuantizerSpec& q,
                             const NoiseConfig& noise) {
  detail::AbScratch s;
  return detail::sensor_posterior(q, z, g, std::sqrt(noise.sigma2), std::sqrt(noise.eta2), s).mean;
}

// Posterior mass (the B term); identically 1 in exact arithmetic.
inline double posterior_mass(double z, double g, const QuantizerSpec& q,
                             const NoiseConfig& noise) {
  detail::AbScratch s;
  return detail::sensor_posterior(q, z, g, std::sqrt(noise.sigma2), std::sqrt(noise.eta2), s).mass;
}

// Log-likelihood of the received vector under the field parameters carried
// by f (spread fixed). Evaluated in log space, so it stays finite when the
// per-sensor densities underflow.
inline double received_loglik(const GaussianBellField& f, std::span<const double> z,
                              const SensorGrid& grid, const QuantizerSpec& q,
                              const NoiseConfig& noise) {
  if (z.size() != grid.size()) {
    throw ConfigError("received vector and sensor grid sizes differ");
  }
  const double sigma = std::sqrt(noise.sigma2);
  const double eta = std::sqrt(noise.eta2);
  detail::AbScratch s;
  double ll = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double g = eval(f, grid.x[i], grid.y[i]);
    ll += detail::sensor_posterior(q, z[i], g, sigma, eta, s).log_kernel;
  }
  return ll + static_cast<double>(z.size()) * detail::log_density_offset(noise);
}

// E-step: freezes the per-sensor posterior terms at the current estimate.
inline PosteriorTerms posterior_terms(const GaussianBellField& f, std::span<const double> z,
                                      const SensorGrid& grid, const QuantizerSpec& q,
                                      const NoiseConfig& noise, EmDiagnostics* diag = nullptr) {
  if (z.size() != grid.size()) {
    throw ConfigError("received vector and sensor grid sizes differ");
  }
  const double sigma = std::sqrt(noise.sigma2);
  const double eta = std::sqrt(noise.eta2);
  const double offset = detail::log_density_offset(noise);
  PosteriorTerms terms;
  terms.mean.resize(z.size());
  terms.mass.resize(z.size());
  detail::AbScratch s;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double g = eval(f, grid.x[i], grid.y[i]);
    const auto post = detail::sensor_posterior(q, z[i], g, sigma, eta, s);
    terms.mean[i] = post.mean;
    terms.mass[i] = post.mass;
    if (diag != nullptr && post.log_kernel + offset < detail::kLogDblMin) {
      ++diag->density_floor_hits;
    }
  }
  return terms;
}

// Gradient of the M-step surrogate, scaled by sigma^2:
// F(theta') = sum_k (A_k - B_k * G_k(theta')) * grad G_k(theta').
inline ParamVector mstep_residual(const GaussianBellField& f_next, const SensorGrid& grid,
                                  const PosteriorTerms& terms) {
  ParamVector r = {0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double g = eval(f_next, grid.x[i], grid.y[i]);
    const ParamVector dg = grad_theta(f_next, grid.x[i], grid.y[i]);
    const double w = terms.mean[i] - terms.mass[i] * g;
    for (int t = 0; t < kNumParams; ++t) {
      r[t] += w * dg[t];
    }
  }
  return r;
}

inline ParamVector mstep_residual(const GaussianBellField& f_next, const GaussianBellField& f_k,
                                  std::span<const double> z, const SensorGrid& grid,
                                  const QuantizerSpec& q, const NoiseConfig& noise) {
  return mstep_residual(f_next, grid, posterior_terms(f_k, z, grid, q, noise));
}

// Jacobian of mstep_residual in theta':
// J = sum_k [-B_k * grad grad^T + (A_k - B_k G_k) * hess G_k].
inline ParamMatrix mstep_jacobian(const GaussianBellField& f_next, const SensorGrid& grid,
                                  const PosteriorTerms& terms) {
  ParamMatrix j = {};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double g = eval(f_next, grid.x[i], grid.y[i]);
    const ParamVector dg = grad_theta(f_next, grid.x[i], grid.y[i]);
    const ParamMatrix hg = hess_theta(f_next, grid.x[i], grid.y[i]);
    const double w = terms.mean[i] - terms.mass[i] * g;
    for (int a = 0; a < kNumParams; ++a) {
      for (int b = 0; b < kNumParams; ++b) {
        // dg[a] * dg[b] is grouped first so the matrix stays bitwise
        // symmetric (hess_theta already mirrors its off-diagonal bits).
        j[a][b] += w * hg[a][b] - terms.mass[i] * (dg[a] * dg[b]);
      }
    }
  }
  return j;
}

inline ParamMatrix mstep_jacobian(const GaussianBellField& f_next, const GaussianBellField& f_k,
                                  std::span<const double> z, const SensorGrid& grid,
                                  const QuantizerSpec& q, const NoiseConfig& noise) {
  return mstep_jacobian(f_next, grid, posterior_terms(f_k, z, grid, q, noise));
}

namespace detail {

inline double norm1(const ParamMatrix& m) {
  double best = 0.0;
  for (int c = 0; c < kNumParams; ++c) {
    double s = 0.0;
    for (int r = 0; r < kNumParams; ++r) {
      s += std::abs(m[r][c]);
    }
    best = std::max(best, s);
  }
  return best;
}

// Explicit 3x3 inverse via the adjugate. Returns false on a vanishing or
// non-finite determinant; cond is the 1-norm condition estimate.
inline bool invert3(const ParamMatrix& m, ParamMatrix& inv, double& cond) {
  const double c00 = m[1][1] * m[2][2] - m[1][2] * m[2][1];
  const double c01 = m[1][2] * m[2][0] - m[1][0] * m[2][2];
  const double c02 = m[1][0] * m[2][1] - m[1][1] * m[2][0];
  const double det = m[0][0] * c00 + m[0][1] * c01 + m[0][2] * c02;
  if (det == 0.0 || !std::isfinite(det)) {
    return false;
  }
  const double d = 1.0 / det;
  inv[0][0] = c00 * d;
  inv[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) * d;
  inv[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) * d;
  inv[1][0] = c01 * d;
  inv[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) * d;
  inv[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) * d;
  inv[2][0] = c02 * d;
  inv[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) * d;
  inv[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) * d;
  cond = norm1(m) * norm1(inv);
  return std::isfinite(cond);
}

inline double norm2(const ParamVector& v) {
  return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
}

}  // namespace detail

struct NewtonOutcome {
  FieldParams theta;
  bool ok;
  double residual_norm;  // at the input point
  double step_norm;      // sup-norm of the applied step
  std::string failure;
};

// One damped Newton step on the frozen surrogate gradient. The linear
// solve gets a ridge retry when the Jacobian is singular or its condition
// estimate exceeds the configured bound; the step is halved (up to
// config.damping times) while it increases the residual norm.
inline NewtonOutcome newton_step(const FieldParams& theta_n, double spread_sq,
                                 const SensorGrid& grid, const PosteriorTerms& terms,
                                 const EmConfig& config, EmDiagnostics* diag = nullptr) {
  const GaussianBellField f_n{theta_n, spread_sq};
  const ParamVector res = mstep_residual(f_n, grid, terms);
  const double res_norm = detail::norm2(res);
  ParamMatrix jac = mstep_jacobian(f_n, grid, terms);
  ParamMatrix inv;
  double cond = 0.0;
  bool solved = detail::invert3(jac, inv, cond);
  if (!solved || cond > config.max_condition) {
    for (int t = 0; t < kNumParams; ++t) {
      jac[t][t] += config.jacobian_ridge;
    }
    solved = detail::invert3(jac, inv, cond);
    if (diag != nullptr) {
      ++diag->ridge_uses;
    }
    if (!solved) {
      return {theta_n, false, res_norm, 0.0, "singular M-step Jacobian after ridge"};
    }
  }
  ParamVector step;
  for (int r = 0; r < kNumParams; ++r) {
    step[r] = -(inv[r][0] * res[0] + inv[r][1] * res[1] + inv[r][2] * res[2]);
  }
  FieldParams cand{};
  for (int h = 0;; ++h) {
    cand = {theta_n.mu + step[0], theta_n.xc + step[1], theta_n.yc + step[2]};
    const ParamVector cand_res = mstep_residual({cand, spread_sq}, grid, terms);
    if (!(detail::norm2(cand_res) > res_norm) || h >= config.damping) {
      break;
    }
    step[0] *= 0.5;
    step[1] *= 0.5;
    step[2] *= 0.5;
    if (diag != nullptr) {
      ++diag->step_halvings;
    }
  }
  const double step_norm =
      std::max({std::abs(step[0]), std::abs(step[1]), std::abs(step[2])});
  return {cand, true, res_norm, step_norm, ""};
}

inline NewtonOutcome newton_step(const FieldParams& theta_n, const GaussianBellField& f_k,
                                 std::span<const double> z, const SensorGrid& grid,
                                 const QuantizerSpec& q, const NoiseConfig& noise,
                                 const EmConfig& config) {
  return newton_step(theta_n, f_k.spread_sq, grid, posterior_terms(f_k, z, grid, q, noise),
                     config);
}

struct EmTracePoint {
  int iteration;  // 0 is the initial point
  FieldParams theta;
  double loglik;
  double newton_residual;  // 2-norm of the surrogate gradient after the inner solve
  int inner_iters;
};

using EmTrace = std::vector<EmTracePoint>;

struct EmResult {
  FieldParams theta_hat;
  bool converged;
  int iterations;  // completed EM iterations
  EmTrace trace;
  std::string failure_reason;  // empty unless the inner solver failed
  EmDiagnostics diagnostics;
};

// Full EM iteration: freeze the posterior terms at the current estimate,
// then run the damped Newton iteration on the frozen surrogate gradient to
// (near) convergence, and repeat until the parameter step falls below
// em_tol or the iteration cap is hit. A Newton failure or a non-finite
// estimate ends the run with converged = false and the trace so far.
inline EmResult run_em(std::span<const double> z, const SensorGrid& grid, const QuantizerSpec& q,
                       const NoiseConfig& noise, const GaussianBellField& init,
                       const EmConfig& config) {
  validate(init);
  validate(q);
  validate(noise);
  validate(config);
  if (z.size() != grid.size()) {
    throw ConfigError("received vector and sensor grid sizes differ");
  }
  EmResult out;
  out.converged = false;
  out.iterations = 0;
  FieldParams theta = init.params;
  const double spread_sq = init.spread_sq;
  out.trace.push_back(
      {0, theta, received_loglik({theta, spread_sq}, z, grid, q, noise), 0.0, 0});
  for (int it = 1; it <= config.max_em_iters; ++it) {
    const PosteriorTerms terms =
        posterior_terms({theta, spread_sq}, z, grid, q, noise, &out.diagnostics);
    FieldParams inner = theta;
    int inner_iters = 0;
    double res_norm = detail::norm2(mstep_residual({inner, spread_sq}, grid, terms));
    while (res_norm > config.newton_tol && inner_iters < config.max_newton_iters) {
      const NewtonOutcome step =
          newton_step(inner, spread_sq, grid, terms, config, &out.diagnostics);
      if (!step.ok) {
        out.theta_hat = theta;
        out.failure_reason = step.failure;
        return out;
      }
      inner = step.theta;
      ++inner_iters;
      res_norm = detail::norm2(mstep_residual({inner, spread_sq}, grid, terms));
      if (step.step_norm <= config.newton_tol) {
        break;
      }
    }
    const double delta = std::max({std::abs(inner.mu - theta.mu), std::abs(inner.xc - theta.xc),
                                   std::abs(inner.yc - theta.yc)});
    theta = inner;
    out.iterations = it;
    out.trace.push_back({it, theta,
                         received_loglik({theta, spread_sq}, z, grid, q, noise), res_norm,
                         inner_iters});
    if (!(std::isfinite(theta.mu) && std::isfinite(theta.xc) && std::isfinite(theta.yc))) {
      out.theta_hat = theta;
      out.failure_reason = "non-finite parameter estimate";
      return out;
    }
    if (delta <= config.em_tol) {
      out.converged = true;
      break;
    }
  }
  out.theta_hat = theta;
  return out;
}

}  // namespace fieldest
