#pragma once

#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "fieldest/error.hpp"
#include "fieldest/estimator.hpp"
#include "fieldest/field.hpp"
#include "fieldest/metrics.hpp"
#include "fieldest/netsim.hpp"
#include "fieldest/quantizer.hpp"
#include "fieldest/rng.hpp"

namespace fieldest {

// Everything a Monte Carlo run needs. Defaults reproduce the reference
// scenario: an 8x8 region, bell peaked at (4,4) with amplitude 8 and
// squared spread 4, an 8-level unit-step quantizer, both SNRs at 15 dB,
// and EM started from the true parameters shifted by (+1,-1,-1).
struct ExperimentConfig {
  FieldParams theta_true{8.0, 4.0, 4.0};
  double spread_sq = 4.0;
  Region region{0.0, 8.0, 0.0, 8.0};
  int levels = 8;
  double step = 1.0;
  double offset = 0.0;
  double snr_obs_db = 15.0;
  double snr_ch_db = 15.0;
  std::vector<int> k_values = {5,  10, 15, 20, 25, 30, 35, 40, 45, 50,
                               55, 60, 65, 70, 75, 80, 85, 90, 95, 100};
  int single_k = 5;  // sensor count for single-realization commands
  int trials = 100;
  std::uint64_t master_seed = 1;
  FieldParams init{9.0, 3.0, 3.0};
  EmConfig em;
  int quadrature_nodes = 64;
  double outlier_tau = 1.0;   // threshold for the sweep CSV's outlier_frac column
  bool resample_grid = true;  // false reuses trial 0's sensor placement
  int threads = 1;            // 0 picks hardware concurrency
};

inline void validate(const ExperimentConfig& c) {
  validate(GaussianBellField{c.theta_true, c.spread_sq});
  validate(c.region);
  validate(FieldParams{c.init});
  validate(c.em);
  make_uniform(c.levels, c.step, c.offset);  // throws on a bad quantizer
  if (c.k_values.empty()) {
    throw ConfigError("k_values must name at least one sensor count");
  }
  for (int k : c.k_values) {
    if (k < 1) {
      throw ConfigError("sensor counts must be at least 1");
    }
  }
  if (c.single_k < 1) {
    throw ConfigError("k must be at least 1");
  }
  if (c.trials < 1) {
    throw ConfigError("trials must be at least 1");
  }
  if (c.quadrature_nodes < 1) {
    throw ConfigError("quadrature_nodes must be at least 1");
  }
  if (!(c.outlier_tau >= 0.0)) {
    throw ConfigError("outlier_tau must be >= 0");
  }
  if (c.threads < 0) {
    throw ConfigError("threads must be >= 0");
  }
  if (!(std::isfinite(c.snr_obs_db) && std::isfinite(c.snr_ch_db))) {
    throw ConfigError("SNR values must be finite");
  }
}

// Built-in sweep profiles: "desk" is the fast default above, "paper" is
// the dense grid (K = 5..200 step 5, 1000 trials).
inline void apply_profile(ExperimentConfig& c, std::string_view profile) {
  if (profile == "desk") {
    c.k_values.clear();
    for (int k = 5; k <= 100; k += 5) {
      c.k_values.push_back(k);
    }
    c.trials = 100;
  } else if (profile == "paper") {
    c.k_values.clear();
    for (int k = 5; k <= 200; k += 5) {
      c.k_values.push_back(k);
    }
    c.trials = 1000;
  } else {
    throw ConfigError("unknown profile '" + std::string(profile) + "' (expected desk or paper)");
  }
}

inline GaussianBellField true_field(const ExperimentConfig& c) {
  return {c.theta_true, c.spread_sq};
}

inline QuantizerSpec make_quantizer(const ExperimentConfig& c) {
  return make_uniform(c.levels, c.step, c.offset);
}

// Noise variances hitting the configured SNRs, calibrated against the true
// field parameters.
inline NoiseConfig calibrate_noise(const ExperimentConfig& c) {
  const GaussianBellField f = true_field(c);
  NoiseConfig noise{};
  noise.sigma2 = calibrate_sensor_noise(f, c.region, c.snr_obs_db, c.quadrature_nodes);
  noise.eta2 = calibrate_channel_noise(f, make_quantizer(c), noise.sigma2, c.region, c.snr_ch_db,
                                       c.quadrature_nodes);
  return noise;
}

// One Monte Carlo trial: place sensors, simulate the chain, run EM, score
// the estimate. Fully determined by (master_seed, k, trial_index); thread
// scheduling never touches the random streams. A failed EM run (singular
// solve or non-finite estimate) scores the +inf sentinels.
inline TrialResult run_trial(const ExperimentConfig& c, const NoiseConfig& noise, int k,
                             int trial_index) {
  const GaussianBellField truth = true_field(c);
  const QuantizerSpec quant = make_quantizer(c);
  const std::uint64_t uk = static_cast<std::uint64_t>(k);
  const std::uint64_t placement_trial =
      c.resample_grid ? static_cast<std::uint64_t>(trial_index) : 0;
  RandomStream placement_rng =
      trial_streams(c.master_seed, uk, placement_trial).stream(StreamRole::placement);
  const SensorGrid grid = place_sensors(static_cast<std::size_t>(k), c.region, placement_rng);
  const NetworkRealization net = simulate(
      truth, grid, quant, noise,
      trial_streams(c.master_seed, uk, static_cast<std::uint64_t>(trial_index)));
  const EmResult em =
      run_em(net.received, grid, quant, noise, {c.init, c.spread_sq}, c.em);
  TrialResult t;
  t.trial_index = trial_index;
  t.theta_hat = em.theta_hat;
  t.converged = em.converged;
  t.iterations = em.iterations;
  if (!em.failure_reason.empty()) {
    t.se = std::numeric_limits<double>::infinity();
    t.ise = std::numeric_limits<double>::infinity();
  } else {
    t.se = location_squared_error(em.theta_hat, c.theta_true);
    t.ise = integrated_square_error(em.theta_hat, c.theta_true, c.spread_sq, c.region,
                                    c.quadrature_nodes);
  }
  return t;
}

inline TrialResult run_trial(const ExperimentConfig& c, int k, int trial_index) {
  return run_trial(c, calibrate_noise(c), k, trial_index);
}

struct SweepRow {
  int k;
  BoxStats se;
  BoxStats ise;
  double outlier_frac;  // P[SE > outlier_tau], divergence sentinels included
  double mean_iters;
  int diverged;  // trials scoring the sentinel
};

struct SweepResult {
  std::vector<SweepRow> rows;                     // one per configured K
  std::vector<std::vector<TrialResult>> trials;  // [k index][trial index]
};

namespace detail {

inline BoxStats nan_box() {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  return {nan, nan, nan, nan, nan, {}};
}

inline SweepRow aggregate_rows(int k, const std::vector<TrialResult>& trials, double tau) {
  SweepRow row;
  row.k = k;
  std::vector<double> se(trials.size()), ise(trials.size());
  double iter_sum = 0.0;
  int diverged = 0;
  std::size_t exceed = 0;
  for (std::size_t i = 0; i < trials.size(); ++i) {
    se[i] = trials[i].se;
    ise[i] = trials[i].ise;
    iter_sum += trials[i].iterations;
    if (!std::isfinite(se[i])) {
      ++diverged;
    }
    if (se[i] > tau) {
      ++exceed;
    }
  }
  row.se = diverged == static_cast<int>(trials.size()) ? nan_box() : box_stats(se);
  row.ise = diverged == static_cast<int>(trials.size()) ? nan_box() : box_stats(ise);
  row.outlier_frac = static_cast<double>(exceed) / static_cast<double>(trials.size());
  row.mean_iters = iter_sum / static_cast<double>(trials.size());
  row.diverged = diverged;
  return row;
}

}  // namespace detail

// Monte Carlo sweep over the configured sensor counts. Trials are
// distributed over a worker pool, but each one derives its own streams and
// lands in its own slot, so the result is identical for any thread count.
inline SweepResult run_sweep(const ExperimentConfig& c) {
  validate(c);
  const NoiseConfig noise = calibrate_noise(c);
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned workers =
      c.threads == 0 ? hw : static_cast<unsigned>(c.threads);
  SweepResult out;
  out.rows.reserve(c.k_values.size());
  out.trials.reserve(c.k_values.size());
  for (int k : c.k_values) {
    std::vector<TrialResult> slots(static_cast<std::size_t>(c.trials));
    if (workers <= 1) {
      for (int t = 0; t < c.trials; ++t) {
        slots[static_cast<std::size_t>(t)] = run_trial(c, noise, k, t);
      }
    } else {
      std::atomic<int> next{0};
      std::vector<std::thread> pool;
      pool.reserve(workers);
      for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
          for (int t = next.fetch_add(1); t < c.trials; t = next.fetch_add(1)) {
            slots[static_cast<std::size_t>(t)] = run_trial(c, noise, k, t);
          }
        });
      }
      for (std::thread& th : pool) {
        th.join();
      }
    }
    out.rows.push_back(detail::aggregate_rows(k, slots, c.outlier_tau));
    out.trials.push_back(std::move(slots));
  }
  return out;
}

}  // namespace fieldest
