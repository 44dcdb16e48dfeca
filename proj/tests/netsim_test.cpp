#include "fieldest/netsim.hpp"

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "fieldest/field.hpp"
#include "fieldest/quantizer.hpp"
#include "fieldest/rng.hpp"
#include "oracles.hpp"

namespace {

using fieldest::calibrate_channel_noise;
using fieldest::calibrate_sensor_noise;
using fieldest::channel_snr_db;
using fieldest::ConfigError;
using fieldest::eval;
using fieldest::field_mean_square;
using fieldest::GaussianBellField;
using fieldest::make_uniform;
using fieldest::NetworkRealization;
using fieldest::NoiseConfig;
using fieldest::observation_snr_db;
using fieldest::place_sensors;
using fieldest::quantize;
using fieldest::quantizer_mean_square;
using fieldest::QuantizerSpec;
using fieldest::RandomStream;
using fieldest::Region;
using fieldest::SensorGrid;
using fieldest::simulate;
using fieldest::StreamRole;
using fieldest::trial_streams;
using fieldest::TrialStreams;

const GaussianBellField kField{{8.0, 4.0, 4.0}, 4.0};
const Region kRegion{0.0, 8.0, 0.0, 8.0};

TEST(PlaceSensors, StaysInsideRegionAndIsDeterministic) {
  RandomStream a(991);
  RandomStream b(991);
  const SensorGrid ga = place_sensors(200, kRegion, a);
  const SensorGrid gb = place_sensors(200, kRegion, b);
  ASSERT_EQ(ga.size(), 200u);
  for (std::size_t i = 0; i < ga.size(); ++i) {
    EXPECT_GE(ga.x[i], 0.0);
    EXPECT_LT(ga.x[i], 8.0);
    EXPECT_GE(ga.y[i], 0.0);
    EXPECT_LT(ga.y[i], 8.0);
    EXPECT_EQ(ga.x[i], gb.x[i]);
    EXPECT_EQ(ga.y[i], gb.y[i]);
  }
}

TEST(PlaceSensors, UniformInDistribution) {
  RandomStream rng(17);
  const std::size_t k = 100000;
  const SensorGrid g = place_sensors(k, kRegion, rng);
  double mx = 0.0, my = 0.0;
  std::size_t left = 0;
  for (std::size_t i = 0; i < k; ++i) {
    mx += g.x[i];
    my += g.y[i];
    if (g.x[i] < 4.0) {
      ++left;
    }
  }
  // Mean of U(0,8) is 4 with sd 8/sqrt(12); 5 sigma over 1e5 samples.
  const double se = 8.0 / std::sqrt(12.0 * k);
  EXPECT_NEAR(mx / k, 4.0, 5.0 * se);
  EXPECT_NEAR(my / k, 4.0, 5.0 * se);
  EXPECT_NEAR(static_cast<double>(left) / k, 0.5, 5.0 * 0.5 / std::sqrt(double(k)));
}

TEST(PlaceSensors, RejectsEmptyGrid) {
  RandomStream rng(1);
  EXPECT_THROW(place_sensors(0, kRegion, rng), ConfigError);
}

TEST(Calibration, SensorNoiseMatchesFrozenReferenceValue) {
  // Mean square of the reference field over its region divided by 10^1.5,
  // frozen from 40-digit arithmetic.
  const double s2 = calibrate_sensor_noise(kField, kRegion, 15.0);
  EXPECT_NEAR(s2, 0.39367451617790647442, 1e-6 * s2);
}

TEST(Calibration, TenDecibelsDividesVarianceByTen) {
  const double a = calibrate_sensor_noise(kField, kRegion, 15.0);
  const double b = calibrate_sensor_noise(kField, kRegion, 25.0);
  EXPECT_NEAR(a / b, 10.0, 1e-12);
}

TEST(Calibration, ObservationSnrRoundTrips) {
  for (double db : {-5.0, 0.0, 10.0, 15.0, 20.0, 30.0}) {
    const double s2 = calibrate_sensor_noise(kField, kRegion, db);
    EXPECT_NEAR(observation_snr_db(kField, kRegion, s2), db, 1e-9) << db;
  }
}

TEST(Calibration, ChannelSnrRoundTrips) {
  const QuantizerSpec q = make_uniform(8, 1.0, 0.0);
  const double s2 = calibrate_sensor_noise(kField, kRegion, 15.0);
  for (double db : {0.0, 10.0, 15.0, 20.0}) {
    const double e2 = calibrate_channel_noise(kField, q, s2, kRegion, db);
    EXPECT_NEAR(channel_snr_db(kField, q, s2, kRegion, e2), db, 1e-9) << db;
  }
}

TEST(Calibration, QuantizerMeanSquareMatchesMonteCarlo) {
  const QuantizerSpec q = make_uniform(8, 1.0, 0.0);
  const double sigma2 = calibrate_sensor_noise(kField, kRegion, 15.0);
  const double sigma = std::sqrt(sigma2);
  // MC estimate of (1/A) integral E[quantize(G + sigma W)^2]: sample a
  // uniform location, then one noisy quantized observation.
  const int n = 2000000;
  oracles::TestRng rng(271828);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.uniform(0.0, 8.0);
    const double y = rng.uniform(0.0, 8.0);
    const double v = quantize(q, eval(kField, x, y) + sigma * rng.normal());
    sum += v * v;
  }
  const double mc = sum / n;
  const double exact = quantizer_mean_square(kField, q, sigma2, kRegion);
  EXPECT_NEAR(exact, mc, 0.01 * exact);
}

TEST(Simulate, ChainIdentitiesHoldExactly) {
  const QuantizerSpec q = make_uniform(8, 1.0, 0.0);
  const NoiseConfig noise{0.4, 0.25};
  const TrialStreams streams = trial_streams(7, 50, 3);
  RandomStream placement = streams.stream(StreamRole::placement);
  const SensorGrid grid = place_sensors(50, kRegion, placement);
  const NetworkRealization r = simulate(kField, grid, q, noise, streams);
  ASSERT_EQ(r.true_field.size(), 50u);
  for (std::size_t i = 0; i < 50; ++i) {
    EXPECT_EQ(r.true_field[i], eval(kField, grid.x[i], grid.y[i]));
    EXPECT_EQ(r.quantized[i], quantize(q, r.raw[i]));
    EXPECT_NE(r.raw[i], r.true_field[i]);  // noise actually applied
  }
}

TEST(Simulate, DeterministicForFixedStreamsAndDistinctAcrossTrials) {
  const QuantizerSpec q = make_uniform(8, 1.0, 0.0);
  const NoiseConfig noise{0.4, 0.25};
  const TrialStreams s0 = trial_streams(7, 20, 0);
  RandomStream p0 = s0.stream(StreamRole::placement);
  const SensorGrid grid = place_sensors(20, kRegion, p0);
  const NetworkRealization a = simulate(kField, grid, q, noise, s0);
  const NetworkRealization b = simulate(kField, grid, q, noise, s0);
  for (std::size_t i = 0; i < 20; ++i) {
    EXPECT_EQ(a.raw[i], b.raw[i]);
    EXPECT_EQ(a.received[i], b.received[i]);
  }
  const NetworkRealization c = simulate(kField, grid, q, noise, trial_streams(7, 20, 1));
  bool any_differs = false;
  for (std::size_t i = 0; i < 20; ++i) {
    any_differs = any_differs || c.raw[i] != a.raw[i];
  }
  EXPECT_TRUE(any_differs);
}

TEST(Simulate, NoiseMomentsMatchConfiguration) {
  const QuantizerSpec q = make_uniform(8, 1.0, 0.0);
  const NoiseConfig noise{0.36, 0.09};
  const std::size_t k = 200000;
  const TrialStreams streams = trial_streams(99, k, 0);
  RandomStream placement = streams.stream(StreamRole::placement);
  const SensorGrid grid = place_sensors(k, kRegion, placement);
  const NetworkRealization r = simulate(kField, grid, q, noise, streams);
  double sw = 0.0, sw2 = 0.0, sn = 0.0, sn2 = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double w = r.raw[i] - r.true_field[i];
    const double n = r.received[i] - r.quantized[i];
    sw += w;
    sw2 += w * w;
    sn += n;
    sn2 += n * n;
  }
  const double kd = static_cast<double>(k);
  // Mean within 5 sigma/sqrt(k); variance within 5*sqrt(2/k)*var.
  EXPECT_NEAR(sw / kd, 0.0, 5.0 * std::sqrt(noise.sigma2 / kd));
  EXPECT_NEAR(sw2 / kd, noise.sigma2, 5.0 * noise.sigma2 * std::sqrt(2.0 / kd));
  EXPECT_NEAR(sn / kd, 0.0, 5.0 * std::sqrt(noise.eta2 / kd));
  EXPECT_NEAR(sn2 / kd, noise.eta2, 5.0 * noise.eta2 * std::sqrt(2.0 / kd));
}

TEST(Simulate, SensorAndChannelStreamsAreDecoupled) {
  // Changing eta2 must not change the raw observations: channel noise comes
  // from its own stream.
  const QuantizerSpec q = make_uniform(8, 1.0, 0.0);
  const TrialStreams streams = trial_streams(5, 30, 2);
  RandomStream placement = streams.stream(StreamRole::placement);
  const SensorGrid grid = place_sensors(30, kRegion, placement);
  const NetworkRealization a = simulate(kField, grid, q, NoiseConfig{0.4, 0.25}, streams);
  const NetworkRealization b = simulate(kField, grid, q, NoiseConfig{0.4, 2.5}, streams);
  for (std::size_t i = 0; i < 30; ++i) {
    EXPECT_EQ(a.raw[i], b.raw[i]);
    EXPECT_EQ(a.quantized[i], b.quantized[i]);
    EXPECT_NE(a.received[i], b.received[i]);
  }
}

TEST(Simulate, NearNoiselessLimitTracksTrueField) {
  const QuantizerSpec q = make_uniform(8, 1.0, 0.0);
  const NoiseConfig noise{1e-18, 1e-18};
  const TrialStreams streams = trial_streams(11, 100, 0);
  RandomStream placement = streams.stream(StreamRole::placement);
  const SensorGrid grid = place_sensors(100, kRegion, placement);
  const NetworkRealization r = simulate(kField, grid, q, noise, streams);
  for (std::size_t i = 0; i < 100; ++i) {
    EXPECT_EQ(r.quantized[i], quantize(q, r.true_field[i]));
    EXPECT_NEAR(r.received[i], r.quantized[i], 1e-8);
  }
}

TEST(StreamSeeds, RolesAndTrialsDecorrelate) {
  const std::uint64_t a = fieldest::stream_seed(1, 10, 0, StreamRole::placement);
  const std::uint64_t b = fieldest::stream_seed(1, 10, 0, StreamRole::sensor_noise);
  const std::uint64_t c = fieldest::stream_seed(1, 10, 1, StreamRole::placement);
  const std::uint64_t d = fieldest::stream_seed(2, 10, 0, StreamRole::placement);
  const std::uint64_t e = fieldest::stream_seed(1, 20, 0, StreamRole::placement);
  EXPECT_NE(a, b);
  EXPECT_NE(a, c);
  EXPECT_NE(a, d);
  EXPECT_NE(a, e);
}

TEST(RandomStreamDraws, UniformBoundsAndNormalMoments) {
  RandomStream rng(123);
  const int n = 200000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    const double v = rng.uniform_open();
    ASSERT_GT(v, 0.0);
    ASSERT_LE(v, 1.0);
    const double z = rng.normal();
    sum += z;
    sum2 += z * z;
  }
  EXPECT_NEAR(sum / n, 0.0, 5.0 / std::sqrt(double(n)));
  EXPECT_NEAR(sum2 / n, 1.0, 5.0 * std::sqrt(2.0 / n));
}

TEST(NoiseValidate, RejectsNonPositiveVariances) {
  EXPECT_THROW(validate(NoiseConfig{0.0, 1.0}), ConfigError);
  EXPECT_THROW(validate(NoiseConfig{1.0, -1.0}), ConfigError);
  EXPECT_NO_THROW(validate(NoiseConfig{1.0, 1.0}));
}

}  // namespace
