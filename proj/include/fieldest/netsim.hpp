#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "fieldest/error.hpp"
#include "fieldest/field.hpp"
#include "fieldest/quadrature.hpp"
#include "fieldest/quantizer.hpp"
#include "fieldest/rng.hpp"

namespace fieldest {

struct SensorGrid {
  std::vector<double> x;
  std::vector<double> y;
  Region region;

  std::size_t size() const { return x.size(); }
};

// Noise variances of the two channel stages: sigma2 corrupts the sensor
// observation before quantization, eta2 corrupts the quantized value on
// its way to the fusion center.
struct NoiseConfig {
  double sigma2;
  double eta2;
};

inline void validate(const NoiseConfig& n) {
  if (!(std::isfinite(n.sigma2) && n.sigma2 > 0.0 && std::isfinite(n.eta2) && n.eta2 > 0.0)) {
    throw ConfigError("noise variances must be finite and > 0");
  }
}

// One simulated pass through the sensing chain, all vectors indexed by
// sensor: true_field G_k, raw observation R_k = G_k + W_k, quantized value
// q(R_k), received value Z_k = q(R_k) + N_k.
struct NetworkRealization {
  SensorGrid grid;
  std::vector<double> true_field;
  std::vector<double> raw;
  std::vector<double> quantized;
  std::vector<double> received;
};

// Uniform i.i.d. sensor placement; sensor i consumes its x then its y
// coordinate from the stream.
inline SensorGrid place_sensors(std::size_t k, const Region& region, RandomStream& rng) {
  validate(region);
  if (k < 1) {
    throw ConfigError("sensor count must be at least 1");
  }
  SensorGrid grid;
  grid.region = region;
  grid.x.resize(k);
  grid.y.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    grid.x[i] = region.x_min + region.width() * rng.uniform();
    grid.y[i] = region.y_min + region.height() * rng.uniform();
  }
  return grid;
}

// Mean square of the field over the region: (1/A) * integral of G^2.
inline double field_mean_square(const GaussianBellField& f, const Region& region, int nodes = 64) {
  const double integral =
      integrate_over_region([&](double x, double y) { return eval(f, x, y) * eval(f, x, y); },
                            region, nodes);
  return integral / region.area();
}

// Mean square of the quantizer output over the region for a given sensor
// noise level: (1/A) * integral of E[quantize(G + sigma*W)^2].
inline double quantizer_mean_square(const GaussianBellField& f, const QuantizerSpec& q,
                                    double sigma2, const Region& region, int nodes = 64) {
  const double sigma = std::sqrt(sigma2);
  const double integral = integrate_over_region(
      [&](double x, double y) { return expected_square(q, eval(f, x, y), sigma); }, region, nodes);
  return integral / region.area();
}

// Sensor noise variance hitting the requested observation SNR, defined as
// the field's regional mean square over sigma2.
inline double calibrate_sensor_noise(const GaussianBellField& f, const Region& region,
                                     double snr_db, int nodes = 64) {
  if (!std::isfinite(snr_db)) {
    throw ConfigError("observation SNR must be finite");
  }
  return field_mean_square(f, region, nodes) / std::pow(10.0, snr_db / 10.0);
}

inline double observation_snr_db(const GaussianBellField& f, const Region& region, double sigma2,
                                 int nodes = 64) {
  return 10.0 * std::log10(field_mean_square(f, region, nodes) / sigma2);
}

// Channel noise variance hitting the requested channel SNR, defined as the
// quantizer output's regional mean square over eta2. Depends on the sensor
// noise level through the cell probabilities.
inline double calibrate_channel_noise(const GaussianBellField& f, const QuantizerSpec& q,
                                      double sigma2, const Region& region, double snr_db,
                                      int nodes = 64) {
  if (!std::isfinite(snr_db)) {
    throw ConfigError("channel SNR must be finite");
  }
  return quantizer_mean_square(f, q, sigma2, region, nodes) / std::pow(10.0, snr_db / 10.0);
}

inline double channel_snr_db(const GaussianBellField& f, const QuantizerSpec& q, double sigma2,
                             const Region& region, double eta2, int nodes = 64) {
  return 10.0 * std::log10(quantizer_mean_square(f, q, sigma2, region, nodes) / eta2);
}

// Simulates the full sensing chain over a fixed grid. Sensor and channel
// noise come from separate role streams, one normal per sensor in index
// order, so realizations are reproducible for a given TrialStreams handle.
inline NetworkRealization simulate(const GaussianBellField& f, const SensorGrid& grid,
                                   const QuantizerSpec& q, const NoiseConfig& noise,
                                   const TrialStreams& streams) {
  validate(f);
  validate(q);
  validate(noise);
  const std::size_t k = grid.size();
  NetworkRealization out;
  out.grid = grid;
  out.true_field.resize(k);
  out.raw.resize(k);
  out.quantized.resize(k);
  out.received.resize(k);
  const double sigma = std::sqrt(noise.sigma2);
  const double eta = std::sqrt(noise.eta2);
  RandomStream sensor_rng = streams.stream(StreamRole::sensor_noise);
  RandomStream channel_rng = streams.stream(StreamRole::channel_noise);
  for (std::size_t i = 0; i < k; ++i) {
    out.true_field[i] = eval(f, grid.x[i], grid.y[i]);
    out.raw[i] = out.true_field[i] + sigma * sensor_rng.normal();
    out.quantized[i] = quantize(q, out.raw[i]);
    out.received[i] = out.quantized[i] + eta * channel_rng.normal();
  }
  return out;
}

}  // namespace fieldest
