#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace fieldest {

// splitmix64 step: mixes its input through the golden-ratio increment and
// the avalanche finalizer. Nonzero output for zero input.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Independent random-number roles inside one Monte Carlo trial. Drawing
// from one role never consumes variates from another, so the simulated
// chain is reproducible piecewise.
enum class StreamRole : std::uint64_t {
  placement = 1,
  sensor_noise = 2,
  channel_noise = 3,
};

// Seed derived from (master seed, sensor count, trial index, role) by a
// mix chain. Every trial/role combination gets its own engine, which makes
// results independent of scheduling and thread count.
inline std::uint64_t stream_seed(std::uint64_t master, std::uint64_t k, std::uint64_t trial,
                                 StreamRole role) {
  std::uint64_t h = mix64(master);
  h = mix64(h ^ k);
  h = mix64(h ^ trial);
  return mix64(h ^ static_cast<std::uint64_t>(role));
}

// Deterministic variate source. Uniforms take the top 53 bits of the
// engine output; normals come from Box-Muller on (0,1] x [0,1), with the
// pair's second value cached. No distribution object from the standard
// library is used, so sequences are identical across standard library
// implementations.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1]; safe as a log argument.
  double uniform_open() { return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform_open()));
    const double a = 2.0 * M_PI * uniform();
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Handle for one trial's role-separated streams.
struct TrialStreams {
  std::uint64_t master;
  std::uint64_t k;
  std::uint64_t trial;

  RandomStream stream(StreamRole role) const {
    return RandomStream(stream_seed(master, k, trial, role));
  }
};

inline TrialStreams trial_streams(std::uint64_t master, std::uint64_t k, std::uint64_t trial) {
  return {master, k, trial};
}

}  // namespace fieldest
