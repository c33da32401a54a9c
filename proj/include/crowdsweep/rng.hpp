#pragma once

#include <cstdint>

#include "crowdsweep/vec2.hpp"

namespace crowdsweep {

/// splitmix64 finalizer; the one mixing function used wherever a seed is
/// derived from other integers.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Per-trial stream seed as a pure function of (experiment seed, condition
/// index, trial index): three chained mix64 rounds. Execution order and
/// worker count can never influence a stream.
constexpr std::uint64_t derive_seed(std::uint64_t experiment_seed,
                                    std::uint64_t condition_index,
                                    std::uint64_t trial_index) {
  std::uint64_t h = mix64(experiment_seed);
  h = mix64(h ^ condition_index);
  h = mix64(h ^ trial_index);
  return h;
}

/// splitmix64 sequence generator. Hand-rolled (rather than <random>
/// distributions) so that sequences are bit-identical on every platform and
/// standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform index in [0, n); n must be positive and far below 2^53.
  std::size_t uniform_index(std::size_t n) {
    return static_cast<std::size_t>(uniform() * static_cast<double>(n));
  }

  bool coin() { return (next_u64() & 1ull) != 0; }

  /// One Box-Muller pair: two independent standard normals per call.
  Vec2 normal2() {
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log1p(-u1));
    const double t = 2.0 * 3.14159265358979323846 * u2;
    return {r * std::cos(t), r * std::sin(t)};
  }

  /// Uniform point in the disc of given radius around the origin.
  Vec2 in_disc(double radius) {
    const double r = radius * std::sqrt(uniform());
    const double t = uniform(0.0, 2.0 * 3.14159265358979323846);
    return from_polar(t, r);
  }

 private:
  std::uint64_t state_;
};

}  // namespace crowdsweep
