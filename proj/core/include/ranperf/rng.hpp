#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace ranperf {

/// Counter-based deterministic random generator.
///
/// Output i of a stream is splitmix64(key + i * golden_gamma): a pure
/// function of (key, counter), so sequences are reproducible bit-for-bit
/// across platforms and compilers, unlike the std:: distributions.
/// Independent substreams are derived by mixing a stream id into the key,
/// which is how per-cell / per-minute generation stays deterministic under
/// any evaluation order.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : key_(mix(seed ^ kSalt)) {}

  /// Independent stream derived from this one. Derivation is associative
  /// enough for our use: substream(a).substream(b) differs from
  /// substream(b).substream(a).
  CounterRng substream(std::uint64_t stream_id) const {
    CounterRng r(0);
    r.key_ = mix(key_ ^ mix(stream_id + kSalt));
    r.counter_ = 0;
    return r;
  }

  std::uint64_t next_u64() { return mix(key_ + (++counter_) * kGamma); }

  /// Uniform double in [0, 1), 53-bit resolution.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform double in (0, 1]; safe as a log() argument.
  double next_open() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t uniform_below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  /// Standard normal via Box-Muller (the cosine branch; no rejection loop,
  /// one deterministic draw pair per call).
  double normal() {
    const double u1 = next_open();
    const double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  double lognormal(double mu, double sigma) {
    return std::exp(normal(mu, sigma));
  }

  double exponential(double rate) { return -std::log(next_open()) / rate; }

  /// Poisson count. Knuth's product method below lambda 60, normal
  /// approximation above (the generator's intensities live well below that).
  std::int64_t poisson(double lambda) {
    if (lambda <= 0.0) return 0;
    if (lambda < 60.0) {
      const double limit = std::exp(-lambda);
      double prod = 1.0;
      std::int64_t k = -1;
      do {
        ++k;
        prod *= next_open();
      } while (prod > limit);
      return k;
    }
    const double v = lambda + std::sqrt(lambda) * normal();
    return v < 0.0 ? 0 : static_cast<std::int64_t>(std::llround(v));
  }

 private:
  static constexpr std::uint64_t kSalt = 0x5bd1e995u;
  static constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ull;
  static constexpr double kPi = 3.141592653589793238462643383279502884;

  static std::uint64_t mix(std::uint64_t z) {
    z += kGamma;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace ranperf
