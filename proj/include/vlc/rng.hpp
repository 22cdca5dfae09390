#pragma once

#include <cstdint>
#include <span>

namespace vlc {

/// SplitMix64. Deliberately self-contained: std distributions are
/// implementation-defined and would break bit-identical traces across
/// toolchains.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, bound). bound must be positive.
  uint64_t below(uint64_t bound) { return next() % bound; }

  /// Uniform in [lo, hi] inclusive.
  uint64_t range(uint64_t lo, uint64_t hi) { return lo + below(hi - lo + 1); }

  /// Bernoulli draw; p outside (0,1) short-circuits.
  bool chance(double p) {
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    return next() < static_cast<uint64_t>(p * 18446744073709551616.0L);
  }

  /// Stream derivation: a child generator keyed by arbitrary parts, so
  /// per-message draws do not depend on global draw order.
  static Rng derive(uint64_t seed, std::span<const uint64_t> parts) {
    uint64_t h = seed ^ 0x6a09e667f3bcc908ull;
    for (uint64_t p : parts) {
      h ^= p + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
      Rng mix(h);
      h = mix.next();
    }
    return Rng(h);
  }

 private:
  uint64_t state_;
};

inline uint64_t fnv1a(std::span<const uint8_t> data) {
  uint64_t h = 1469598103934665603ull;
  for (uint8_t b : data) {
    h ^= b;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace vlc
