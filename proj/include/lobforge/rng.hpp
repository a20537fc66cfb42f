#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace lobforge {

/// Seeded stream with explicit conversions, so draws are identical on every
/// standard library (std::uniform_real_distribution is not portable).
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Exponential with the given rate (> 0).
  double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// Seed of replication r, independent of how replications are scheduled.
inline std::uint64_t replication_seed(std::uint64_t seed, std::uint64_t r) { return splitmix64(seed ^ splitmix64(r)); }

}  // namespace lobforge
