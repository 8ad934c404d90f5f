#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <random>

namespace mfes {

/// Seeded random source with implementation-independent output.
///
/// Standard <random> distributions are allowed to differ between standard
/// library implementations, which would break reproducible runs. Everything
/// here is derived from raw mt19937_64 output, so a seed produces the same
/// stream on every platform.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed) : engine_(seed) {}

  /// Uniform double in [0, 1).
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform double in [low, high).
  double uniform(double low, double high) {
    return low + (high - low) * uniform01();
  }

  /// Uniform index in [0, n). n must be positive.
  std::size_t index(std::size_t n) {
    auto i = static_cast<std::size_t>(uniform01() * static_cast<double>(n));
    return i < n ? i : n - 1;
  }

  /// Standard normal deviate (Box-Muller, pair-cached).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 1.0 - uniform01();  // (0, 1], keeps log finite
    double u2 = uniform01();
    double radius = std::sqrt(-2.0 * std::log(u1));
    double angle = 2.0 * pi() * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  std::uint64_t bits() { return engine_(); }

  /// Independent stream for concurrent consumers.
  RandomSource spawn() {
    return RandomSource(engine_() ^ 0x9e3779b97f4a7c15ull);
  }

  static constexpr double pi() { return 3.141592653589793238462643383279502884; }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// FNV-1a over raw bytes; used for stable content hashes.
inline std::uint64_t fnv1a64(const void* data, std::size_t size,
                             std::uint64_t state = 1469598103934665603ull) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < size; ++i) {
    state ^= bytes[i];
    state *= 1099511628211ull;
  }
  return state;
}

inline std::uint64_t fnv1a64(std::uint64_t value, std::uint64_t state) {
  return fnv1a64(&value, sizeof(value), state);
}

inline std::uint64_t fnv1a64(double value, std::uint64_t state) {
  std::uint64_t bits;
  static_assert(sizeof(bits) == sizeof(value));
  std::memcpy(&bits, &value, sizeof(bits));
  return fnv1a64(bits, state);
}

/// Standard normal density.
inline double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * RandomSource::pi());
}

/// Standard normal CDF.
inline double normal_cdf(double z) {
  return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

}  // namespace mfes
