#pragma once

#include <cstdint>
#include <random>

namespace crrmtl::sim {

inline constexpr const char* kRngName = "mt19937_64 per replicate, seeded by SplitMix64(seed, stream, replicate)";

/// SplitMix64 finalizer (Steele, Lea & Flood 2014).
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Substream seed: a pure function of (seed, stream, index), so replicate r is
/// reproducible regardless of worker count or scheduling.
constexpr std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) noexcept {
  return splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ index);
}

// Stream tags keep the different consumers of one seed apart.
enum class Stream : std::uint64_t { Replicate = 1, Calibration = 2, CalibrationCheck = 3, Truth = 4, Pilot = 5, Bootstrap = 6 };

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(std::uint64_t seed, Stream stream, std::uint64_t index)
      : engine_(substream_seed(seed, static_cast<std::uint64_t>(stream), index)) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1).
  double uniform_open() {
    double u;
    do {
      u = uniform();
    } while (u == 0.0);
    return u;
  }

  std::uint64_t next() { return engine_(); }

  /// Integer uniform on [0, n).
  std::uint64_t below(std::uint64_t n) { return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_); }

  std::mt19937_64& engine() noexcept { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace crrmtl::sim
