#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <mutex>
#include <string>
#include <tuple>
#include <vector>

#include "crrmtl/errors.hpp"
#include "crrmtl/numeric.hpp"
#include "crrmtl/sim/rng.hpp"
#include "crrmtl/sim/scenario.hpp"

namespace crrmtl::sim {

inline constexpr std::size_t kCalibrationDraws = 200'000;
inline constexpr std::uint64_t kCalibrationSeed = 0x5eedca11b7a7e5ULL;

namespace detail {

// Expected censoring fraction for U(0, b) censoring given latent times: mean of min(T/b, 1).
inline double censoring_fraction(const std::vector<double>& latent, double bound) {
  CompensatedSum acc;
  for (const double t : latent) acc += std::min(t / bound, 1.0);
  return acc.value() / static_cast<double>(latent.size());
}

inline std::vector<double> latent_times(const ScenarioSpec& spec, Group g, Stream stream) {
  const auto arm = spec.arm(g);
  Rng rng(kCalibrationSeed, stream, static_cast<std::uint64_t>(spec.id) * 2 + static_cast<std::uint64_t>(g));
  std::vector<double> out(kCalibrationDraws);
  for (auto& t : out) t = arm.draw(rng).first;
  return out;
}

}  // namespace detail

/// Upper bound b of U(0, b) censoring giving `target_percent` censoring in group g.
///
/// Bisection on the Rao-Blackwellised censoring fraction over 200k latent draws,
/// then a check on a fresh 200k draw with actual uniform censoring times, which
/// must land within one percentage point of the target. Target 0 means no
/// censoring and returns +inf.
inline double calibrate_censoring(const ScenarioSpec& spec, int target_percent, Group g) {
  if (target_percent == 0) return std::numeric_limits<double>::infinity();
  if (target_percent < 0 || target_percent >= 100) {
    throw CalibrationError("censoring target " + std::to_string(target_percent) + "% unreachable (achievable range (0%, 100%))");
  }
  const double target = target_percent / 100.0;
  const auto latent = detail::latent_times(spec, g, Stream::Calibration);

  double lo = 1e-8, hi = 1e8;
  const double f_lo = detail::censoring_fraction(latent, lo);
  const double f_hi = detail::censoring_fraction(latent, hi);
  if (!(f_hi <= target && target <= f_lo)) {
    throw CalibrationError("censoring target " + std::to_string(target_percent) + "% outside achievable range [" +
                           std::to_string(100 * f_hi) + "%, " + std::to_string(100 * f_lo) + "%]");
  }
  for (int it = 0; it < 200 && hi / lo > 1.0 + 1e-12; ++it) {
    const double mid = std::sqrt(lo * hi);
    if (detail::censoring_fraction(latent, mid) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double bound = std::sqrt(lo * hi);

  Rng check(kCalibrationSeed, Stream::CalibrationCheck, static_cast<std::uint64_t>(spec.id) * 2 + static_cast<std::uint64_t>(g));
  const auto arm = spec.arm(g);
  std::size_t n_cens = 0;
  for (std::size_t i = 0; i < kCalibrationDraws; ++i) {
    const double t = arm.draw(check).first;
    if (bound * check.uniform() < t) ++n_cens;
  }
  const double achieved = static_cast<double>(n_cens) / static_cast<double>(kCalibrationDraws);
  if (std::fabs(achieved - target) > 0.01) {
    throw CalibrationError("calibrated bound " + std::to_string(bound) + " yields " + std::to_string(100 * achieved) +
                           "% censoring, target " + std::to_string(target_percent) + "%");
  }
  return bound;
}

/// Process-wide cache keyed by (scenario, group, target).
inline double cached_censoring_bound(const ScenarioSpec& spec, int target_percent, Group g) {
  static std::mutex mu;
  static std::map<std::tuple<int, int, int, double>, double> cache;
  const auto key = std::make_tuple(static_cast<int>(spec.id), static_cast<int>(g), target_percent, spec.p1);
  {
    std::lock_guard lock(mu);
    if (const auto it = cache.find(key); it != cache.end()) return it->second;
  }
  const double b = calibrate_censoring(spec, target_percent, g);
  std::lock_guard lock(mu);
  cache.emplace(key, b);
  return b;
}

}  // namespace crrmtl::sim
