#pragma once

#include <cmath>
#include <cstdint>

#include "crrmtl/data.hpp"
#include "crrmtl/errors.hpp"
#include "crrmtl/estimators.hpp"
#include "crrmtl/inference.hpp"
#include "crrmtl/numeric.hpp"

namespace crrmtl {

/// Planning inputs for an RMTLd comparison.
struct DesignInput {
  double delta = 0.0;      // planned mu_1(tau) - mu_0(tau)
  double sigma0_sq = 1.0;  // n * var(mu_hat) in the control arm
  double sigma1_sq = 1.0;  // same for the treatment arm
  double ratio = 1.0;      // n1 / n0
  double alpha = 0.05;     // two-sided
  double power = 0.8;
};

struct DesignResult {
  std::int64_t n0 = 0;
  std::int64_t n1 = 0;
  std::int64_t total = 0;
  double n0_real = 0.0;
};

namespace detail {
inline void check_design(const DesignInput& in, bool need_power) {
  if (!std::isfinite(in.delta)) throw DomainError("delta must be finite");
  if (!(in.sigma0_sq > 0.0) || !(in.sigma1_sq > 0.0)) throw DomainError("variances must be positive");
  if (!(in.ratio > 0.0)) throw DomainError("allocation ratio must be positive");
  if (!(in.alpha > 0.0 && in.alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
  if (need_power && !(in.power > 0.0 && in.power < 1.0)) throw DomainError("power must lie in (0, 1)");
}
}  // namespace detail

/// n0 = (z_{1-beta} + z_{1-alpha/2})^2 (sigma0^2 + sigma1^2 / r) / delta^2,
/// with n0 and n1 = r * n0 each rounded up separately.
inline DesignResult sample_size(const DesignInput& in) {
  detail::check_design(in, true);
  if (in.delta == 0.0) throw InfeasibleDesignError("infeasible design: delta must be nonzero");
  const double z = normal_quantile(in.power) + normal_quantile(1.0 - in.alpha / 2.0);
  DesignResult r;
  r.n0_real = z * z * (in.sigma0_sq + in.sigma1_sq / in.ratio) / (in.delta * in.delta);
  if (!std::isfinite(r.n0_real) || r.n0_real > 1e15) throw InfeasibleDesignError("infeasible design: sample size overflows");
  // Guard the ceiling against representation noise such as 63.000000000001.
  const auto ceil_count = [](double x) { return static_cast<std::int64_t>(std::ceil(x - 1e-9 * std::max(1.0, x))); };
  r.n0 = std::max<std::int64_t>(2, ceil_count(r.n0_real));
  r.n1 = std::max<std::int64_t>(2, ceil_count(in.ratio * r.n0_real));
  r.total = r.n0 + r.n1;
  return r;
}

/// Approximate power of the two-sided RMTLd test with n0 control subjects and
/// n1 = ratio * n0 treatment subjects: Phi(|delta| / sqrt(s0/n0 + s1/n1) - z_{1-alpha/2}).
inline double power_at(const DesignInput& in, double n0) {
  detail::check_design(in, false);
  if (!(n0 >= 2.0)) throw DomainError("n0 must be at least 2");
  const double n1 = in.ratio * n0;
  const double se = std::sqrt(in.sigma0_sq / n0 + in.sigma1_sq / n1);
  return normal_cdf(std::fabs(in.delta) / se - normal_quantile(1.0 - in.alpha / 2.0));
}

/// Population variance sigma_k^2 = n_pilot * var(mu_hat) from a pilot arm.
inline double estimate_sigma_sq(const GroupSample& pilot, double tau, VarianceOptions opts = {}) {
  if (pilot.count(EventCode::Interest) + pilot.count(EventCode::Competing) < 2) {
    throw DegeneratePilotError("degenerate pilot: fewer than 2 events");
  }
  const auto est = rmtl(pilot, tau, opts);
  if (!(est.variance > 0.0)) throw DegeneratePilotError("degenerate pilot: zero variance of the RMTL estimate");
  return static_cast<double>(pilot.size()) * est.variance;
}

}  // namespace crrmtl
