#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "crrmtl/data.hpp"
#include "crrmtl/errors.hpp"
#include "crrmtl/estimators.hpp"
#include "crrmtl/numeric.hpp"

namespace crrmtl {

/// How S(t) is read in the Y(t)/S(t) weight of the variance at an event time.
enum class SurvivalWeight {
  LeftLimit,  // S(t-): finite whenever anyone is at risk
  RightValue  // S(t): singular when the last subjects fail at t
};

struct VarianceOptions {
  SurvivalWeight weight = SurvivalWeight::LeftLimit;
};

struct RmtlVariance {
  double value = 0.0;
  // Set when a term had S = 0 under the RightValue convention and was dropped.
  bool skipped_singular = false;
};

/// Martingale variance of the RMTL estimate for cause 1 over [0, tau].
///
/// Sum over event times t <= tau of
///   {[(tau-t)(1-F2(t)) - int_t^tau F1] / Y}^2 * (Y/S) * dF1(t)
/// + {[(tau-t) F1(t)    - int_t^tau F1] / Y}^2 * (Y/S) * dF2(t),
/// with dFj(t) = d_j/Y * S(t-) and tail integrals taken exactly from the step function.
inline RmtlVariance variance_rmtl(const CifPair& pair, double tau, VarianceOptions opts = {}) {
  if (!(tau > 0.0)) throw DomainError("tau must be positive");
  const auto& tab = pair.table;
  const double area_tau = tab.empty() ? 0.0 : pair.cif1.integral(tau);

  RmtlVariance out;
  CompensatedSum term1, term2;
  double s_left = 1.0;
  double tail_start = 0.0;  // running int_0^{t_i} F1
  double prev_t = 0.0;
  double f1_prev = pair.cif1.initial();
  for (std::size_t i = 0; i < tab.size() && tab.times[i] <= tau; ++i) {
    const double t = tab.times[i];
    tail_start += f1_prev * (t - prev_t);
    prev_t = t;

    const double y = static_cast<double>(tab.at_risk[i]);
    const double f1 = pair.cif1.values()[i];
    const double f2 = pair.cif2.values()[i];
    const double s_right = pair.survival.values()[i];
    const double tail = area_tau - tail_start;

    const double s_weight = opts.weight == SurvivalWeight::LeftLimit ? s_left : s_right;
    const double df1 = static_cast<double>(tab.d1[i]) / y * s_left;
    const double df2 = static_cast<double>(tab.d2[i]) / y * s_left;

    if (s_weight > 0.0) {
      const double w = y / s_weight;
      const double g1 = ((tau - t) * (1.0 - f2) - tail) / y;
      const double g2 = ((tau - t) * f1 - tail) / y;
      term1 += g1 * g1 * w * df1;
      term2 += g2 * g2 * w * df2;
    } else if (df1 > 0.0 || df2 > 0.0) {
      out.skipped_singular = true;
    }

    s_left = s_right;
    f1_prev = f1;
  }
  out.value = std::max(0.0, term1.value() + term2.value());
  return out;
}

struct RmtlEstimate {
  double mu = 0.0;
  double variance = 0.0;
  double tau = 0.0;
  std::size_t n = 0;
  bool variance_skipped_singular = false;

  double se() const { return std::sqrt(variance); }
};

/// Restricted mean time lost to cause 1 over [0, tau].
inline RmtlEstimate rmtl(const GroupSample& sample, double tau, VarianceOptions opts = {}) {
  if (!(tau > 0.0)) throw DomainError("tau must be positive");
  if (tau > sample.max_follow_up()) {
    throw ExtrapolationError("tau " + std::to_string(tau) + " exceeds the maximum follow-up " +
                             std::to_string(sample.max_follow_up()) + " of the " + to_string(sample.group()) +
                             " group");
  }
  const auto pair = make_cif_pair(sample);
  const auto var = variance_rmtl(pair, tau, opts);
  RmtlEstimate est;
  est.mu = std::clamp(pair.cif1.integral(tau), 0.0, tau);
  est.variance = var.value;
  est.variance_skipped_singular = var.skipped_singular;
  est.tau = tau;
  est.n = sample.size();
  return est;
}

struct RmtldResult {
  double delta = 0.0;  // treatment minus control
  double variance = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double z = 0.0;
  double p = 1.0;
  double alpha = 0.05;
  double tau = 0.0;
  RmtlEstimate control;
  RmtlEstimate treatment;
};

/// Two-sided Wald test of equal RMTL with a 100(1-alpha)% confidence interval.
inline RmtldResult rmtld_test(const GroupSample& control, const GroupSample& treatment, double tau,
                              double alpha = 0.05, VarianceOptions opts = {}) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
  if (control.size() < 2 || treatment.size() < 2) throw SampleSizeError("each group needs at least 2 subjects");
  if (!(tau > 0.0)) throw DomainError("tau must be positive");
  if (tau > select_tau(control, treatment)) {
    throw ExtrapolationError("tau " + std::to_string(tau) + " exceeds the shorter maximum follow-up " +
                             std::to_string(select_tau(control, treatment)));
  }

  RmtldResult r;
  r.control = rmtl(control, tau, opts);
  r.treatment = rmtl(treatment, tau, opts);
  r.delta = r.treatment.mu - r.control.mu;
  r.variance = r.treatment.variance + r.control.variance;
  if (!(r.variance > 0.0)) {
    throw UndefinedTestError("RMTLd test undefined: zero variance (no events before tau in either group)");
  }
  const double se = std::sqrt(r.variance);
  const double q = normal_quantile(1.0 - alpha / 2.0);
  r.z = r.delta / se;
  r.p = std::min(1.0, 2.0 * normal_sf(std::fabs(r.z)));
  r.ci_low = r.delta - q * se;
  r.ci_high = r.delta + q * se;
  r.alpha = alpha;
  r.tau = tau;
  return r;
}

struct GrayResult {
  double statistic = 0.0;  // chi-square, 1 df
  double score = 0.0;      // treatment observed minus expected
  double variance = 0.0;
  double p = 1.0;
  int cause = 1;
};

/// Gray's two-sample test of equal cumulative incidence (rho = 0).
///
/// Score for the treatment arm: sum over times of d_1k - R_k * d_1. / R., with
/// the subdistribution risk set R_k(t) = Y_k(t) (1 - F_k(t-)) / S_k(t-).
/// Its variance is the plug-in martingale variance sum_r int a_r^2 dN_cause,r
/// + b_r^2 dN_other,r, obtained by expanding each arm's cumulative incidence
/// around its Aalen-Johansen martingale representation.
inline GrayResult gray_test(const GroupSample& control, const GroupSample& treatment, int cause = 1) {
  if (cause != 1 && cause != 2) throw DomainError("cause must be 1 or 2");

  struct Row {
    double t;
    std::array<double, 2> y, d, dother, s_left, f_left, g_left;  // g = other-cause CIF
    std::array<double, 2> r;
  };

  const std::array<EventTable, 2> tabs{build_event_table(control), build_event_table(treatment)};
  const EventCode ev = cause == 1 ? EventCode::Interest : EventCode::Competing;
  if (control.count(ev) + treatment.count(ev) == 0) {
    throw UndefinedTestError("Gray test undefined: no events of cause " + std::to_string(cause));
  }

  // Merge the two event tables on the union of event times.
  std::vector<Row> rows;
  std::array<std::size_t, 2> pos{0, 0};
  std::array<double, 2> s{1.0, 1.0}, f{0.0, 0.0}, g{0.0, 0.0};
  const std::array<const GroupSample*, 2> samples{&control, &treatment};
  // Risk sets between table rows: count of records with time >= t.
  std::array<std::vector<double>, 2> sorted_times;
  for (int k = 0; k < 2; ++k) {
    for (const auto& rec : samples[k]->records()) sorted_times[k].push_back(rec.time);
    std::sort(sorted_times[k].begin(), sorted_times[k].end());
  }
  const auto at_risk = [&](int k, double t) {
    const auto& v = sorted_times[k];
    return static_cast<double>(v.end() - std::lower_bound(v.begin(), v.end(), t));
  };

  while (pos[0] < tabs[0].size() || pos[1] < tabs[1].size()) {
    double t = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 2; ++k) {
      if (pos[k] < tabs[k].size()) t = std::min(t, tabs[k].times[pos[k]]);
    }
    Row row{};
    row.t = t;
    for (int k = 0; k < 2; ++k) {
      double d1 = 0.0, d2 = 0.0;
      if (pos[k] < tabs[k].size() && tabs[k].times[pos[k]] == t) {
        d1 = static_cast<double>(tabs[k].d1[pos[k]]);
        d2 = static_cast<double>(tabs[k].d2[pos[k]]);
        ++pos[k];
      }
      const double y = at_risk(k, t);
      row.y[k] = y;
      row.d[k] = cause == 1 ? d1 : d2;
      row.dother[k] = cause == 1 ? d2 : d1;
      row.s_left[k] = s[k];
      row.f_left[k] = f[k];
      row.g_left[k] = g[k];
      row.r[k] = (y > 0.0 && s[k] > 0.0) ? y * (1.0 - f[k]) / s[k] : 0.0;
      if (y > 0.0) {
        f[k] += row.d[k] / y * s[k];
        g[k] += row.dother[k] / y * s[k];
        s[k] *= 1.0 - (d1 + d2) / y;
      }
    }
    rows.push_back(row);
  }

  CompensatedSum score;
  for (const auto& row : rows) {
    const double rtot = row.r[0] + row.r[1];
    if (rtot <= 0.0) continue;
    score += row.d[1] - row.r[1] * (row.d[0] + row.d[1]) / rtot;
  }

  // Backward pass: D_r(u) = sum_{t > u} (delta_1r - R_1/R.) * Y_r/S_r(t-) * dN./R.
  std::array<double, 2> tail{0.0, 0.0};
  CompensatedSum var;
  for (std::size_t i = rows.size(); i-- > 0;) {
    const auto& row = rows[i];
    const double rtot = row.r[0] + row.r[1];
    const double share = rtot > 0.0 ? row.r[1] / rtot : 0.0;
    for (int k = 0; k < 2; ++k) {
      if (row.y[k] <= 0.0) continue;
      const double coef = (k == 1 ? 1.0 : 0.0) - share;
      const double a = coef - row.g_left[k] * tail[k] / row.y[k];
      const double b = -(1.0 - row.f_left[k]) * tail[k] / row.y[k];
      var += a * a * row.d[k] + b * b * row.dother[k];
    }
    if (rtot > 0.0) {
      const double dtot = row.d[0] + row.d[1];
      for (int k = 0; k < 2; ++k) {
        if (row.y[k] <= 0.0 || row.s_left[k] <= 0.0) continue;
        const double coef = (k == 1 ? 1.0 : 0.0) - share;
        tail[k] += coef * row.y[k] / row.s_left[k] * dtot / rtot;
      }
    }
  }

  GrayResult out;
  out.cause = cause;
  out.score = score.value();
  out.variance = var.value();
  if (!(out.variance > 0.0)) throw UndefinedTestError("Gray test undefined: zero score variance");
  out.statistic = out.score * out.score / out.variance;
  out.p = chisq1_sf(out.statistic);
  return out;
}

}  // namespace crrmtl
