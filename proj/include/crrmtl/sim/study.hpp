#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "crrmtl/data.hpp"
#include "crrmtl/design.hpp"
#include "crrmtl/errors.hpp"
#include "crrmtl/inference.hpp"
#include "crrmtl/numeric.hpp"
#include "crrmtl/sim/censoring.hpp"
#include "crrmtl/sim/parallel.hpp"
#include "crrmtl/sim/rng.hpp"
#include "crrmtl/sim/scenario.hpp"

namespace crrmtl::sim {

struct StudyConfig {
  std::size_t reps = 2000;
  std::uint64_t seed = 1;
  double alpha = 0.05;
  double fixed_tau = 4.0;         // estimation studies
  std::size_t pilot_reps = 2000;  // sample-size validation: replicates averaged for (delta, sigma^2)
  double target_power = 0.8;
  unsigned workers = default_workers();
};

struct ReplicateOutcome {
  RmtldResult rmtld;
  std::optional<GrayResult> gray;
  double tau_used = 0.0;
  bool usable = false;
};

struct Metric {
  std::string name;
  double value = 0.0;
  double mc_se = std::numeric_limits<double>::quiet_NaN();
};

struct SimulationReport {
  std::string mode;
  ScenarioSpec spec;
  std::uint64_t seed = 0;
  std::size_t reps = 0;
  std::size_t usable = 0;
  std::array<double, 2> censor_bounds{};
  std::string rng = kRngName;
  std::optional<double> true_delta;
  std::vector<Metric> metrics;

  const Metric* find(const std::string& name) const {
    for (const auto& m : metrics) {
      if (m.name == name) return &m;
    }
    return nullptr;
  }
  double value(const std::string& name) const {
    const auto* m = find(name);
    if (!m) throw std::out_of_range("report has no metric '" + name + "'");
    return m->value;
  }
  double mc_se(const std::string& name) const {
    const auto* m = find(name);
    if (!m) throw std::out_of_range("report has no metric '" + name + "'");
    return m->mc_se;
  }
};

namespace detail {

struct Moments {
  double mean = 0.0;
  double sd = 0.0;  // denominator R - 1
};

inline Moments moments(const std::vector<double>& x) {
  Moments m;
  if (x.empty()) return m;
  CompensatedSum s;
  for (const double v : x) s += v;
  m.mean = s.value() / static_cast<double>(x.size());
  if (x.size() > 1) {
    CompensatedSum ss;
    for (const double v : x) ss += (v - m.mean) * (v - m.mean);
    m.sd = std::sqrt(ss.value() / static_cast<double>(x.size() - 1));
  }
  return m;
}

inline double proportion_se(double p, std::size_t n) {
  return std::sqrt(std::max(0.0, p * (1.0 - p)) / static_cast<double>(n));
}

inline std::array<double, 2> bounds_for(const ScenarioSpec& spec) {
  return {cached_censoring_bound(spec, spec.censor_target, Group::Control),
          cached_censoring_bound(spec, spec.censor_target, Group::Treatment)};
}

inline std::pair<GroupSample, GroupSample> draw_pair(const ScenarioSpec& spec, const std::array<double, 2>& bounds,
                                                     std::size_t n0, std::size_t n1, Rng& rng) {
  auto g0 = generate_group(spec, Group::Control, n0, bounds[0], rng);
  auto g1 = generate_group(spec, Group::Treatment, n1, bounds[1], rng);
  return {std::move(g0), std::move(g1)};
}

inline void check_usable(std::size_t usable, std::size_t reps, const std::string& what) {
  if (2 * usable < reps) {
    throw StatisticalError(what + ": " + std::to_string(reps - usable) + " of " + std::to_string(reps) +
                           " replicates unusable (more than half); follow-up too short for the requested tau");
  }
}

inline void check_reps(std::size_t reps) {
  if (reps < 100) throw InputError("at least 100 replicates required");
}

}  // namespace detail

/// RMTLd at a common tau computed from a large uncensored sample (n0 = n1 = total / 2).
inline double empirical_true_rmtld(const ScenarioSpec& spec, std::size_t total = 1'000'000, std::uint64_t seed = 1,
                                   double tau = 4.0) {
  Rng rng(seed, Stream::Truth, static_cast<std::uint64_t>(spec.id));
  const double inf = std::numeric_limits<double>::infinity();
  const auto g0 = generate_group(spec, Group::Control, total / 2, inf, rng);
  const auto g1 = generate_group(spec, Group::Treatment, total / 2, inf, rng);
  const auto c0 = make_cif_pair(g0);
  const auto c1 = make_cif_pair(g1);
  return c1.cif1.integral(tau) - c0.cif1.integral(tau);
}

/// Runs one replicate of a study: draws both arms from the replicate's own substream.
inline ReplicateOutcome run_replicate(const ScenarioSpec& spec, const std::array<double, 2>& bounds, std::size_t n0,
                                      std::size_t n1, std::uint64_t seed, Stream stream, std::size_t index,
                                      std::optional<double> fixed_tau, double alpha, bool with_gray) {
  Rng rng(seed, stream, index);
  const auto [g0, g1] = detail::draw_pair(spec, bounds, n0, n1, rng);
  ReplicateOutcome out;
  const double tau = fixed_tau ? *fixed_tau : select_tau(g0, g1);
  out.tau_used = tau;
  if (fixed_tau && (g0.max_follow_up() < tau || g1.max_follow_up() < tau)) return out;
  try {
    out.rmtld = rmtld_test(g0, g1, tau, alpha);
    if (with_gray) out.gray = gray_test(g0, g1, 1);
    out.usable = true;
  } catch (const StatisticalError&) {
    out.usable = false;
  }
  return out;
}

/// Bias, relative bias, RMSE, relative SE and CI coverage of the RMTLd at a fixed tau.
inline SimulationReport run_estimation_study(const ScenarioSpec& spec, const StudyConfig& cfg) {
  spec.validate();
  detail::check_reps(cfg.reps);
  SimulationReport rep;
  rep.mode = "estimation";
  rep.spec = spec;
  rep.seed = cfg.seed;
  rep.reps = cfg.reps;
  rep.censor_bounds = detail::bounds_for(spec);
  const double truth = analytic_true_rmtld(spec, cfg.fixed_tau);
  rep.true_delta = truth;

  std::vector<ReplicateOutcome> outcomes(cfg.reps);
  parallel_for(
      cfg.reps,
      [&](std::size_t r) {
        outcomes[r] = run_replicate(spec, rep.censor_bounds, spec.n0, spec.n1, cfg.seed, Stream::Replicate, r,
                                    cfg.fixed_tau, cfg.alpha, false);
      },
      cfg.workers);

  std::vector<double> est, se, sq_err;
  std::size_t covered = 0;
  for (const auto& o : outcomes) {
    if (!o.usable) continue;
    est.push_back(o.rmtld.delta);
    se.push_back(std::sqrt(o.rmtld.variance));
    sq_err.push_back((o.rmtld.delta - truth) * (o.rmtld.delta - truth));
    if (o.rmtld.ci_low <= truth && truth <= o.rmtld.ci_high) ++covered;
  }
  rep.usable = est.size();
  detail::check_usable(rep.usable, cfg.reps, "estimation study");

  const auto n = static_cast<double>(rep.usable);
  const auto m_est = detail::moments(est);
  const auto m_se = detail::moments(se);
  const auto m_sq = detail::moments(sq_err);
  const double bias = m_est.mean - truth;
  const double bias_se = m_est.sd / std::sqrt(n);
  const double rmse = std::sqrt(m_sq.mean);
  const double rel_se = m_se.mean / m_est.sd;
  const double rel_se_mcse =
      rel_se * std::sqrt(1.0 / (2.0 * (n - 1.0)) + (m_se.sd * m_se.sd) / (n * m_se.mean * m_se.mean));
  const double coverage = static_cast<double>(covered) / n;

  rep.metrics.push_back({"true_delta", truth, 0.0});
  rep.metrics.push_back({"mean_delta", m_est.mean, bias_se});
  rep.metrics.push_back({"bias", bias, bias_se});
  // Relative bias is meaningless when the true difference is ~0 (scenario A); only bias is reported then.
  if (std::fabs(truth) > 1e-3) rep.metrics.push_back({"rel_bias", bias / truth, bias_se / std::fabs(truth)});
  rep.metrics.push_back({"rmse", rmse, m_sq.sd / (2.0 * rmse * std::sqrt(n))});
  rep.metrics.push_back({"empirical_sd", m_est.sd, m_est.sd / std::sqrt(2.0 * (n - 1.0))});
  rep.metrics.push_back({"mean_model_se", m_se.mean, m_se.sd / std::sqrt(n)});
  rep.metrics.push_back({"rel_se", rel_se, rel_se_mcse});
  rep.metrics.push_back({"coverage", coverage, detail::proportion_se(coverage, rep.usable)});
  rep.metrics.push_back({"unusable_fraction", 1.0 - n / static_cast<double>(cfg.reps),
                         detail::proportion_se(1.0 - n / static_cast<double>(cfg.reps), cfg.reps)});
  return rep;
}

/// Rejection rates of the RMTLd and Gray tests with the data-driven tau.
inline SimulationReport run_power_study(const ScenarioSpec& spec, const StudyConfig& cfg) {
  spec.validate();
  detail::check_reps(cfg.reps);
  SimulationReport rep;
  rep.mode = "power";
  rep.spec = spec;
  rep.seed = cfg.seed;
  rep.reps = cfg.reps;
  rep.censor_bounds = detail::bounds_for(spec);

  std::vector<ReplicateOutcome> outcomes(cfg.reps);
  parallel_for(
      cfg.reps,
      [&](std::size_t r) {
        outcomes[r] = run_replicate(spec, rep.censor_bounds, spec.n0, spec.n1, cfg.seed, Stream::Replicate, r,
                                    std::nullopt, cfg.alpha, true);
      },
      cfg.workers);

  std::size_t rej_rmtld = 0, rej_gray = 0;
  std::vector<double> taus;
  for (const auto& o : outcomes) {
    if (!o.usable) continue;
    ++rep.usable;
    taus.push_back(o.tau_used);
    if (o.rmtld.p < cfg.alpha) ++rej_rmtld;
    if (o.gray && o.gray->p < cfg.alpha) ++rej_gray;
  }
  detail::check_usable(rep.usable, cfg.reps, "power study");
  const auto n = static_cast<double>(rep.usable);
  const double r1 = static_cast<double>(rej_rmtld) / n;
  const double r2 = static_cast<double>(rej_gray) / n;
  const auto mt = detail::moments(taus);
  rep.metrics.push_back({"rmtld_rejection", r1, detail::proportion_se(r1, rep.usable)});
  rep.metrics.push_back({"gray_rejection", r2, detail::proportion_se(r2, rep.usable)});
  rep.metrics.push_back({"mean_tau", mt.mean, mt.sd / std::sqrt(n)});
  return rep;
}

/// Planning parameters obtained by averaging over simulated trials of a given size.
struct PlanningParameters {
  double delta = 0.0;
  double sigma0_sq = 0.0;
  double sigma1_sq = 0.0;
  double mean_tau = 0.0;
  double delta_se = 0.0;
};

inline PlanningParameters average_planning_parameters(const ScenarioSpec& spec, const std::array<double, 2>& bounds,
                                                      std::size_t n0, std::size_t n1, const StudyConfig& cfg,
                                                      std::uint64_t round) {
  std::vector<ReplicateOutcome> outcomes(cfg.pilot_reps);
  parallel_for(
      cfg.pilot_reps,
      [&](std::size_t r) {
        outcomes[r] = run_replicate(spec, bounds, n0, n1, cfg.seed, Stream::Pilot, round * 1'000'000'007ULL + r,
                                    std::nullopt, cfg.alpha, false);
      },
      cfg.workers);
  std::vector<double> d, s0, s1, tau;
  for (const auto& o : outcomes) {
    if (!o.usable) continue;
    d.push_back(o.rmtld.delta);
    s0.push_back(static_cast<double>(n0) * o.rmtld.control.variance);
    s1.push_back(static_cast<double>(n1) * o.rmtld.treatment.variance);
    tau.push_back(o.tau_used);
  }
  detail::check_usable(d.size(), cfg.pilot_reps, "planning simulation");
  const auto md = detail::moments(d);
  return {md.mean, detail::moments(s0).mean, detail::moments(s1).mean, detail::moments(tau).mean,
          md.sd / std::sqrt(static_cast<double>(d.size()))};
}

/// RMTLd-based sample size for the scenario, then observed power of both tests at that size.
///
/// Delta and sigma_k^2 are averaged over `pilot_reps` simulated trials with the
/// data-driven tau. Because that tau depends on the trial size, the planning
/// step is iterated (at most 6 rounds) until the computed n0 is stable to 2%.
inline SimulationReport run_samplesize_validation(const ScenarioSpec& spec, const StudyConfig& cfg) {
  spec.validate();
  if (spec.id == ScenarioId::A) throw InputError("sample-size validation needs a scenario with a true difference (B-F)");
  detail::check_reps(cfg.reps);
  detail::check_reps(cfg.pilot_reps);
  const double ratio = static_cast<double>(spec.n1) / static_cast<double>(spec.n0);
  const auto bounds = detail::bounds_for(spec);

  std::size_t n0 = spec.n0;
  PlanningParameters plan;
  DesignResult design;
  for (std::uint64_t round = 0; round < 6; ++round) {
    const auto n1 = static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(n0) - 1e-9));
    plan = average_planning_parameters(spec, bounds, n0, n1, cfg, round);
    DesignInput in{plan.delta, plan.sigma0_sq, plan.sigma1_sq, ratio, cfg.alpha, cfg.target_power};
    design = sample_size(in);
    const auto next = static_cast<std::size_t>(design.n0);
    const bool stable = std::fabs(static_cast<double>(next) - static_cast<double>(n0)) <=
                        std::max(1.0, 0.02 * static_cast<double>(n0));
    n0 = next;
    if (stable) break;
  }

  auto sized = spec;
  sized.n0 = static_cast<std::size_t>(design.n0);
  sized.n1 = static_cast<std::size_t>(design.n1);
  auto power = run_power_study(sized, cfg);

  SimulationReport rep;
  rep.mode = "samplesize";
  rep.spec = sized;
  rep.seed = cfg.seed;
  rep.reps = cfg.reps;
  rep.usable = power.usable;
  rep.censor_bounds = bounds;
  const DesignInput in{plan.delta, plan.sigma0_sq, plan.sigma1_sq, ratio, cfg.alpha, cfg.target_power};
  rep.metrics.push_back({"planning_delta", plan.delta, plan.delta_se});
  rep.metrics.push_back({"sigma0_sq", plan.sigma0_sq});
  rep.metrics.push_back({"sigma1_sq", plan.sigma1_sq});
  rep.metrics.push_back({"planning_mean_tau", plan.mean_tau});
  rep.metrics.push_back({"N", static_cast<double>(design.total)});
  rep.metrics.push_back({"n0", static_cast<double>(design.n0)});
  rep.metrics.push_back({"n1", static_cast<double>(design.n1)});
  rep.metrics.push_back({"formula_power", power_at(in, static_cast<double>(design.n0))});
  rep.metrics.push_back(*power.find("rmtld_rejection"));
  rep.metrics.back().name = "rmtld_power";
  rep.metrics.push_back(*power.find("gray_rejection"));
  rep.metrics.back().name = "gray_power";
  rep.metrics.push_back(*power.find("mean_tau"));
  return rep;
}

}  // namespace crrmtl::sim
