#pragma once

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "crrmtl/design.hpp"
#include "crrmtl/inference.hpp"
#include "crrmtl/sim/study.hpp"

namespace crrmtl {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kToolVersion = "1.0.0";

namespace detail {
// JSON has no inf/NaN; they are written as null.
inline nlohmann::json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}
}  // namespace detail

inline nlohmann::json to_json(const RmtlEstimate& e) {
  return {{"mu", e.mu}, {"variance", e.variance}, {"se", e.se()}, {"tau", e.tau}, {"n", e.n}};
}

inline nlohmann::json to_json(const RmtldResult& r) {
  return {{"delta", r.delta},     {"variance", r.variance}, {"ci_low", r.ci_low},
          {"ci_high", r.ci_high}, {"z", r.z},               {"p", r.p},
          {"alpha", r.alpha},     {"tau", r.tau},           {"control", to_json(r.control)},
          {"treatment", to_json(r.treatment)}};
}

inline nlohmann::json to_json(const GrayResult& g) {
  return {{"statistic", g.statistic}, {"score", g.score}, {"variance", g.variance}, {"p", g.p}, {"cause", g.cause}};
}

inline nlohmann::json to_json(const DesignInput& in) {
  return {{"delta", in.delta}, {"sigma0_sq", in.sigma0_sq}, {"sigma1_sq", in.sigma1_sq},
          {"ratio", in.ratio}, {"alpha", in.alpha},         {"power", in.power}};
}

inline nlohmann::json to_json(const DesignResult& d) {
  return {{"n0", d.n0}, {"n1", d.n1}, {"total", d.total}, {"n0_real", d.n0_real}};
}

inline nlohmann::json to_json(const sim::SimulationReport& rep) {
  nlohmann::json metrics = nlohmann::json::array();
  for (const auto& m : rep.metrics) {
    metrics.push_back({{"metric", m.name}, {"value", detail::number(m.value)}, {"mc_se", detail::number(m.mc_se)}});
  }
  nlohmann::json j = {
      {"schema_version", kSchemaVersion},
      {"mode", rep.mode},
      {"scenario", std::string(1, sim::to_char(rep.spec.id))},
      {"p1", rep.spec.p1},
      {"n0", rep.spec.n0},
      {"n1", rep.spec.n1},
      {"censoring_target", rep.spec.censor_target},
      {"seed", rep.seed},
      {"rng", rep.rng},
      {"reps", rep.reps},
      {"usable", rep.usable},
      {"censor_bounds", {{"control", detail::number(rep.censor_bounds[0])},
                         {"treatment", detail::number(rep.censor_bounds[1])}}},
      {"metrics", metrics},
  };
  if (rep.true_delta) j["true_delta"] = *rep.true_delta;
  return j;
}

/// One row per metric: scenario,n0,n1,CR,metric,value,mc_se.
inline void write_report_csv(std::ostream& out, const sim::SimulationReport& rep, bool header = true) {
  const auto old_prec = out.precision(std::numeric_limits<double>::max_digits10);
  if (header) out << "scenario,n0,n1,CR,metric,value,mc_se\n";
  for (const auto& m : rep.metrics) {
    out << sim::to_char(rep.spec.id) << ',' << rep.spec.n0 << ',' << rep.spec.n1 << ',' << rep.spec.censor_target << ','
        << m.name << ',' << m.value << ',';
    if (std::isfinite(m.mc_se)) out << m.mc_se;
    out << '\n';
  }
  out.precision(old_prec);
}

}  // namespace crrmtl
