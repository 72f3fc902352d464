// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any gated criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "crrmtl/estimators.hpp"
#include "crrmtl/inference.hpp"
#include "crrmtl/sim/study.hpp"

using namespace crrmtl;
using namespace crrmtl::sim;

namespace {

constexpr std::uint64_t kSeed = 7;
constexpr double kInf = std::numeric_limits<double>::infinity();

int failures = 0;

void report(int id, bool pass, const std::string& what, const std::string& detail, double seconds) {
  if (!pass) ++failures;
  std::printf("criterion %2d %s  %s: %s [%.1fs]\n", id, pass ? "PASS" : "FAIL", what.c_str(), detail.c_str(), seconds);
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

GroupSample random_sample(std::mt19937_64& gen, std::size_t n, bool censored) {
  std::uniform_real_distribution<double> time(0.01, 10.0);
  std::uniform_int_distribution<int> cause(censored ? 0 : 1, 2);
  std::bernoulli_distribution tie(0.25);
  std::vector<SubjectRecord> recs;
  for (std::size_t i = 0; i < n; ++i) {
    double t = time(gen);
    if (tie(gen)) t = std::ceil(t);
    recs.push_back({t, static_cast<EventCode>(cause(gen)), Group::Control});
  }
  return GroupSample(Group::Control, std::move(recs));
}

void exact_oracle() {
  Timer timer;
  std::mt19937_64 gen(kSeed);
  double worst_unc = 0.0, worst_cens = 0.0;
  for (int k = 0; k < 500; ++k) {
    const auto s = random_sample(gen, 1 + gen() % 50, false);
    const double tau = s.max_follow_up() * std::uniform_real_distribution<double>(0.05, 1.0)(gen);
    double oracle = 0.0;
    for (const auto& r : s.records()) {
      if (r.event == EventCode::Interest && r.time <= tau) oracle += tau - r.time;
    }
    oracle /= static_cast<double>(s.size());
    worst_unc = std::max(worst_unc, std::fabs(rmtl(s, tau).mu - oracle));
  }
  for (int k = 0; k < 500; ++k) {
    const auto s = random_sample(gen, 1 + gen() % 20, true);
    const auto p = make_cif_pair(s);
    const double tau = s.max_follow_up() * std::uniform_real_distribution<double>(0.05, 1.0)(gen);
    double jumps = 0.0, prev = 0.0;
    for (std::size_t i = 0; i < p.table.size() && p.table.times[i] <= tau; ++i) {
      jumps += (p.cif1.values()[i] - prev) * (tau - p.table.times[i]);
      prev = p.cif1.values()[i];
    }
    worst_cens = std::max(worst_cens, std::fabs(p.cif1.integral(tau) - jumps));
  }
  report(1, worst_unc <= 1e-12 && worst_cens <= 1e-12, "exact-oracle equivalence",
         fmt("max |RMTL - uncensored oracle| = %.2e, max |step - jump form| = %.2e (gate 1e-12)", worst_unc, worst_cens),
         timer.seconds());
}

void conservation() {
  Timer timer;
  std::mt19937_64 gen(kSeed + 1);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const auto s = random_sample(gen, 1 + gen() % 60, k % 2 == 0);
    const auto p = make_cif_pair(s);
    const double tau = s.max_follow_up() * std::uniform_real_distribution<double>(0.05, 1.0)(gen);
    const double total = p.survival.integral(tau) + p.cif1.integral(tau) + p.cif2.integral(tau);
    worst = std::max(worst, std::fabs(total - tau));
  }
  report(2, worst <= 1e-10, "conservation RMST + RMTL1 + RMTL2 = tau",
         fmt("max deviation %.2e over 1000 fuzzed samples (gate 1e-10)", worst), timer.seconds());
}

StudyConfig config() {
  StudyConfig cfg;
  cfg.reps = 2000;
  cfg.seed = kSeed;
  return cfg;
}

void null_calibration() {
  Timer timer;
  const auto rep = run_power_study(make_scenario(ScenarioId::A, 300, 300, 0), config());
  const double r = rep.value("rmtld_rejection");
  report(3, r >= 0.040 && r <= 0.062, "null calibration, scenario A (300,300) CR 0%",
         fmt("RMTLd rejection %.4f, Gray %.4f (gate [0.040, 0.062])", r, rep.value("gray_rejection")), timer.seconds());
}

void power_psdh() {
  Timer timer;
  const auto rep = run_power_study(make_scenario(ScenarioId::C, 300, 300, 0), config());
  const double r = rep.value("rmtld_rejection");
  report(4, r >= 0.945 && r <= 0.975, "power, scenario C (300,300) CR 0%",
         fmt("RMTLd power %.4f, Gray %.4f (gate [0.945, 0.975])", r, rep.value("gray_rejection")), timer.seconds());
}

void power_gap() {
  Timer timer;
  const auto rep = run_power_study(make_scenario(ScenarioId::D, 500, 500, 0), config());
  const double r = rep.value("rmtld_rejection");
  const double g = rep.value("gray_rejection");
  report(5, r - g > 0.35, "power gap, scenario D (500,500) CR 0%",
         fmt("RMTLd %.4f - Gray %.4f = %.4f (gate > 0.35)", r, g, r - g), timer.seconds());
}

void estimation_quality() {
  Timer timer;
  const auto rep = run_estimation_study(make_scenario(ScenarioId::B, 500, 500, 15), config());
  const double rb = rep.value("rel_bias");
  const double rs = rep.value("rel_se");
  const double cov = rep.value("coverage");
  const bool pass = std::fabs(rb) < 0.015 && rs >= 0.95 && rs <= 1.05 && cov >= 0.94 && cov <= 0.96;
  report(6, pass, "estimation, scenario B (500,500) CR 15% tau 4",
         fmt("rel bias %.4f (MC SE %.4f), rel SE %.4f, coverage %.4f (gates |.|<0.015, [0.95,1.05], [0.94,0.96])", rb,
             rep.mc_se("rel_bias"), rs, cov),
         timer.seconds());
}

void true_values() {
  Timer timer;
  const std::vector<std::pair<ScenarioId, double>> published = {
      {ScenarioId::A, 0.00004}, {ScenarioId::B, -0.3935}, {ScenarioId::C, -0.5141},
      {ScenarioId::D, -0.2986}, {ScenarioId::E, -0.3517}, {ScenarioId::F, -0.1729}};
  bool pass = true;
  std::string detail;
  for (const auto& [id, target] : published) {
    const double v = empirical_true_rmtld(make_scenario(id), 1'000'000, kSeed);
    const bool ok = std::fabs(v - target) <= 0.01;
    pass = pass && ok;
    detail += std::string(1, to_char(id)) + fmt(" %.4f vs %.4f ", v, target) + (ok ? "ok" : "off") + "; ";
  }
  report(7, pass, "true RMTLd from 10^6-sample evaluation (gate +-0.01)", detail, timer.seconds());
}

void sample_size_inversion() {
  Timer timer;
  const auto rep = run_samplesize_validation(make_scenario(ScenarioId::C, 300, 300, 0), config());
  const double n = rep.value("N");
  const double pw = rep.value("rmtld_power");
  const bool pass = std::fabs(n - 370.0) <= 0.15 * 370.0 && pw >= 0.76 && pw <= 0.88;
  report(8, pass, "sample-size inversion, scenario C CR 0%",
         fmt("N = %.0f (gate 370 +-15%%), simulated RMTLd power %.4f (gate [0.76, 0.88]), Gray %.4f", n, pw,
             rep.value("gray_power")),
         timer.seconds());
}

void variance_validity() {
  Timer timer;
  const auto spec = make_scenario(ScenarioId::A);
  double worst = 0.0;
  for (std::uint64_t k = 0; k < 20; ++k) {
    Rng rng(kSeed, Stream::Bootstrap, k);
    const auto s = generate_group(spec, Group::Control, 200, kInf, rng);
    const double tau = std::min(4.0, s.max_follow_up());
    const double analytic = rmtl(s, tau).variance;
    std::vector<double> mus(5000);
    for (auto& m : mus) {
      std::vector<SubjectRecord> recs(s.size());
      for (auto& r : recs) r = s.records()[rng.below(s.size())];
      m = make_cif_pair(GroupSample(Group::Control, std::move(recs))).cif1.integral(tau);
    }
    double mean = 0.0;
    for (const double m : mus) mean += m;
    mean /= static_cast<double>(mus.size());
    double var = 0.0;
    for (const double m : mus) var += (m - mean) * (m - mean);
    var /= static_cast<double>(mus.size() - 1);
    worst = std::max(worst, std::fabs(analytic / var - 1.0));
  }
  report(9, worst <= 0.15, "analytic vs bootstrap variance, 20 samples n=200",
         fmt("max |analytic/bootstrap - 1| = %.4f (gate 0.15)", worst), timer.seconds());
}

}  // namespace

int main() {
  std::printf("acceptance run, seed %llu, %u worker(s)\n", static_cast<unsigned long long>(kSeed), default_workers());
  exact_oracle();
  conservation();
  null_calibration();
  power_psdh();
  power_gap();
  estimation_quality();
  true_values();
  sample_size_inversion();
  variance_validity();
  std::printf("criterion 10 N/A   worked examples on external registry/trial data: not gated, needs user-supplied extracts\n");
  std::printf("%d of 9 gated criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
