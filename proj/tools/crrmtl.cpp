// crrmtl: restricted mean time lost analysis for two-arm competing-risks data.
//
// Exit codes: 0 success, 2 input/flag errors, 3 statistical degeneracy,
// 4 censoring calibration failure, 1 anything unexpected.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "crrmtl/csv.hpp"
#include "crrmtl/design.hpp"
#include "crrmtl/estimators.hpp"
#include "crrmtl/inference.hpp"
#include "crrmtl/report.hpp"
#include "crrmtl/sim/study.hpp"
#include "manifest.hpp"

namespace {

using namespace crrmtl;
using nlohmann::json;

constexpr int kExitInput = 2;
constexpr int kExitStatistical = 3;
constexpr int kExitCalibration = 4;

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string fmt_p(double p) { return p < 0.001 ? "<0.001" : fmt(p, 3); }

std::map<std::string, std::string> collect_arguments(const CLI::App& sub) {
  std::map<std::string, std::string> out;
  for (const auto* opt : sub.get_options()) {
    if (opt->count() == 0 || opt->get_name() == "--help") continue;
    std::string joined;
    for (const auto& r : opt->results()) {
      if (!joined.empty()) joined += ' ';
      joined += r;
    }
    out[opt->get_name()] = joined;
  }
  return out;
}

// Parses "label=code,label=code".
template <class Enum>
std::map<std::string, Enum> parse_code_map(const std::string& spec, int max_code, const std::string& flag) {
  std::map<std::string, Enum> out;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.rfind('=');
    if (eq == std::string::npos) throw InputError(flag + ": expected label=code, got '" + item + "'");
    const auto code = detail::parse_int(item.substr(eq + 1));
    if (!code || *code < 0 || *code > max_code) throw InputError(flag + ": code out of range in '" + item + "'");
    out[std::string(detail::trim(item.substr(0, eq)))] = static_cast<Enum>(*code);
  }
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << text;
  if (!out) throw InputError("failed writing '" + path + "'");
}

struct ColumnFlags {
  std::string time = "time", event = "event", group = "group";
  std::string event_map, group_map;

  void add_to(CLI::App* app) {
    app->add_option("--time-col", time, "Time column name")->capture_default_str();
    app->add_option("--event-col", event, "Event column name")->capture_default_str();
    app->add_option("--group-col", group, "Group column name")->capture_default_str();
    app->add_option("--event-map", event_map, "Remap event labels, e.g. 'cens=0,relapse=1,death=2'");
    app->add_option("--group-map", group_map, "Remap group labels, e.g. 'placebo=0,drug=1'");
  }

  ColumnMap build() const {
    ColumnMap m;
    m.time = time;
    m.event = event;
    m.group = group;
    if (!event_map.empty()) m.event_codes = parse_code_map<EventCode>(event_map, 2, "--event-map");
    if (!group_map.empty()) m.group_codes = parse_code_map<Group>(group_map, 1, "--group-map");
    return m;
  }
};

GroupSample load_arm(const std::string& path, Group g, const ColumnMap& cols, cli::RunManifest& manifest) {
  const auto bytes = cli::read_file(path);
  manifest.input_digests[path] = "sha256:" + cli::sha256_hex(bytes);
  std::istringstream in(bytes);
  return ingest_group_csv(in, g, cols);
}

// ---------------------------------------------------------------- analyze

struct AnalyzeArgs {
  std::string csv;
  std::optional<double> tau;
  double alpha = 0.05;
  std::string curves, json_out, weight = "left";
  ColumnFlags columns;
};

// A file holding only one arm: RMTL for that arm, no between-group test.
int analyze_single(const std::vector<SubjectRecord>& recs, const AnalyzeArgs& a, const cli::RunManifest& manifest) {
  if (recs.size() < 2) throw SampleSizeError("need at least 2 subjects");
  const Group g = recs.front().group;
  const GroupSample sample(g, recs);
  const double tau = a.tau.value_or(sample.max_follow_up());
  VarianceOptions opts;
  opts.weight = a.weight == "right" ? SurvivalWeight::RightValue : SurvivalWeight::LeftLimit;
  const auto est = rmtl(sample, tau, opts);

  json j = {{"schema_version", kSchemaVersion},
            {"manifest", manifest.to_json()},
            {"tau_source", a.tau ? "user" : "max_follow_up"},
            {"group", to_string(g)},
            {"rmtl", to_json(est)}};
  std::string curves_csv;
  if (!a.curves.empty()) {
    std::ostringstream cs;
    write_curves(cs, make_cif_pair(sample));
    curves_csv = cs.str();
  }
  if (!a.json_out.empty()) write_text(a.json_out, j.dump(2) + "\n");
  if (!a.curves.empty()) {
    write_text(a.curves, curves_csv);
    write_text(a.curves + ".manifest.json", manifest.to_json().dump(2) + "\n");
  }

  std::cout << "tau = " << fmt(tau) << (a.tau ? " (user-specified)" : " (maximum follow-up)") << "\n";
  std::cout << "single group (" << to_string(g) << "), no between-group test\n";
  std::cout << "n = " << est.n << ", RMTL = " << fmt(est.mu) << ", SE = " << fmt(est.se()) << "\n";
  return 0;
}

int cmd_analyze(const AnalyzeArgs& a, const CLI::App& sub) {
  cli::RunManifest manifest{"analyze", collect_arguments(sub), std::nullopt, {}};
  const auto cols = a.columns.build();
  const auto bytes = cli::read_file(a.csv);
  manifest.input_digests[a.csv] = "sha256:" + cli::sha256_hex(bytes);
  std::istringstream rows_in(bytes);
  const auto recs = detail::read_rows(rows_in, cols);
  const bool one_arm = !recs.empty() && std::all_of(recs.begin(), recs.end(), [&](const SubjectRecord& r) {
    return r.group == recs.front().group;
  });
  if (one_arm) return analyze_single(recs, a, manifest);
  std::istringstream in(bytes);
  const auto data = ingest_csv(in, cols);

  const double default_tau = select_tau(data.control, data.treatment);
  const double tau = a.tau.value_or(default_tau);
  VarianceOptions opts;
  opts.weight = a.weight == "right" ? SurvivalWeight::RightValue : SurvivalWeight::LeftLimit;

  const auto result = rmtld_test(data.control, data.treatment, tau, a.alpha, opts);
  const auto gray = gray_test(data.control, data.treatment, 1);

  json j = {{"schema_version", kSchemaVersion},
            {"manifest", manifest.to_json()},
            {"tau_source", a.tau ? "user" : "min_max_follow_up"},
            {"max_follow_up", {{"control", data.control.max_follow_up()}, {"treatment", data.treatment.max_follow_up()}}},
            {"rmtld", to_json(result)},
            {"gray", to_json(gray)}};

  std::string curves_csv;
  if (!a.curves.empty()) {
    std::ostringstream cs;
    cs << "group,";
    std::ostringstream c0, c1;
    write_curves(c0, make_cif_pair(data.control));
    write_curves(c1, make_cif_pair(data.treatment));
    // Prefix each curve row with its group label.
    const auto prefix = [](const std::string& body, const char* label, bool keep_header) {
      std::istringstream in(body);
      std::string line, out;
      bool first = true;
      while (std::getline(in, line)) {
        if (first) {
          first = false;
          if (keep_header) out += line + "\n";
          continue;
        }
        out += std::string(label) + "," + line + "\n";
      }
      return out;
    };
    curves_csv = cs.str() + prefix(c0.str(), "0", true) + prefix(c1.str(), "1", false);
  }

  // All computation done; only now emit files and output.
  if (!a.json_out.empty()) write_text(a.json_out, j.dump(2) + "\n");
  if (!a.curves.empty()) {
    write_text(a.curves, curves_csv);
    write_text(a.curves + ".manifest.json", manifest.to_json().dump(2) + "\n");
  }

  const int ci = static_cast<int>(std::lround(100.0 * (1.0 - a.alpha)));
  std::cout << "tau = " << fmt(tau) << (a.tau ? " (user-specified)" : " (shortest maximum follow-up)") << "\n";
  std::cout << "group       n      RMTL      SE\n";
  for (const auto* e : {&result.control, &result.treatment}) {
    std::cout << std::left << std::setw(10) << (e == &result.control ? "control" : "treatment") << std::right
              << std::setw(5) << e->n << std::setw(10) << fmt(e->mu) << std::setw(10) << fmt(e->se()) << "\n";
  }
  std::cout << "RMTLd (treatment - control) = " << fmt(result.delta, 3) << ", " << ci << "% CI (" << fmt(result.ci_low, 3)
            << ", " << fmt(result.ci_high, 3) << ")\n";
  std::cout << "Z = " << fmt(result.z, 3) << ", p = " << fmt_p(result.p) << "\n";
  std::cout << "Gray test (cause 1): chi2 = " << fmt(gray.statistic, 3) << ", p = " << fmt_p(gray.p) << "\n";
  return 0;
}

// ---------------------------------------------------------------- samplesize

struct SampleSizeArgs {
  std::optional<double> delta, sigma0_sq, sigma1_sq, tau;
  std::string pilot0, pilot1, json_out;
  double ratio = 1.0, alpha = 0.05, power = 0.8;
  ColumnFlags columns;
};

int cmd_samplesize(const SampleSizeArgs& a, const CLI::App& sub) {
  cli::RunManifest manifest{"samplesize", collect_arguments(sub), std::nullopt, {}};
  const bool direct = a.sigma0_sq || a.sigma1_sq;
  const bool pilot = !a.pilot0.empty() || !a.pilot1.empty() || a.tau;
  if (direct == pilot) {
    throw InputError("supply either --sigma0-sq and --sigma1-sq, or --pilot0, --pilot1 and --tau");
  }

  DesignInput in;
  in.ratio = a.ratio;
  in.alpha = a.alpha;
  in.power = a.power;
  json pilot_info = nullptr;
  if (direct) {
    if (!a.sigma0_sq || !a.sigma1_sq) throw InputError("both --sigma0-sq and --sigma1-sq are required");
    if (!a.delta) throw InputError("--delta is required with direct variances");
    in.delta = *a.delta;
    in.sigma0_sq = *a.sigma0_sq;
    in.sigma1_sq = *a.sigma1_sq;
  } else {
    if (a.pilot0.empty() || a.pilot1.empty() || !a.tau) throw InputError("--pilot0, --pilot1 and --tau are all required");
    const auto cols = a.columns.build();
    const auto p0 = load_arm(a.pilot0, Group::Control, cols, manifest);
    const auto p1 = load_arm(a.pilot1, Group::Treatment, cols, manifest);
    in.sigma0_sq = estimate_sigma_sq(p0, *a.tau);
    in.sigma1_sq = estimate_sigma_sq(p1, *a.tau);
    if (a.delta) {
      in.delta = *a.delta;
    } else {
      in.delta = rmtl(p1, *a.tau).mu - rmtl(p0, *a.tau).mu;
    }
    pilot_info = {{"tau", *a.tau}, {"n0", p0.size()}, {"n1", p1.size()}, {"delta_from_pilot", !a.delta}};
  }

  const auto design = sample_size(in);
  const double achieved = power_at(in, static_cast<double>(design.n0));
  json j = {{"schema_version", kSchemaVersion},
            {"manifest", manifest.to_json()},
            {"inputs", to_json(in)},
            {"pilot", pilot_info},
            {"n0", design.n0},
            {"n1", design.n1},
            {"total", design.total},
            {"n0_real", design.n0_real},
            {"achieved_power", achieved}};
  if (!a.json_out.empty()) write_text(a.json_out, j.dump(2) + "\n");

  std::cout << "delta = " << fmt(in.delta) << ", sigma0^2 = " << fmt(in.sigma0_sq) << ", sigma1^2 = " << fmt(in.sigma1_sq)
            << ", ratio = " << fmt(in.ratio, 3) << "\n";
  std::cout << "alpha = " << fmt(in.alpha, 3) << " (two-sided), target power = " << fmt(in.power, 3) << "\n";
  std::cout << "n0 = " << design.n0 << ", n1 = " << design.n1 << ", total = " << design.total << "\n";
  std::cout << "achieved power = " << fmt(achieved) << "\n";
  return 0;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string scenario = "A", mode = "power", out;
  std::size_t n0 = 300, n1 = 300, reps = 2000, pilot_reps = 2000;
  int censoring = 0;
  std::uint64_t seed = 1;
  unsigned workers = sim::default_workers();
};

int cmd_simulate(const SimulateArgs& a, const CLI::App& sub) {
  cli::RunManifest manifest{"simulate", collect_arguments(sub), a.seed, {}};
  auto spec = sim::make_scenario(sim::parse_scenario(a.scenario), a.n0, a.n1, a.censoring);
  sim::StudyConfig cfg;
  cfg.reps = a.reps;
  cfg.seed = a.seed;
  cfg.pilot_reps = a.pilot_reps;
  cfg.workers = a.workers;

  sim::SimulationReport rep;
  if (a.mode == "estimation") {
    rep = sim::run_estimation_study(spec, cfg);
  } else if (a.mode == "power") {
    rep = sim::run_power_study(spec, cfg);
  } else {
    rep = sim::run_samplesize_validation(spec, cfg);
  }

  auto j = to_json(rep);
  j["manifest"] = manifest.to_json();
  std::ostringstream csv;
  write_report_csv(csv, rep);
  if (!a.out.empty()) {
    write_text(a.out + ".json", j.dump(2) + "\n");
    write_text(a.out + ".csv", csv.str());
    write_text(a.out + ".csv.manifest.json", manifest.to_json().dump(2) + "\n");
  }

  std::cout << "scenario " << sim::to_char(rep.spec.id) << ", (n0, n1) = (" << rep.spec.n0 << ", " << rep.spec.n1
            << "), CR " << rep.spec.censor_target << "%, mode " << rep.mode << "\n";
  std::cout << "seed " << rep.seed << ", reps " << rep.reps << " (" << rep.usable << " usable), censoring bounds ("
            << fmt(rep.censor_bounds[0]) << ", " << fmt(rep.censor_bounds[1]) << ")\n";
  std::cout << std::left << std::setw(20) << "metric" << std::right << std::setw(12) << "value" << std::setw(12)
            << "mc_se" << "\n";
  for (const auto& m : rep.metrics) {
    std::cout << std::left << std::setw(20) << m.name << std::right << std::setw(12) << fmt(m.value) << std::setw(12)
              << (std::isfinite(m.mc_se) ? fmt(m.mc_se) : std::string("-")) << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------- truth

struct TruthArgs {
  std::string scenario = "A";
  std::size_t total = 1'000'000;
  std::uint64_t seed = 1;
  double tau = 4.0;
};

int cmd_truth(const TruthArgs& a) {
  const auto spec = sim::make_scenario(sim::parse_scenario(a.scenario));
  const double analytic = sim::analytic_true_rmtld(spec, a.tau);
  const double empirical = sim::empirical_true_rmtld(spec, a.total, a.seed, a.tau);
  std::cout << "scenario " << sim::to_char(spec.id) << ", tau = " << fmt(a.tau) << "\n";
  std::cout << "analytic RMTLd  = " << fmt(analytic, 5) << "\n";
  std::cout << "empirical RMTLd = " << fmt(empirical, 5) << " (n = " << a.total << ", seed " << a.seed << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Restricted mean time lost (RMTL) analysis for competing risks"};
  app.set_version_flag("--version", std::string(crrmtl::kToolVersion));
  app.require_subcommand(1);

  AnalyzeArgs an;
  auto* analyze = app.add_subcommand("analyze", "Estimate RMTL per group, RMTLd with CI, Z test and Gray test");
  analyze->add_option("csv", an.csv, "Input CSV (time,event,group)")->required()->check(CLI::ExistingFile);
  analyze->add_option("--tau", an.tau, "Restriction time (default: shortest maximum follow-up)")
      ->check(CLI::PositiveNumber);
  analyze->add_option("--alpha", an.alpha, "Two-sided significance level")->capture_default_str()->check(CLI::Range(0.0, 1.0));
  analyze->add_option("--curves", an.curves, "Write survival/CIF curves CSV");
  analyze->add_option("--json", an.json_out, "Write machine-readable result JSON");
  analyze->add_option("--variance-weight", an.weight, "S(t) in the variance weight: left (S(t-)) or right (S(t))")
      ->capture_default_str()
      ->check(CLI::IsMember({"left", "right"}));
  an.columns.add_to(analyze);

  SampleSizeArgs ss;
  auto* samplesize = app.add_subcommand("samplesize", "RMTLd-based sample size");
  samplesize->add_option("--delta", ss.delta, "Planned RMTLd (treatment - control)");
  samplesize->add_option("--sigma0-sq", ss.sigma0_sq, "Control-arm variance n*var(mu)");
  samplesize->add_option("--sigma1-sq", ss.sigma1_sq, "Treatment-arm variance n*var(mu)");
  samplesize->add_option("--pilot0", ss.pilot0, "Control pilot CSV (time,event)")->check(CLI::ExistingFile);
  samplesize->add_option("--pilot1", ss.pilot1, "Treatment pilot CSV (time,event)")->check(CLI::ExistingFile);
  samplesize->add_option("--tau", ss.tau, "Restriction time for pilot variances")->check(CLI::PositiveNumber);
  samplesize->add_option("--ratio", ss.ratio, "Allocation ratio n1/n0")->capture_default_str()->check(CLI::PositiveNumber);
  samplesize->add_option("--alpha", ss.alpha, "Two-sided significance level")->capture_default_str();
  samplesize->add_option("--power", ss.power, "Target power")->capture_default_str();
  samplesize->add_option("--json", ss.json_out, "Write design report JSON");
  ss.columns.add_to(samplesize);

  SimulateArgs sm;
  auto* simulate = app.add_subcommand("simulate", "Run a simulation study cell");
  simulate->add_option("--scenario", sm.scenario, "Scenario A-F")->capture_default_str()->check(
      CLI::IsMember({"A", "B", "C", "D", "E", "F"}));
  simulate->add_option("--n0", sm.n0, "Control group size")->capture_default_str()->check(CLI::Range(2, 100000000));
  simulate->add_option("--n1", sm.n1, "Treatment group size")->capture_default_str()->check(CLI::Range(2, 100000000));
  simulate->add_option("--censoring", sm.censoring, "Target censoring percentage")
      ->capture_default_str()
      ->check(CLI::IsMember({0, 15, 30, 45}));
  simulate->add_option("--reps", sm.reps, "Replicates")->capture_default_str()->check(CLI::Range(100, 100000000));
  simulate->add_option("--pilot-reps", sm.pilot_reps, "Planning replicates (samplesize mode)")
      ->capture_default_str()
      ->check(CLI::Range(100, 100000000));
  simulate->add_option("--seed", sm.seed, "64-bit seed")->capture_default_str();
  simulate->add_option("--mode", sm.mode, "estimation | power | samplesize")
      ->capture_default_str()
      ->check(CLI::IsMember({"estimation", "power", "samplesize"}));
  simulate->add_option("--out", sm.out, "Output prefix: writes <out>.json and <out>.csv");
  simulate->add_option("--workers", sm.workers, "Worker threads")->capture_default_str()->check(CLI::Range(1, 1024));

  TruthArgs tr;
  auto* truth = app.add_subcommand("truth", "True RMTLd of a scenario: exact and from a large sample");
  truth->add_option("--scenario", tr.scenario, "Scenario A-F")->capture_default_str()->check(
      CLI::IsMember({"A", "B", "C", "D", "E", "F"}));
  truth->add_option("--total", tr.total, "Total sample size")->capture_default_str()->check(CLI::Range(4, 100000000));
  truth->add_option("--seed", tr.seed, "64-bit seed")->capture_default_str();
  truth->add_option("--tau", tr.tau, "Restriction time")->capture_default_str()->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (*analyze) return cmd_analyze(an, *analyze);
    if (*samplesize) return cmd_samplesize(ss, *samplesize);
    if (*simulate) return cmd_simulate(sm, *simulate);
    if (*truth) return cmd_truth(tr);
  } catch (const crrmtl::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const crrmtl::StatisticalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitStatistical;
  } catch (const crrmtl::CalibrationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCalibration;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
