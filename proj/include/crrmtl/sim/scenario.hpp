#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "crrmtl/data.hpp"
#include "crrmtl/errors.hpp"
#include "crrmtl/sim/rng.hpp"

namespace crrmtl::sim {

enum class ScenarioId { A, B, C, D, E, F };

inline char to_char(ScenarioId id) { return static_cast<char>('A' + static_cast<int>(id)); }

inline ScenarioId parse_scenario(const std::string& s) {
  if (s.size() == 1 && s[0] >= 'A' && s[0] <= 'F') return static_cast<ScenarioId>(s[0] - 'A');
  if (s.size() == 1 && s[0] >= 'a' && s[0] <= 'f') return static_cast<ScenarioId>(s[0] - 'a');
  throw InputError("unknown scenario '" + s + "' (expected A-F)");
}

/// One Weibull piece with cumulative hazard (t/scale)^shape, active on (start, end].
struct WeibullPiece {
  double shape = 1.0;
  double scale = 1.0;
  double end = std::numeric_limits<double>::infinity();
};

/// Conditional law of the latent failure time given the event type.
///
/// Piecewise Weibull pieces are spliced on the cumulative-hazard scale:
/// H(t) = H(b_j) + (t/scale_j)^shape_j - (b_j/scale_j)^shape_j on (b_j, b_{j+1}],
/// which keeps the distribution function continuous at every breakpoint.
class LatentLaw {
 public:
  static LatentLaw exponential(double rate) { return piecewise({{1.0, 1.0 / rate}}); }

  static LatentLaw piecewise(std::vector<WeibullPiece> pieces) {
    if (pieces.empty()) throw std::invalid_argument("at least one Weibull piece required");
    LatentLaw law;
    law.kind_ = Kind::Piecewise;
    double start = 0.0;
    double h = 0.0;
    for (std::size_t j = 0; j < pieces.size(); ++j) {
      const auto& p = pieces[j];
      if (!(p.shape > 0.0) || !(p.scale > 0.0)) throw std::invalid_argument("Weibull shape and scale must be positive");
      if (!(p.end > start)) throw std::invalid_argument("Weibull breakpoints must increase");
      if (j + 1 == pieces.size() && std::isfinite(p.end)) throw std::invalid_argument("last piece must extend to infinity");
      law.starts_.push_back(start);
      law.h_start_.push_back(h);
      if (std::isfinite(p.end)) h += std::pow(p.end / p.scale, p.shape) - std::pow(start / p.scale, p.shape);
      start = p.end;
    }
    law.pieces_ = std::move(pieces);
    return law;
  }

  /// Law of T given J = 1 under proportional subdistribution hazards:
  /// F1(t|Z) = 1 - [1 - p1 (1 - e^{-t})]^{e^{theta Z}}, normalised by P(J = 1 | Z).
  static LatentLaw psdh_interest(double p1, double hr) {
    LatentLaw law;
    law.kind_ = Kind::PsdhInterest;
    law.p1_ = p1;
    law.hr_ = hr;
    law.mass_ = 1.0 - std::pow(1.0 - p1, hr);
    return law;
  }

  double cumulative_hazard(double t) const {
    std::size_t j = 0;
    while (j + 1 < pieces_.size() && t > pieces_[j].end) ++j;
    const auto& p = pieces_[j];
    return h_start_[j] + std::pow(t / p.scale, p.shape) - std::pow(starts_[j] / p.scale, p.shape);
  }

  double cdf(double t) const {
    if (t <= 0.0) return 0.0;
    if (kind_ == Kind::PsdhInterest) {
      const double f = 1.0 - std::pow(1.0 - p1_ * -std::expm1(-t), hr_);
      return f / mass_;
    }
    return -std::expm1(-cumulative_hazard(t));
  }

  double quantile(double u) const {
    if (kind_ == Kind::PsdhInterest) {
      const double f = u * mass_;
      const double x = -std::expm1(std::log1p(-f) / hr_) / p1_;  // = 1 - e^{-t}
      return -std::log1p(-x);
    }
    const double target = -std::log1p(-u);
    std::size_t j = 0;
    while (j + 1 < pieces_.size()) {
      const double h_end = h_start_[j + 1];
      if (target <= h_end) break;
      ++j;
    }
    const auto& p = pieces_[j];
    const double base = std::pow(starts_[j] / p.scale, p.shape);
    return p.scale * std::pow(target - h_start_[j] + base, 1.0 / p.shape);
  }

  std::vector<double> breakpoints() const {
    std::vector<double> b;
    for (const auto& p : pieces_) {
      if (std::isfinite(p.end)) b.push_back(p.end);
    }
    return b;
  }

 private:
  enum class Kind { Piecewise, PsdhInterest };
  Kind kind_ = Kind::Piecewise;
  std::vector<WeibullPiece> pieces_;
  std::vector<double> starts_;
  std::vector<double> h_start_;
  double p1_ = 0.0, hr_ = 1.0, mass_ = 1.0;
};

/// Generative model of one arm: P(J = 1) and the two conditional laws.
struct ArmModel {
  double p_interest = 0.7;
  LatentLaw interest;
  LatentLaw competing;

  /// True cumulative incidence of cause 1.
  double cif1(double t) const { return p_interest * interest.cdf(t); }
  double cif2(double t) const { return (1.0 - p_interest) * competing.cdf(t); }

  /// Draw (latent time, cause).
  std::pair<double, EventCode> draw(Rng& rng) const {
    const bool first = rng.uniform() < p_interest;
    const double u = rng.uniform_open();
    const double t = first ? interest.quantile(u) : competing.quantile(u);
    return {t, first ? EventCode::Interest : EventCode::Competing};
  }
};

struct ScenarioSpec {
  ScenarioId id = ScenarioId::A;
  double p1 = 0.7;
  double theta = 0.0;  // log subdistribution hazard ratio, scenarios B and C
  std::array<std::vector<WeibullPiece>, 2> weibull;  // scenarios D-F, per group
  int censor_target = 0;  // percent
  std::size_t n0 = 300;
  std::size_t n1 = 300;

  ArmModel arm(Group g) const {
    const int z = static_cast<int>(g);
    ArmModel m;
    switch (id) {
      case ScenarioId::A:
        m.p_interest = p1;
        m.interest = LatentLaw::exponential(1.0);
        m.competing = LatentLaw::exponential(1.0);
        break;
      case ScenarioId::B:
      case ScenarioId::C: {
        const double hr = std::exp(theta * z);
        m.p_interest = 1.0 - std::pow(1.0 - p1, hr);
        m.interest = LatentLaw::psdh_interest(p1, hr);
        m.competing = LatentLaw::exponential(hr);
        break;
      }
      default:
        m.p_interest = p1;
        m.interest = LatentLaw::piecewise(weibull[z]);
        m.competing = LatentLaw::piecewise(weibull[z]);
        break;
    }
    return m;
  }

  void validate() const {
    if (!(p1 > 0.0 && p1 <= 1.0)) throw InputError("p1 must lie in (0, 1]");
    if (censor_target < 0 || censor_target >= 100) throw InputError("censoring target must be a percentage in [0, 100)");
    if (n0 < 2 || n1 < 2) throw InputError("each group needs at least 2 subjects");
  }
};

/// Scenario definitions. Weibull pieces are (shape, scale, breakpoint).
inline ScenarioSpec make_scenario(ScenarioId id, std::size_t n0 = 300, std::size_t n1 = 300, int censor_target = 0) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  ScenarioSpec s;
  s.id = id;
  s.n0 = n0;
  s.n1 = n1;
  s.censor_target = censor_target;
  switch (id) {
    case ScenarioId::A:
      break;
    case ScenarioId::B:
      s.theta = -0.1;
      break;
    case ScenarioId::C:
      s.theta = -0.3;
      break;
    case ScenarioId::D:  // early difference
      s.weibull[0] = {{1.0, 2.0, 2.0}, {2.0, 2.0, inf}};
      s.weibull[1] = {{4.0, 2.0, 2.0}, {2.0, 2.0, inf}};
      break;
    case ScenarioId::E:  // late difference, curves separate at t = 1
      s.weibull[0] = {{2.0, 2.0, inf}};
      s.weibull[1] = {{2.0, 2.0, 1.0}, {0.8, 2.0, inf}};
      break;
    case ScenarioId::F:  // late difference, curves separate at t = 2
      s.weibull[0] = {{2.0, 2.0, inf}};
      s.weibull[1] = {{2.0, 2.0, 2.0}, {0.8, 2.0, inf}};
      break;
  }
  return s;
}

/// Exact RMTL difference over [0, tau] from the closed-form cumulative incidences.
inline double analytic_true_rmtld(const ScenarioSpec& spec, double tau = 4.0) {
  const auto a0 = spec.arm(Group::Control);
  const auto a1 = spec.arm(Group::Treatment);
  std::vector<double> cuts{0.0};
  for (const auto* a : {&a0, &a1}) {
    for (const double b : a->interest.breakpoints()) {
      if (b < tau) cuts.push_back(b);
    }
  }
  cuts.push_back(tau);
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] <= cuts[i]) continue;
    total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        [&](double t) { return a1.cif1(t) - a0.cif1(t); }, cuts[i], cuts[i + 1], 10, 1e-13);
  }
  return total;
}

/// Draws one arm with censoring C ~ Uniform(0, bound); bound = inf means no censoring.
inline GroupSample generate_group(const ScenarioSpec& spec, Group g, std::size_t n, double censor_bound, Rng& rng) {
  const auto arm = spec.arm(g);
  std::vector<SubjectRecord> recs;
  recs.reserve(n);
  const bool censored = std::isfinite(censor_bound);
  for (std::size_t i = 0; i < n; ++i) {
    const auto [t, cause] = arm.draw(rng);
    SubjectRecord r{t, cause, g};
    if (censored) {
      const double c = censor_bound * rng.uniform();
      if (c < t) r = {c, EventCode::Censored, g};
    }
    recs.push_back(r);
  }
  return GroupSample(g, std::move(recs));
}

}  // namespace crrmtl::sim
