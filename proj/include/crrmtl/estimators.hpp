#pragma once

#include <algorithm>
#include <cstddef>
#include <iomanip>
#include <limits>
#include <ostream>
#include <vector>

#include "crrmtl/data.hpp"
#include "crrmtl/errors.hpp"
#include "crrmtl/numeric.hpp"
#include "crrmtl/step_function.hpp"

namespace crrmtl {

namespace detail {
inline double clamp_unit(double v) { return std::clamp(v, 0.0, 1.0); }
}  // namespace detail

/// All-cause Kaplan-Meier survival, knots at the event times of the table.
inline StepFunction km_survival(const EventTable& table) {
  std::vector<double> values(table.size());
  double s = 1.0;
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto deaths = static_cast<double>(table.d1[i] + table.d2[i]);
    s *= 1.0 - deaths / static_cast<double>(table.at_risk[i]);
    values[i] = detail::clamp_unit(s);
  }
  return StepFunction(table.times, std::move(values), 1.0);
}

/// Aalen-Johansen cumulative incidence of `cause` (1 or 2):
/// F_j(t) = sum_{t_i <= t} d_ij / Y(t_i) * S(t_i-).
inline StepFunction cif(const EventTable& table, int cause) {
  if (cause != 1 && cause != 2) throw DomainError("cause must be 1 or 2");
  const auto& d = cause == 1 ? table.d1 : table.d2;
  std::vector<double> values(table.size());
  CompensatedSum f;
  double s_prev = 1.0;
  for (std::size_t i = 0; i < table.size(); ++i) {
    const double y = static_cast<double>(table.at_risk[i]);
    f += static_cast<double>(d[i]) / y * s_prev;
    values[i] = detail::clamp_unit(f.value());
    s_prev *= 1.0 - static_cast<double>(table.d1[i] + table.d2[i]) / y;
  }
  return StepFunction(table.times, std::move(values), 0.0);
}

/// Survival and both cumulative incidences of one group, on a shared knot set.
struct CifPair {
  EventTable table;
  StepFunction survival;
  StepFunction cif1;
  StepFunction cif2;
};

inline CifPair make_cif_pair(EventTable table) {
  CifPair p;
  p.survival = km_survival(table);
  p.cif1 = cif(table, 1);
  p.cif2 = cif(table, 2);
  p.table = std::move(table);
  return p;
}

inline CifPair make_cif_pair(const GroupSample& sample) { return make_cif_pair(build_event_table(sample)); }

/// Curve CSV: `time,survival,cif1,cif2`, a t=0 row then one row per knot.
inline void write_curves(std::ostream& out, const CifPair& p) {
  const auto old_prec = out.precision(std::numeric_limits<double>::max_digits10);
  out << "time,survival,cif1,cif2\n";
  out << 0.0 << ',' << p.survival(0.0) << ',' << p.cif1(0.0) << ',' << p.cif2(0.0) << '\n';
  for (const double t : p.table.times) {
    if (t == 0.0) continue;
    out << t << ',' << p.survival(t) << ',' << p.cif1(t) << ',' << p.cif2(t) << '\n';
  }
  out.precision(old_prec);
}

}  // namespace crrmtl
