#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "crrmtl/errors.hpp"

namespace crrmtl {

enum class EventCode : int { Censored = 0, Interest = 1, Competing = 2 };
enum class Group : int { Control = 0, Treatment = 1 };

inline const char* to_string(Group g) {
  return g == Group::Control ? "control" : "treatment";
}

struct SubjectRecord {
  double time = 0.0;
  EventCode event = EventCode::Censored;
  Group group = Group::Control;
};

inline bool is_valid(const SubjectRecord& r) {
  const int e = static_cast<int>(r.event);
  const int g = static_cast<int>(r.group);
  return std::isfinite(r.time) && r.time >= 0.0 && e >= 0 && e <= 2 && g >= 0 && g <= 1;
}

/// Records of a single arm. Immutable once built.
///
/// Construction requires at least one record and a strictly positive maximum
/// follow-up. The two-subject minimum needed for inference is enforced where
/// inference happens (ingestion and the two-sample tests), so that tiny
/// fixtures remain usable for the estimators.
class GroupSample {
 public:
  GroupSample() = default;

  GroupSample(Group group, std::vector<SubjectRecord> records)
      : group_(group), records_(std::move(records)) {
    if (records_.empty()) throw SampleSizeError(std::string("empty ") + to_string(group_) + " group");
    for (std::size_t i = 0; i < records_.size(); ++i) {
      const auto& r = records_[i];
      if (!is_valid(r)) throw RowError(i + 1, "invalid subject record");
      if (r.group != group_) throw RowError(i + 1, "record belongs to the other group");
      max_follow_up_ = std::max(max_follow_up_, r.time);
    }
    if (!(max_follow_up_ > 0.0)) {
      throw SampleSizeError(std::string("maximum follow-up of ") + to_string(group_) +
                            " group must be positive");
    }
  }

  /// Convenience for fixtures: (time, event code) pairs.
  static GroupSample from_pairs(Group group, const std::vector<std::pair<double, int>>& rows) {
    std::vector<SubjectRecord> recs;
    recs.reserve(rows.size());
    for (const auto& [t, e] : rows) recs.push_back({t, static_cast<EventCode>(e), group});
    return GroupSample(group, std::move(recs));
  }

  Group group() const noexcept { return group_; }
  std::size_t size() const noexcept { return records_.size(); }
  const std::vector<SubjectRecord>& records() const noexcept { return records_; }
  double max_follow_up() const noexcept { return max_follow_up_; }

  std::size_t count(EventCode e) const {
    return static_cast<std::size_t>(
        std::count_if(records_.begin(), records_.end(), [e](const SubjectRecord& r) { return r.event == e; }));
  }

 private:
  Group group_ = Group::Control;
  std::vector<SubjectRecord> records_;
  double max_follow_up_ = 0.0;
};

struct TwoGroupSample {
  GroupSample control;
  GroupSample treatment;

  const GroupSample& operator[](Group g) const { return g == Group::Control ? control : treatment; }
};

/// Distinct event times with cause-specific counts and the all-cause risk set.
struct EventTable {
  std::vector<double> times;
  std::vector<std::size_t> d1;
  std::vector<std::size_t> d2;
  std::vector<std::size_t> at_risk;
  std::size_t n = 0;

  std::size_t size() const noexcept { return times.size(); }
  bool empty() const noexcept { return times.empty(); }
};

/// Censoring tied with an event time stays in the risk set at that time.
inline EventTable build_event_table(const GroupSample& sample) {
  const auto& recs = sample.records();
  std::vector<std::pair<double, int>> sorted;
  sorted.reserve(recs.size());
  for (const auto& r : recs) sorted.emplace_back(r.time, static_cast<int>(r.event));
  std::sort(sorted.begin(), sorted.end());

  EventTable table;
  table.n = sorted.size();
  std::size_t i = 0;
  while (i < sorted.size()) {
    const double t = sorted[i].first;
    const std::size_t at_risk = sorted.size() - i;
    std::size_t c1 = 0, c2 = 0;
    for (; i < sorted.size() && sorted[i].first == t; ++i) {
      if (sorted[i].second == 1) ++c1;
      else if (sorted[i].second == 2) ++c2;
    }
    if (c1 + c2 > 0) {
      table.times.push_back(t);
      table.d1.push_back(c1);
      table.d2.push_back(c2);
      table.at_risk.push_back(at_risk);
    }
  }
  return table;
}

/// Restriction time: the shorter of the two groups' maximum follow-up.
inline double select_tau(const GroupSample& a, const GroupSample& b) {
  return std::min(a.max_follow_up(), b.max_follow_up());
}

}  // namespace crrmtl
