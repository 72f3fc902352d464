#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "crrmtl/data.hpp"
#include "crrmtl/errors.hpp"

namespace crrmtl {

struct ColumnMap {
  std::string time = "time";
  std::string event = "event";
  std::string group = "group";
  // Optional remapping of raw cell text to typed codes. Empty map = expect 0/1/2 and 0/1.
  std::map<std::string, EventCode> event_codes;
  std::map<std::string, Group> group_codes;
};

namespace detail {

// Splits one CSV line. Supports double-quoted fields with "" escapes; no embedded newlines.
inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cell.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(cell));
      cell.clear();
    } else {
      cell.push_back(c);
    }
  }
  out.push_back(std::move(cell));
  return out;
}

inline std::string_view trim(std::string_view s) {
  const auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
  while (!s.empty() && ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && ws(s.back())) s.remove_suffix(1);
  return s;
}

inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::optional<long> parse_int(std::string_view s) {
  s = trim(s);
  long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace detail

namespace detail {

// Parses all data rows. With `fixed_group` set, the group column is optional and ignored.
inline std::vector<SubjectRecord> read_rows(std::istream& in, const ColumnMap& columns,
                                            std::optional<Group> fixed_group = std::nullopt) {
  std::string line;
  if (!std::getline(in, line)) throw InputError("empty input: header row required");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

  const auto header = split_csv_line(line);
  const auto find_col = [&](const std::string& name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (trim(header[i]) == name) return i;
    }
    return std::nullopt;
  };
  const auto require_col = [&](const std::string& name) {
    const auto i = find_col(name);
    if (!i) throw SchemaError(name);
    return *i;
  };
  const std::size_t ti = require_col(columns.time);
  const std::size_t ei = require_col(columns.event);
  const std::size_t gi = fixed_group ? 0 : require_col(columns.group);
  const std::size_t needed = std::max({ti, ei, gi}) + 1;

  std::vector<SubjectRecord> out;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    const auto cells = split_csv_line(line);
    if (cells.size() < needed) throw RowError(row, "expected at least " + std::to_string(needed) + " fields");

    const auto t = parse_double(cells[ti]);
    if (!t) throw RowError(row, "non-numeric time '" + cells[ti] + "'");
    if (!std::isfinite(*t)) throw RowError(row, "non-finite time");
    if (*t < 0.0) throw RowError(row, "negative time " + std::string(trim(cells[ti])));

    SubjectRecord rec;
    rec.time = *t;

    const std::string ecell(trim(cells[ei]));
    if (!columns.event_codes.empty()) {
      const auto it = columns.event_codes.find(ecell);
      if (it == columns.event_codes.end()) throw RowError(row, "unmapped event code '" + ecell + "'");
      rec.event = it->second;
    } else {
      const auto e = parse_int(ecell);
      if (!e || *e < 0 || *e > 2) throw RowError(row, "event code '" + ecell + "' outside {0,1,2}");
      rec.event = static_cast<EventCode>(*e);
    }

    if (fixed_group) {
      rec.group = *fixed_group;
    } else {
      const std::string gcell(trim(cells[gi]));
      if (!columns.group_codes.empty()) {
        const auto it = columns.group_codes.find(gcell);
        if (it == columns.group_codes.end()) throw RowError(row, "unmapped group code '" + gcell + "'");
        rec.group = it->second;
      } else {
        const auto g = parse_int(gcell);
        if (!g || *g < 0 || *g > 1) throw RowError(row, "group code '" + gcell + "' outside {0,1}");
        rec.group = static_cast<Group>(*g);
      }
    }
    out.push_back(rec);
  }
  return out;
}

}  // namespace detail

/// Reads a two-arm competing-risks CSV. Rows failing validation abort with a
/// RowError carrying the 1-based data row number (the header is not counted).
/// Row order is preserved within each group.
inline TwoGroupSample ingest_csv(std::istream& in, const ColumnMap& columns = {}) {
  std::vector<SubjectRecord> control, treatment;
  for (const auto& rec : detail::read_rows(in, columns)) {
    (rec.group == Group::Control ? control : treatment).push_back(rec);
  }
  if (control.size() < 2 || treatment.size() < 2) {
    throw SampleSizeError("each group needs at least 2 subjects (control " + std::to_string(control.size()) +
                          ", treatment " + std::to_string(treatment.size()) + ")");
  }
  return {GroupSample(Group::Control, std::move(control)), GroupSample(Group::Treatment, std::move(treatment))};
}

/// Reads one arm (e.g. a pilot study) from a CSV with time and event columns;
/// a group column, if present, is ignored.
inline GroupSample ingest_group_csv(std::istream& in, Group group, const ColumnMap& columns = {}) {
  auto recs = detail::read_rows(in, columns, group);
  if (recs.size() < 2) throw SampleSizeError("a single-arm file needs at least 2 subjects");
  return GroupSample(group, std::move(recs));
}

}  // namespace crrmtl
