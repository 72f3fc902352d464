#include <algorithm>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "crrmtl/csv.hpp"
#include "crrmtl/data.hpp"
#include "fixtures.hpp"

using namespace crrmtl;

namespace {

TwoGroupSample parse(const std::string& text, const ColumnMap& cols = {}) {
  std::istringstream in(text);
  return ingest_csv(in, cols);
}

std::size_t error_row(const std::string& text) {
  try {
    parse(text);
  } catch (const RowError& e) {
    return e.row();
  }
  return 0;
}

}  // namespace

TEST(Csv, FourRowsSplitByGroup) {
  const auto s = parse("time,event,group\n1,1,0\n2,0,0\n3,1,1\n4,2,1");
  EXPECT_EQ(s.control.size(), 2u);
  EXPECT_EQ(s.treatment.size(), 2u);
  EXPECT_DOUBLE_EQ(s.treatment.records()[1].time, 4.0);
  EXPECT_EQ(s.treatment.records()[1].event, EventCode::Competing);
}

TEST(Csv, NegativeTimeIsRowError) {
  EXPECT_EQ(error_row("time,event,group\n1,1,0\n-1,1,0\n2,1,1\n3,1,1\n"), 2u);
}

TEST(Csv, EventCodeThreeIsRowError) {
  EXPECT_EQ(error_row("time,event,group\n2,3,0\n"), 1u);
}

TEST(Csv, OtherRowErrors) {
  EXPECT_EQ(error_row("time,event,group\n1,1,0\nabc,1,0\n"), 2u);
  EXPECT_EQ(error_row("time,event,group\n1,1,2\n"), 1u);
  EXPECT_EQ(error_row("time,event,group\ninf,1,0\n"), 1u);
  EXPECT_EQ(error_row("time,event,group\n1,1.5,0\n"), 1u);
}

TEST(Csv, MissingColumnNamed) {
  try {
    parse("time,status,group\n1,1,0\n");
    FAIL() << "expected a schema error";
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.column(), "event");
  }
}

TEST(Csv, TooFewPerGroup) {
  EXPECT_THROW(parse("time,event,group\n1,1,0\n2,1,0\n3,1,1\n"), SampleSizeError);
}

TEST(Csv, RemappedColumnsAndCodes) {
  ColumnMap cols;
  cols.time = "years";
  cols.event = "status";
  cols.group = "arm";
  cols.event_codes = {{"cens", EventCode::Censored}, {"relapse", EventCode::Interest}, {"death", EventCode::Competing}};
  cols.group_codes = {{"placebo", Group::Control}, {"drug", Group::Treatment}};
  const auto s = parse("\xEF\xBB\xBF" "arm,years,status\nplacebo,1,relapse\nplacebo,2,cens\n\"drug\",3,death\ndrug,4,relapse\n",
                       cols);
  EXPECT_EQ(s.control.count(EventCode::Interest), 1u);
  EXPECT_EQ(s.treatment.count(EventCode::Competing), 1u);
}

TEST(Csv, SingleArmIgnoresGroupColumn) {
  std::istringstream in("time,event\n1,1\n2,2\n");
  const auto g = ingest_group_csv(in, Group::Treatment);
  EXPECT_EQ(g.size(), 2u);
  EXPECT_EQ(g.group(), Group::Treatment);
}

TEST(EventTable, FourSubjectFixture) {
  const auto t = build_event_table(fixture::four_subject());
  EXPECT_EQ(t.times, (std::vector<double>{1, 3, 4}));
  EXPECT_EQ(t.d1, (std::vector<std::size_t>{1, 1, 0}));
  EXPECT_EQ(t.d2, (std::vector<std::size_t>{0, 0, 1}));
  EXPECT_EQ(t.at_risk, (std::vector<std::size_t>{4, 2, 1}));
}

TEST(EventTable, AllCensoredIsEmpty) {
  const auto t = build_event_table(GroupSample::from_pairs(Group::Control, {{1, 0}, {2, 0}}));
  EXPECT_TRUE(t.empty());
}

TEST(EventTable, TiesAggregate) {
  const auto t = build_event_table(GroupSample::from_pairs(Group::Control, {{2, 1}, {2, 1}, {2, 2}}));
  EXPECT_EQ(t.times, (std::vector<double>{2}));
  EXPECT_EQ(t.d1, (std::vector<std::size_t>{2}));
  EXPECT_EQ(t.d2, (std::vector<std::size_t>{1}));
  EXPECT_EQ(t.at_risk, (std::vector<std::size_t>{3}));
}

TEST(EventTable, CensoringTiedWithEventStaysAtRisk) {
  const auto t = build_event_table(GroupSample::from_pairs(Group::Control, {{2, 0}, {2, 1}, {3, 1}}));
  EXPECT_EQ(t.at_risk[0], 3u);
}

TEST(EventTable, InvariantsAndPermutationInvariance) {
  std::mt19937_64 gen(11);
  for (int k = 0; k < 200; ++k) {
    const auto s = fixture::random_sample(gen, 1 + gen() % 40, true);
    const auto t = build_event_table(s);
    std::size_t events = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      EXPECT_GE(t.at_risk[i], t.d1[i] + t.d2[i]);
      EXPECT_GE(t.d1[i] + t.d2[i], 1u);
      if (i > 0) {
        EXPECT_LT(t.times[i - 1], t.times[i]);
        EXPECT_GE(t.at_risk[i - 1], t.at_risk[i]);
      }
      events += t.d1[i] + t.d2[i];
    }
    EXPECT_EQ(events, s.size() - s.count(EventCode::Censored));

    auto recs = s.records();
    std::shuffle(recs.begin(), recs.end(), gen);
    const auto u = build_event_table(GroupSample(Group::Control, recs));
    EXPECT_EQ(t.times, u.times);
    EXPECT_EQ(t.d1, u.d1);
    EXPECT_EQ(t.d2, u.d2);
    EXPECT_EQ(t.at_risk, u.at_risk);
  }
}

TEST(SelectTau, ShorterMaximumFollowUp) {
  const auto a = GroupSample::from_pairs(Group::Control, {{1, 1}, {25.667, 0}});
  const auto b = GroupSample::from_pairs(Group::Treatment, {{2, 1}, {30.2, 2}});
  EXPECT_DOUBLE_EQ(select_tau(a, b), 25.667);
  EXPECT_DOUBLE_EQ(select_tau(b, a), 25.667);

  const auto c = GroupSample::from_pairs(Group::Control, {{4, 1}, {1, 0}});
  const auto d = GroupSample::from_pairs(Group::Treatment, {{4, 0}, {2, 1}});
  EXPECT_DOUBLE_EQ(select_tau(c, d), 4.0);

  const auto e = GroupSample::from_pairs(Group::Control, {{16.238, 0}, {3, 1}});
  const auto f = GroupSample::from_pairs(Group::Treatment, {{20.0, 0}, {5, 1}});
  EXPECT_DOUBLE_EQ(select_tau(e, f), 16.238);
}

TEST(GroupSample, RejectsBadRecords) {
  EXPECT_THROW(GroupSample(Group::Control, {}), SampleSizeError);
  EXPECT_THROW(GroupSample::from_pairs(Group::Control, {{0, 0}, {0, 1}}), SampleSizeError);
  EXPECT_THROW(GroupSample(Group::Control, {{1, EventCode::Interest, Group::Treatment}}), RowError);
}
