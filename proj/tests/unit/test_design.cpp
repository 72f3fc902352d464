#include <cmath>

#include <gtest/gtest.h>

#include "crrmtl/design.hpp"
#include "crrmtl/numeric.hpp"
#include "fixtures.hpp"

using namespace crrmtl;

TEST(Numeric, NormalQuantile) {
  EXPECT_NEAR(normal_quantile(0.975), 1.959963984540054, 1e-12);
  EXPECT_NEAR(normal_quantile(0.8), 0.8416212335729143, 1e-12);
  EXPECT_NEAR(normal_quantile(1e-10), -6.361340902404056, 1e-9);
  for (double p = 0.001; p < 1.0; p += 0.0137) EXPECT_NEAR(normal_cdf(normal_quantile(p)), p, 1e-13);
  EXPECT_THROW(normal_quantile(0.0), DomainError);
  EXPECT_THROW(normal_quantile(1.0), DomainError);
}

TEST(Numeric, ChiSquareOneDf) {
  EXPECT_NEAR(chisq1_sf(3.841458820694124), 0.05, 1e-12);
  EXPECT_DOUBLE_EQ(chisq1_sf(0.0), 1.0);
}

TEST(Numeric, CompensatedSum) {
  CompensatedSum s;
  s += 1.0;
  for (int i = 0; i < 1000; ++i) s += 1e-16;
  s += -1.0;
  EXPECT_NEAR(s.value(), 1e-13, 1e-20);
}

TEST(SampleSize, WorkedExample) {
  const auto r = sample_size({0.5, 1.0, 1.0, 1.0, 0.05, 0.8});
  EXPECT_NEAR(r.n0_real, 62.79, 0.005);
  EXPECT_EQ(r.n0, 63);
  EXPECT_EQ(r.n1, 63);
  EXPECT_EQ(r.total, 126);
}

TEST(SampleSize, DeltaScaling) {
  const auto a = sample_size({0.3, 2.0, 3.0, 1.0, 0.05, 0.8});
  const auto b = sample_size({0.6, 2.0, 3.0, 1.0, 0.05, 0.8});
  EXPECT_NEAR(a.n0_real / b.n0_real, 4.0, 1e-12);
  const auto c = sample_size({-0.6, 2.0, 3.0, 1.0, 0.05, 0.8});
  EXPECT_EQ(b.total, c.total);
}

TEST(SampleSize, MonotoneInPowerAndAlpha) {
  DesignInput in{0.5, 1.0, 1.0, 1.0, 0.05, 0.8};
  const auto base = sample_size(in).total;
  in.power = 0.9;
  EXPECT_GE(sample_size(in).total, base);
  in.power = 0.8;
  in.alpha = 0.01;
  EXPECT_GE(sample_size(in).total, base);
}

TEST(SampleSize, AllocationRatioSymmetry) {
  // r -> 1/r with swapped variances gives the same design with the arms swapped.
  const auto a = sample_size({0.4, 1.5, 2.5, 2.0, 0.05, 0.8});
  const auto b = sample_size({0.4, 2.5, 1.5, 0.5, 0.05, 0.8});
  EXPECT_NEAR(a.n0_real * 2.0, b.n0_real, 1e-9);
  EXPECT_EQ(a.n0, b.n1);
  EXPECT_EQ(a.n1, b.n0);
}

TEST(SampleSize, Errors) {
  EXPECT_THROW(sample_size({0.0, 1.0, 1.0, 1.0, 0.05, 0.8}), InfeasibleDesignError);
  EXPECT_THROW(sample_size({0.5, 0.0, 1.0, 1.0, 0.05, 0.8}), DomainError);
  EXPECT_THROW(sample_size({0.5, 1.0, 1.0, 0.0, 0.05, 0.8}), DomainError);
  EXPECT_THROW(sample_size({0.5, 1.0, 1.0, 1.0, 0.05, 1.0}), DomainError);
}

TEST(PowerAt, WorkedExample) {
  const DesignInput in{0.5, 1.0, 1.0, 1.0, 0.05, 0.8};
  EXPECT_NEAR(power_at(in, 63.0), normal_cdf(0.5 / std::sqrt(2.0 / 63.0) - 1.959963984540054), 1e-12);
  EXPECT_NEAR(power_at(in, 63.0), 0.8013, 5e-5);
}

TEST(PowerAt, RoundTripAndLimits) {
  for (const double power : {0.5, 0.8, 0.9, 0.95}) {
    for (const double ratio : {0.5, 1.0, 3.0}) {
      const DesignInput in{0.37, 1.3, 2.1, ratio, 0.05, power};
      const auto d = sample_size(in);
      EXPECT_GE(power_at(in, static_cast<double>(d.n0)), power - 1e-12);
      EXPECT_NEAR(power_at(in, d.n0_real), power, 1e-9);
    }
  }
  EXPECT_NEAR(power_at({1e-12, 1.0, 1.0, 1.0, 0.05, 0.8}, 100.0), 0.025, 1e-6);
  EXPECT_THROW(power_at({0.5, 1.0, 1.0, 1.0, 0.05, 0.8}, 1.0), DomainError);
}

TEST(Pilot, SigmaIsNTimesVariance) {
  const auto s = fixture::four_subject();
  EXPECT_DOUBLE_EQ(estimate_sigma_sq(s, 4.0), 4.0 * rmtl(s, 4.0).variance);
}

TEST(Pilot, Degenerate) {
  EXPECT_THROW(estimate_sigma_sq(GroupSample::from_pairs(Group::Control, {{1, 0}, {2, 0}}), 2.0),
               DegeneratePilotError);
  EXPECT_THROW(estimate_sigma_sq(GroupSample::from_pairs(Group::Control, {{1, 1}, {2, 0}}), 2.0),
               DegeneratePilotError);
}
