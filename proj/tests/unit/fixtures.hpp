#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "crrmtl/data.hpp"

namespace crrmtl::fixture {

// {(1,1),(2,0),(3,1),(4,2)}: the hand-worked four-subject example.
inline GroupSample four_subject(Group g = Group::Control) {
  return GroupSample::from_pairs(g, {{1, 1}, {2, 0}, {3, 1}, {4, 2}});
}

// Random sample with rounded times so ties are common.
inline GroupSample random_sample(std::mt19937_64& gen, std::size_t n, bool censored, Group g = Group::Control) {
  std::uniform_real_distribution<double> time(0.05, 10.0);
  std::uniform_int_distribution<int> cause(censored ? 0 : 1, 2);
  std::bernoulli_distribution round(0.3);
  std::vector<SubjectRecord> recs;
  for (std::size_t i = 0; i < n; ++i) {
    double t = time(gen);
    if (round(gen)) t = static_cast<double>(static_cast<int>(t)) + 1.0;
    recs.push_back({t, static_cast<EventCode>(cause(gen)), g});
  }
  return GroupSample(g, std::move(recs));
}

}  // namespace crrmtl::fixture
