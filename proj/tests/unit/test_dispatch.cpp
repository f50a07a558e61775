#include <gtest/gtest.h>

#include "mabrl/dispatch.hpp"
#include "mabrl/error.hpp"
#include "mabrl/shaping.hpp"

using namespace mabrl;

namespace {

const StateVector kState{10, 21.0, 4.0, 0.0, 0};

}  // namespace

TEST(Exploration, ScheduleValues) {
  const ExplorationSchedule s;
  EXPECT_DOUBLE_EQ(epsilon(s, 1), 0.4);
  EXPECT_DOUBLE_EQ(epsilon(s, 5), 0.2);
  EXPECT_NEAR(epsilon(s, 9), 0.4 / 3.0, 1e-15);
  EXPECT_THROW(epsilon(s, 0), InvalidArgument);
}

TEST(Exploration, HalvesEveryDecayPeriod) {
  const ExplorationSchedule s{0.3, 6.0};
  EXPECT_NEAR(epsilon(s, 7) / epsilon(s, 1), 0.5, 1e-15);
  for (int d = 1; d < 60; ++d) EXPECT_LT(epsilon(s, d + 1), epsilon(s, d));
}

TEST(Dispatch, ZeroEpsilonFollowsPolicy) {
  Rng rng(1);
  const PolicyFn on = [](const StateVector&) { return 1; };
  const PolicyFn off = [](const StateVector&) { return 0; };
  for (int k = 0; k < 1000; ++k) {
    EXPECT_EQ(select_action(on, kState, 0.0, rng), 1);
    EXPECT_EQ(select_action(off, kState, 0.0, rng), 0);
  }
}

TEST(Dispatch, FullEpsilonIsFairCoin) {
  Rng rng(2);
  const PolicyFn off = [](const StateVector&) { return 0; };
  int ones = 0;
  for (int k = 0; k < 10000; ++k) ones += select_action(off, kState, 1.0, rng);
  EXPECT_GE(ones, 4700);
  EXPECT_LE(ones, 5300);
}

TEST(Dispatch, ExplorationRateMatchesEpsilon) {
  Rng rng(3);
  const PolicyFn off = [](const StateVector&) { return 0; };
  int ones = 0;
  for (int k = 0; k < 20000; ++k) ones += select_action(off, kState, 0.4, rng);
  EXPECT_NEAR(ones / 20000.0, 0.2, 0.015);
}

TEST(Dispatch, Deterministic) {
  const PolicyFn off = [](const StateVector&) { return 0; };
  Rng a(4);
  Rng b(4);
  for (int k = 0; k < 500; ++k) {
    EXPECT_EQ(select_action(off, kState, 0.5, a), select_action(off, kState, 0.5, b));
  }
}

TEST(Dispatch, RejectsOutOfRangeEpsilon) {
  Rng rng(5);
  const PolicyFn off = [](const StateVector&) { return 0; };
  EXPECT_THROW(select_action(off, kState, -0.1, rng), InvalidArgument);
  EXPECT_THROW(select_action(off, kState, 1.1, rng), InvalidArgument);
}

TEST(Dispatch, ShapedPolicyAdapter) {
  std::vector<PolicySample> s;
  for (int q = 1; q <= 96; ++q) {
    s.push_back({q, 18.0, 1});
    s.push_back({q, 25.0, 0});
  }
  const ShapedPolicy pol = fit_shaped_policy(s, {});
  const PolicyFn f = as_policy(pol);
  EXPECT_EQ(f({5, 18.0, 0.0, 0.0, 0}), 1);
  EXPECT_EQ(f({5, 25.0, 0.0, 0.0, 0}), 0);
}
