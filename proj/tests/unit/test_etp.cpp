#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "mabrl/error.hpp"
#include "mabrl/etp.hpp"
#include "mabrl/scenario.hpp"

using namespace mabrl;

namespace {

// Classical RK4 with 1 s steps, written against the ODE directly.
EtpState reference_step(EtpState s, const EtpParams& p, double t_o, double q_s, bool on, double seconds) {
  auto deriv = [&](double a, double m) {
    const double heat_a = (t_o - a) / p.r_a + (m - a) / p.r_m + p.a_s * q_s + (on ? p.a_c * p.q_ac : 0.0);
    const double heat_m = (a - m) / p.r_m + (1.0 - p.a_s) * q_s;
    return std::pair{1000.0 * heat_a / p.c_a, 1000.0 * heat_m / p.c_m};
  };
  for (int i = 0; i < static_cast<int>(seconds); ++i) {
    const auto [a1, m1] = deriv(s.t_a, s.t_m);
    const auto [a2, m2] = deriv(s.t_a + 0.5 * a1, s.t_m + 0.5 * m1);
    const auto [a3, m3] = deriv(s.t_a + 0.5 * a2, s.t_m + 0.5 * m2);
    const auto [a4, m4] = deriv(s.t_a + a3, s.t_m + m3);
    s.t_a += (a1 + 2 * a2 + 2 * a3 + a4) / 6.0;
    s.t_m += (m1 + 2 * m2 + 2 * m3 + m4) / 6.0;
  }
  return s;
}

Scenario day_scenario() {
  Scenario s;
  for (int k = 0; k < 96; ++k) {
    s.outside_temp.push_back(3.0 + 4.0 * std::sin(k / 15.0));
    s.solar.push_back(k > 35 && k < 65 ? 0.1 : 0.0);
    s.price.push_back(0.05);
  }
  return s;
}

}  // namespace

TEST(Etp, EquilibriumIsFixed) {
  const EtpState s = step_etp({20.0, 20.0}, EtpParams{}, 20.0, 0.0, false, 900.0);
  EXPECT_DOUBLE_EQ(s.t_a, 20.0);
  EXPECT_DOUBLE_EQ(s.t_m, 20.0);
}

TEST(Etp, CoolsTowardOutside) {
  const EtpState s = step_etp({22.0, 21.0}, EtpParams{}, 5.0, 0.0, false, 900.0);
  EXPECT_LT(s.t_a, 22.0);
}

TEST(Etp, MatchesFineReferenceIntegrator) {
  const EtpParams p;
  for (bool on : {false, true}) {
    const EtpState got = step_etp({22.0, 21.0}, p, 5.0, 0.0, on, 900.0);
    const EtpState ref = reference_step({22.0, 21.0}, p, 5.0, 0.0, on, 900.0);
    EXPECT_NEAR(got.t_a, ref.t_a, 1e-3);
    EXPECT_NEAR(got.t_m, ref.t_m, 1e-3);
  }
  const EtpState got = step_etp({19.0, 23.0}, p, -3.0, 0.4, true, 900.0);
  const EtpState ref = reference_step({19.0, 23.0}, p, -3.0, 0.4, true, 900.0);
  EXPECT_NEAR(got.t_a, ref.t_a, 1e-3);
  EXPECT_NEAR(got.t_m, ref.t_m, 1e-3);
}

TEST(Etp, PartialFinalSubstep) {
  EtpParams p;
  p.substep_seconds = 60.0;
  const EtpState a = step_etp({22.0, 21.0}, p, 5.0, 0.0, true, 90.0);
  EtpState b = step_etp({22.0, 21.0}, p, 5.0, 0.0, true, 60.0);
  b = step_etp(b, p, 5.0, 0.0, true, 30.0);
  EXPECT_DOUBLE_EQ(a.t_a, b.t_a);
  EXPECT_DOUBLE_EQ(a.t_m, b.t_m);
}

TEST(Etp, ConvergesMonotonicallyToOutside) {
  // The envelope time constant is months long with these parameters, so the
  // 1e6 s bound is checked from envelope temperatures near the outside one.
  const EtpParams p;
  for (const EtpState start : {EtpState{22.0, 20.5}, EtpState{25.0, 19.5}, EtpState{21.0, 20.0}}) {
    EtpState s = start;
    double prev_a = s.t_a;
    for (int k = 0; k < 1000000 / 900 + 1; ++k) {
      s = step_etp(s, p, 20.0, 0.0, false, 900.0);
      EXPECT_LE(s.t_a, prev_a + 1e-12);
      prev_a = s.t_a;
    }
    EXPECT_LT(std::abs(s.t_a - 20.0), 0.1);
  }
}

TEST(Etp, AffineInInputs) {
  const EtpParams p;
  const double w = 0.3;
  const EtpState x{21.0, 20.0};
  const EtpState y{18.0, 24.0};
  const EtpState fx = step_etp(x, p, 2.0, 0.1, true, 900.0);
  const EtpState fy = step_etp(y, p, 9.0, 0.3, true, 900.0);
  const EtpState mix = step_etp({w * x.t_a + (1 - w) * y.t_a, w * x.t_m + (1 - w) * y.t_m}, p,
                                w * 2.0 + (1 - w) * 9.0, w * 0.1 + (1 - w) * 0.3, true, 900.0);
  EXPECT_NEAR(mix.t_a, w * fx.t_a + (1 - w) * fy.t_a, 1e-6);
  EXPECT_NEAR(mix.t_m, w * fx.t_m + (1 - w) * fy.t_m, 1e-6);
}

TEST(Etp, SubstepHalvingChangesDayLittle) {
  const Scenario sc = day_scenario();
  std::vector<int> actions(96);
  for (int k = 0; k < 96; ++k) actions[static_cast<std::size_t>(k)] = k % 10 == 0 ? 1 : 0;
  EtpParams coarse;
  EtpParams fine;
  fine.substep_seconds = 30.0;
  const auto a = simulate_day({21.0, 21.0}, coarse, sc, actions);
  const auto b = simulate_day({21.0, 21.0}, fine, sc, actions);
  double sup = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) sup = std::max(sup, std::abs(a[k].t_a - b[k].t_a));
  EXPECT_LT(sup, 1e-2);
}

TEST(Etp, SimulateDayIsFoldOfSteps) {
  const Scenario sc = day_scenario();
  const EtpParams p;
  std::vector<int> actions(96);
  for (int k = 0; k < 96; ++k) actions[static_cast<std::size_t>(k)] = k % 4 == 0 ? 1 : 0;
  const auto traj = simulate_day({21.0, 21.0}, p, sc, actions);
  ASSERT_EQ(traj.size(), 96u);
  EtpState s{21.0, 21.0};
  for (std::size_t k = 0; k < 96; ++k) {
    s = step_etp(s, p, sc.outside_temp[k], solar_heat_gain(p, sc.solar[k]), actions[k] != 0, 900.0);
    EXPECT_EQ(traj[k], s);
  }
}

TEST(Etp, ConstantScenarioAllOffIsConstant) {
  Scenario sc;
  sc.outside_temp.assign(96, 20.0);
  sc.solar.assign(96, 0.0);
  sc.price.assign(96, 0.1);
  for (const auto& s : simulate_day({20.0, 20.0}, EtpParams{}, sc, std::vector<int>(96, 0))) {
    EXPECT_DOUBLE_EQ(s.t_a, 20.0);
    EXPECT_DOUBLE_EQ(s.t_m, 20.0);
  }
}

TEST(Etp, MoreHeatNeverColder) {
  // A dozen steps; a full day of heating runs far outside any sane range.
  const Scenario sc = day_scenario().slice(0, 12);
  const auto on = simulate_day({21.0, 21.0}, EtpParams{}, sc, std::vector<int>(12, 1));
  const auto off = simulate_day({21.0, 21.0}, EtpParams{}, sc, std::vector<int>(12, 0));
  for (std::size_t k = 0; k < 12; ++k) EXPECT_GT(on[k].t_a, off[k].t_a);
}

TEST(Etp, Errors) {
  const Scenario sc = day_scenario();
  EXPECT_THROW(simulate_day({21.0, 21.0}, EtpParams{}, sc, std::vector<int>(95, 0)), InvalidArgument);
  EXPECT_THROW(step_etp({21.0, 21.0}, EtpParams{}, 0.0, 0.0, false, 0.0), InvalidArgument);
  EtpParams bad;
  bad.c_a = 10.0;  // far too small for 60 s Euler substeps
  EXPECT_THROW(step_etp({21.0, 21.0}, bad, 0.0, 0.0, true, 900.0), IntegrationDivergence);
  EtpParams neg;
  neg.r_a = -1.0;
  EXPECT_THROW(neg.validate(), InvalidArgument);
  EtpParams frac;
  frac.a_s = 1.5;
  EXPECT_THROW(frac.validate(), InvalidArgument);
}
