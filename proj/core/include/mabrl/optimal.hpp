#pragma once

// Reference controllers with perfect knowledge of the thermal model, the
// backup settings and the future disturbances: exact enumeration for short
// horizons, grid dynamic programming for full days, and the plain hysteresis
// thermostat.

#include <vector>

#include "mabrl/backup.hpp"
#include "mabrl/etp.hpp"
#include "mabrl/scenario.hpp"

namespace mabrl {

struct ControlProblem {
  EtpState initial;
  int u_prev = 0;          // action applied in the step before the horizon
  int start_quarter = 1;   // quarter of the first step
  EtpParams params;
  Scenario scenario;       // horizon = scenario.size()
  ComfortBounds bounds;

  std::size_t horizon() const { return scenario.size(); }
  int quarter_at(std::size_t k) const {
    return static_cast<int>((static_cast<std::size_t>(start_quarter - 1) + k) % kQuartersPerDay) + 1;
  }
};

struct OptimalPlan {
  std::vector<int> requested;        // requested actions
  std::vector<int> actions;          // applied actions after the backup filter
  std::vector<EtpState> trajectory;  // state after each step
  double cost = 0.0;                 // EUR
};

// Feeds the requested actions through backup + simulator; the plan's cost is
// the sum of stage costs of the applied actions.
OptimalPlan replay_plan(const ControlProblem& problem, const std::vector<int>& requested);

inline constexpr std::size_t kMaxExhaustiveHorizon = 22;

// Exact minimum over all requested-action sequences. Sequences whose requests
// are overridden by the backup controller collapse onto the same branch.
OptimalPlan optimal_exhaustive(const ControlProblem& problem);

struct DpGrid {
  double t_a_resolution = 0.02;   // degC
  double t_m_resolution = 0.25;   // degC
  double t_a_margin = 3.0;        // window = comfort band +/- margin
};

// Backward DP over (t_a, t_m) for an idle heater. Heating episodes are held by
// the backup latch and are rolled out exactly. The value function jumps where
// an idle trajectory first meets a comfort bound; those points are added as
// t_a nodes and interpolation keeps queries on their side of each jump.
// A forward pass on the exact dynamics recovers the plan.
OptimalPlan optimal_dp(const ControlProblem& problem, const DpGrid& grid = {});

// Requests OFF at every step: heating only happens through the backup.
OptimalPlan default_thermostat(const ControlProblem& problem);

}  // namespace mabrl
