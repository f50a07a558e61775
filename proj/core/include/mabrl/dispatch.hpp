#pragma once

#include <functional>

#include "mabrl/backup.hpp"
#include "mabrl/rng.hpp"

namespace mabrl {

struct QFunction;
struct ShapedPolicy;

// Exploration probability eps_j = eps_0 * decay / (decay + j - 1), which
// halves after `decay` days when starting from j = 1.
struct ExplorationSchedule {
  double epsilon_0 = 0.4;
  double decay = 4.0;
};

double epsilon(const ExplorationSchedule& schedule, int day);

// Any deterministic policy over the full state.
using PolicyFn = std::function<int(const StateVector&)>;

PolicyFn as_policy(const ShapedPolicy& policy);
PolicyFn as_policy(const QFunction& q);

// epsilon-greedy: draws gamma ~ U(0, 1); if gamma <= eps returns a fair coin,
// otherwise the policy's action. One draw per control step.
int select_action(const PolicyFn& policy, const StateVector& x, double eps, Rng& rng);

}  // namespace mabrl
