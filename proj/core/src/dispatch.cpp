#include "mabrl/dispatch.hpp"

#include <string>

#include "mabrl/error.hpp"
#include "mabrl/fqi.hpp"
#include "mabrl/shaping.hpp"

namespace mabrl {

double epsilon(const ExplorationSchedule& schedule, int day) {
  if (day < 1) throw InvalidArgument("exploration day index must be >= 1, got " + std::to_string(day));
  return schedule.epsilon_0 * schedule.decay / (schedule.decay + static_cast<double>(day) - 1.0);
}

PolicyFn as_policy(const ShapedPolicy& policy) {
  return [&policy](const StateVector& x) { return policy.action(x.quarter, x.t_in); };
}

PolicyFn as_policy(const QFunction& q) {
  return [&q](const StateVector& x) { return greedy_action(q, x); };
}

int select_action(const PolicyFn& policy, const StateVector& x, double eps, Rng& rng) {
  if (!(eps >= 0.0 && eps <= 1.0)) throw InvalidArgument("epsilon must lie in [0, 1]");
  const double gamma = uniform01(rng);
  // The coin is drawn unconditionally so the stream advances identically
  // whether or not the step explores.
  const int coin = uniform01(rng) < 0.5 ? 1 : 0;
  if (eps > 0.0 && gamma <= eps) return coin;
  return policy(x);
}

}  // namespace mabrl
