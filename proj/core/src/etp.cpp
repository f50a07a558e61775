#include "mabrl/etp.hpp"

#include <cmath>
#include <string>

#include "mabrl/error.hpp"
#include "mabrl/scenario.hpp"

namespace mabrl {

void EtpParams::validate() const {
  if (!(r_a > 0.0 && c_a > 0.0 && r_m > 0.0 && c_m > 0.0)) {
    throw InvalidArgument("ETP resistances and capacitances must be strictly positive");
  }
  if (!(a_s >= 0.0 && a_s <= 1.0 && a_c >= 0.0 && a_c <= 1.0)) {
    throw InvalidArgument("ETP fractions a_s and a_c must lie in [0, 1]");
  }
  if (!(q_ac >= 0.0 && p_elec >= 0.0)) {
    throw InvalidArgument("HVAC thermal and electrical power must be nonnegative");
  }
  if (!(substep_seconds > 0.0) || !(sanity_bound > 0.0) || !std::isfinite(solar_aperture)) {
    throw InvalidArgument("ETP substep, sanity bound and aperture must be positive and finite");
  }
}

EtpState step_etp(const EtpState& state, const EtpParams& params, double t_o, double q_s,
                  bool hvac_on, double step_seconds) {
  if (!(step_seconds > 0.0)) {
    throw InvalidArgument("step_seconds must be positive");
  }
  // Resistances are per kW; heat flows are converted to W before dividing by J/degC.
  constexpr double kW = 1000.0;
  const double g_a = kW / params.r_a;
  const double g_m = kW / params.r_m;
  const double air_gain = kW * (params.a_s * q_s + (hvac_on ? params.a_c * params.q_ac : 0.0));
  const double mass_gain = kW * (1.0 - params.a_s) * q_s;

  double t_a = state.t_a;
  double t_m = state.t_m;
  double remaining = step_seconds;
  while (remaining > 0.0) {
    const double dt = remaining < params.substep_seconds ? remaining : params.substep_seconds;
    const double d_a = (g_a * (t_o - t_a) + g_m * (t_m - t_a) + air_gain) / params.c_a;
    const double d_m = (g_m * (t_a - t_m) + mass_gain) / params.c_m;
    t_a += dt * d_a;
    t_m += dt * d_m;
    remaining -= dt;
  }

  if (!std::isfinite(t_a) || !std::isfinite(t_m) ||
      std::abs(t_a - t_m) > params.sanity_bound) {
    throw IntegrationDivergence("ETP integration diverged (t_a=" + std::to_string(t_a) +
                                ", t_m=" + std::to_string(t_m) + "); reduce the substep");
  }
  return {t_a, t_m};
}

std::vector<EtpState> simulate_day(const EtpState& initial, const EtpParams& params,
                                   const Scenario& scenario, std::span<const int> actions) {
  if (actions.size() != scenario.size()) {
    throw InvalidArgument("simulate_day: " + std::to_string(actions.size()) +
                          " actions for a scenario of " + std::to_string(scenario.size()) +
                          " steps");
  }
  std::vector<EtpState> trajectory;
  trajectory.reserve(actions.size());
  EtpState state = initial;
  for (std::size_t k = 0; k < actions.size(); ++k) {
    state = step_etp(state, params, scenario.outside_temp[k],
                     solar_heat_gain(params, scenario.solar[k]), actions[k] != 0,
                     scenario.step_seconds);
    trajectory.push_back(state);
  }
  return trajectory;
}

}  // namespace mabrl
