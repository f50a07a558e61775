#pragma once

// Two-node equivalent thermal parameter (ETP) model of a heated room:
// indoor air coupled to the outside through r_a and to the building
// envelope through r_m. Heat flows are in kW, capacitances in J/degC.

#include <span>
#include <vector>

namespace mabrl {

struct EtpParams {
  double r_a = 110.0;     // degC/kW, air <-> outside
  double c_a = 2.5e6;     // J/degC, indoor air
  double r_m = 2000.0;    // degC/kW, air <-> envelope
  double c_m = 1.2e7;     // J/degC, envelope
  double a_s = 0.5;       // solar fraction into the air node
  double a_c = 1.0;       // HVAC fraction into the air node
  double q_ac = 6.0;      // kW thermal when ON
  double p_elec = 2.0;    // kW electrical when ON
  double solar_aperture = 1.0;   // maps scenario solar column to heat gain Q_s (kW per kW)
  double substep_seconds = 60.0;
  double sanity_bound = 50.0;    // max |t_a - t_m| accepted, degC

  // Throws InvalidArgument when a field violates its physical range.
  void validate() const;
};

struct EtpState {
  double t_a = 20.0;
  double t_m = 20.0;

  friend bool operator==(const EtpState&, const EtpState&) = default;
};

// Advances the state by one control step with explicit Euler substeps of
// params.substep_seconds (the final substep is shortened if needed).
// Throws IntegrationDivergence if the result is not finite or leaves the
// sanity bound.
EtpState step_etp(const EtpState& state, const EtpParams& params, double t_o,
                  double q_s, bool hvac_on, double step_seconds);

struct Scenario;

// Folds step_etp over the scenario. Returns the states *after* each step, so
// the result has the same length as `actions`.
std::vector<EtpState> simulate_day(const EtpState& initial, const EtpParams& params,
                                   const Scenario& scenario, std::span<const int> actions);

// Heat gain in kW delivered to the model for a scenario solar value.
inline double solar_heat_gain(const EtpParams& params, double solar) {
  return params.solar_aperture * solar;
}

}  // namespace mabrl
