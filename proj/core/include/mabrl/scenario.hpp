#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace mabrl {

// Exogenous inputs per control step.
struct Scenario {
  std::vector<double> outside_temp;  // degC
  std::vector<double> solar;         // kW solar heat gain
  std::vector<double> price;         // EUR/kWh
  int steps_per_day = 96;
  double step_seconds = 900.0;

  std::size_t size() const { return outside_temp.size(); }
  std::size_t days() const { return size() / static_cast<std::size_t>(steps_per_day); }
  double step_hours() const { return step_seconds / 3600.0; }

  // Throws InvalidArgument on mismatched lengths, negative prices, non-finite
  // values or a day length other than 86400 s.
  void validate() const;

  // Steps [start, start + count) as a new scenario.
  Scenario slice(std::size_t start, std::size_t count) const;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

struct Forecast {
  std::vector<double> outside_temp_hat;
  std::vector<double> solar_hat;

  std::size_t horizon() const { return outside_temp_hat.size(); }
};

struct ForecastNoise {
  double outside_temp_std = 0.0;  // degC
  double solar_std = 0.0;         // kW
};

// True exogenous slice [start, start + horizon) plus independent zero-mean
// Gaussian noise. Solar forecasts are clipped at zero. Deterministic for a
// given seed.
Forecast make_forecast(const Scenario& scenario, std::size_t start, std::size_t horizon,
                       ForecastNoise noise, std::uint64_t seed);

// CSV with header `step,t_out_c,solar_kw,price_eur_kwh`.
Scenario load_scenario(const std::filesystem::path& path);
void save_scenario(const Scenario& scenario, const std::filesystem::path& path);

// Parameters for the synthetic winter generator used in simulated experiments.
struct SyntheticScenarioParams {
  double mean_temp = 3.0;         // degC, seasonal mean of daily means
  double daily_mean_spread = 4.0; // degC, std of day-to-day mean
  double diurnal_amplitude = 3.5; // degC
  double solar_peak = 0.15;       // kW on a clear day
  double price_base = 0.045;      // EUR/kWh
  double price_peak = 0.030;      // EUR/kWh added at morning/evening peaks
  double price_noise = 0.006;     // EUR/kWh per-step noise std
};

// Day-varying weather and day-ahead-like price profiles. Deterministic for a
// given seed.
Scenario synthetic_scenario(std::size_t days, std::uint64_t seed,
                            const SyntheticScenarioParams& params = {});

}  // namespace mabrl
