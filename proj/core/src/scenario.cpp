#include "mabrl/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <string>

#include "csv_util.hpp"
#include "mabrl/error.hpp"
#include "mabrl/rng.hpp"

namespace mabrl {

void Scenario::validate() const {
  if (solar.size() != outside_temp.size() || price.size() != outside_temp.size()) {
    throw InvalidArgument("scenario sequences must have equal length");
  }
  if (steps_per_day <= 0 || !(step_seconds > 0.0) ||
      std::abs(steps_per_day * step_seconds - 86400.0) > 1e-9) {
    throw InvalidArgument("scenario steps_per_day * step_seconds must equal 86400");
  }
  for (std::size_t k = 0; k < size(); ++k) {
    if (!std::isfinite(outside_temp[k]) || !std::isfinite(solar[k]) || !std::isfinite(price[k])) {
      throw InvalidArgument("scenario contains a non-finite value at step " + std::to_string(k));
    }
    if (price[k] < 0.0) {
      throw InvalidArgument("scenario price is negative at step " + std::to_string(k));
    }
  }
}

Scenario Scenario::slice(std::size_t start, std::size_t count) const {
  if (start + count > size()) {
    throw InvalidArgument("scenario slice [" + std::to_string(start) + ", " +
                          std::to_string(start + count) + ") exceeds length " +
                          std::to_string(size()));
  }
  Scenario out;
  out.steps_per_day = steps_per_day;
  out.step_seconds = step_seconds;
  const auto first = static_cast<std::ptrdiff_t>(start);
  const auto last = static_cast<std::ptrdiff_t>(start + count);
  out.outside_temp.assign(outside_temp.begin() + first, outside_temp.begin() + last);
  out.solar.assign(solar.begin() + first, solar.begin() + last);
  out.price.assign(price.begin() + first, price.begin() + last);
  return out;
}

Forecast make_forecast(const Scenario& scenario, std::size_t start, std::size_t horizon,
                       ForecastNoise noise, std::uint64_t seed) {
  if (start + horizon > scenario.size()) {
    throw InvalidArgument("forecast horizon overruns the scenario (start " +
                          std::to_string(start) + ", horizon " + std::to_string(horizon) +
                          ", length " + std::to_string(scenario.size()) + ")");
  }
  if (noise.outside_temp_std < 0.0 || noise.solar_std < 0.0) {
    throw InvalidArgument("forecast noise std must be nonnegative");
  }
  Forecast f;
  f.outside_temp_hat.resize(horizon);
  f.solar_hat.resize(horizon);
  Rng rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (std::size_t h = 0; h < horizon; ++h) {
    const double et = gauss(rng);
    const double es = gauss(rng);
    f.outside_temp_hat[h] = scenario.outside_temp[start + h] + noise.outside_temp_std * et;
    const double s = scenario.solar[start + h] + noise.solar_std * es;
    f.solar_hat[h] = noise.solar_std > 0.0 ? std::max(0.0, s) : s;
  }
  return f;
}

namespace {

constexpr const char* kScenarioHeader = "step,t_out_c,solar_kw,price_eur_kwh";

}  // namespace

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw FormatError("cannot open scenario file " + path.string());
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw FormatError("scenario file is empty: " + path.string());
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kScenarioHeader) {
    throw FormatError("unexpected scenario header '" + line + "'");
  }
  Scenario s;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = csv::split(line);
    if (fields.size() != 4) {
      throw FormatError("line " + std::to_string(lineno) + ": expected 4 fields, got " +
                        std::to_string(fields.size()));
    }
    const double step = csv::to_double(fields[0], lineno);
    if (step != static_cast<double>(s.size())) {
      throw FormatError("line " + std::to_string(lineno) + ": step index out of sequence");
    }
    s.outside_temp.push_back(csv::to_double(fields[1], lineno));
    s.solar.push_back(csv::to_double(fields[2], lineno));
    s.price.push_back(csv::to_double(fields[3], lineno));
  }
  s.validate();
  return s;
}

void save_scenario(const Scenario& scenario, const std::filesystem::path& path) {
  scenario.validate();
  std::ofstream out(path);
  if (!out) {
    throw FormatError("cannot write scenario file " + path.string());
  }
  out << kScenarioHeader << '\n';
  out << std::setprecision(17);
  for (std::size_t k = 0; k < scenario.size(); ++k) {
    out << k << ',' << scenario.outside_temp[k] << ',' << scenario.solar[k] << ','
        << scenario.price[k] << '\n';
  }
  if (!out) {
    throw FormatError("write failed for " + path.string());
  }
}

Scenario synthetic_scenario(std::size_t days, std::uint64_t seed,
                            const SyntheticScenarioParams& p) {
  Scenario s;
  const std::size_t spd = static_cast<std::size_t>(s.steps_per_day);
  const std::size_t n = days * spd;
  s.outside_temp.resize(n);
  s.solar.resize(n);
  s.price.resize(n);

  Rng rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // AR(1) daily means. Day d blends from means[d] into means[d + 1]; each mean
  // is drawn just before the day that first needs it, so a longer scenario
  // starts with the same days as a shorter one from the same seed.
  std::vector<double> means;
  means.reserve(days + 1);
  constexpr double kPersistence = 0.7;
  const double innovation = p.daily_mean_spread * std::sqrt(1.0 - kPersistence * kPersistence);
  means.push_back(p.mean_temp + p.daily_mean_spread * gauss(rng));

  const double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t d = 0; d < days; ++d) {
    means.push_back(p.mean_temp + kPersistence * (means[d] - p.mean_temp) + innovation * gauss(rng));
    const double amplitude = p.diurnal_amplitude * uniform(rng, 0.6, 1.2);
    const double cloud = uniform(rng, 0.2, 1.0);
    const double level = p.price_base * uniform(rng, 0.8, 1.25);
    const double peak = p.price_peak * uniform(rng, 0.6, 1.4);
    double hour_price = 0.0;
    for (std::size_t q = 0; q < spd; ++q) {
      const std::size_t k = d * spd + q;
      const double hour = 24.0 * static_cast<double>(q) / static_cast<double>(spd);
      const double frac = static_cast<double>(q) / static_cast<double>(spd);
      const double base = means[d] + (means[d + 1] - means[d]) * frac;
      s.outside_temp[k] = base + amplitude * std::cos(two_pi * (hour - 15.0) / 24.0);

      const double daylight = (hour - 8.0) / 9.0;
      s.solar[k] = (daylight > 0.0 && daylight < 1.0)
                       ? p.solar_peak * cloud * std::pow(std::sin(std::numbers::pi * daylight), 1.5)
                       : 0.0;

      // Hourly blocks: night trough, morning and evening peaks.
      if (q % 4 == 0) {
        double shape = 0.0;
        if (hour < 6.0) {
          shape = -0.3 * level;
        } else if (hour >= 7.0 && hour < 10.0) {
          shape = peak;
        } else if (hour >= 17.0 && hour < 21.0) {
          shape = 1.2 * peak;
        } else if (hour >= 22.0) {
          shape = -0.15 * level;
        }
        hour_price = std::max(0.005, level + shape + p.price_noise * gauss(rng));
      }
      s.price[k] = hour_price;
    }
  }
  return s;
}

}  // namespace mabrl
