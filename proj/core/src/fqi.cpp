#include "mabrl/fqi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mabrl/error.hpp"
#include "mabrl/rng.hpp"

namespace mabrl {

namespace {

constexpr std::size_t kQuarters = kQuartersPerDay;

double unit(double x, double lo, double hi) { return hi > lo ? (x - lo) / (hi - lo) : 0.0; }

std::array<double, 6> q_row(const NormalizedState& s, int u) {
  return {s[0], s[1], s[2], s[3], s[4], static_cast<double>(u)};
}

void check_quarter_profile(const Forecast& exogenous, std::span<const double> prices) {
  if (exogenous.horizon() != kQuarters || exogenous.solar_hat.size() != kQuarters) {
    throw InvalidArgument("quarter-indexed forecast must have 96 entries, got " +
                          std::to_string(exogenous.horizon()));
  }
  if (prices.size() != kQuarters) {
    throw InvalidArgument("quarter-indexed prices must have 96 entries, got " +
                          std::to_string(prices.size()));
  }
}

// Experimental tuples bucketed by (u, u_prev) and sorted by normalized
// quarter. For radii below 1 a differing action or previous action alone puts
// a tuple out of range, so only the matching bucket and quarter window are
// scanned.
class ExperimentalIndex {
 public:
  ExperimentalIndex(std::span<const ExperienceTuple> tuples, const StateScale& scale) {
    all_.reserve(tuples.size());
    for (const auto& t : tuples) {
      Entry e{scale.normalize(t.x), t.u};
      all_.push_back(e);
      buckets_[bucket(t.u, t.x.u_prev)].push_back(e);
    }
    for (auto& b : buckets_) {
      std::sort(b.begin(), b.end(), [](const Entry& a, const Entry& c) { return a.s[0] < c.s[0]; });
    }
  }

  // True when some experimental tuple lies at distance <= radius.
  bool any_within(const NormalizedState& s, int u, double radius) const {
    if (radius < 1.0) {
      const int u_prev = s[4] > 0.5 ? 1 : 0;
      const auto& b = buckets_[bucket(u, u_prev)];
      auto it = std::lower_bound(b.begin(), b.end(), s[0] - radius,
                                 [](const Entry& e, double v) { return e.s[0] < v; });
      for (; it != b.end() && it->s[0] <= s[0] + radius; ++it) {
        if (tuple_distance(it->s, it->u, s, u) <= radius) return true;
      }
      return false;
    }
    return std::any_of(all_.begin(), all_.end(), [&](const Entry& e) {
      return tuple_distance(e.s, e.u, s, u) <= radius;
    });
  }

 private:
  struct Entry {
    NormalizedState s;
    int u;
  };
  static std::size_t bucket(int u, int u_prev) { return static_cast<std::size_t>(2 * u + u_prev); }

  std::vector<Entry> all_;
  std::array<std::vector<Entry>, 4> buckets_;
};

}  // namespace

NormalizedState StateScale::normalize(const StateVector& x) const {
  return {static_cast<double>(x.quarter - 1) / static_cast<double>(kQuarters - 1),
          unit(x.t_in, t_in_lo, t_in_hi), unit(x.t_out, t_out_lo, t_out_hi),
          unit(x.solar, solar_lo, solar_hi), static_cast<double>(x.u_prev)};
}

MinMaxScaler StateScale::state_action_scaler() const {
  return MinMaxScaler{{1.0, t_in_lo, t_out_lo, solar_lo, 0.0, 0.0},
                      {static_cast<double>(kQuarters), t_in_hi, t_out_hi, solar_hi, 1.0, 1.0}};
}

StateScale StateScale::from(const Scenario& scenario, const ComfortBounds& bounds,
                            double t_in_margin) {
  StateScale s;
  s.t_in_lo = bounds.min_lower() - t_in_margin;
  s.t_in_hi = bounds.max_upper() + t_in_margin;
  if (scenario.size() > 0) {
    const auto [tlo, thi] = std::minmax_element(scenario.outside_temp.begin(), scenario.outside_temp.end());
    s.t_out_lo = *tlo;
    s.t_out_hi = *thi > *tlo ? *thi : *tlo + 1.0;
    const auto [slo, shi] = std::minmax_element(scenario.solar.begin(), scenario.solar.end());
    s.solar_lo = std::min(0.0, *slo);
    s.solar_hi = *shi > s.solar_lo ? *shi : s.solar_lo + 1.0;
  }
  return s;
}

double tuple_distance(const NormalizedState& a, int u_a, const NormalizedState& b, int u_b) {
  double sq = 0.0;
  for (std::size_t d = 0; d < a.size(); ++d) {
    const double diff = a[d] - b[d];
    sq += diff * diff;
  }
  return std::sqrt(sq) + std::abs(static_cast<double>(u_a - u_b));
}

Forecast forecast_by_quarter(const Scenario& scenario, std::size_t start_step, ForecastNoise noise,
                             std::uint64_t seed) {
  const Forecast f = make_forecast(scenario, start_step, kQuarters, noise, seed);
  Forecast out;
  out.outside_temp_hat.resize(kQuarters);
  out.solar_hat.resize(kQuarters);
  for (std::size_t h = 0; h < kQuarters; ++h) {
    const std::size_t q_index = (start_step + h) % kQuarters;
    out.outside_temp_hat[q_index] = f.outside_temp_hat[h];
    out.solar_hat[q_index] = f.solar_hat[h];
  }
  return out;
}

std::vector<double> prices_by_quarter(const Scenario& scenario, std::size_t start_step) {
  if (start_step + kQuarters > scenario.size()) {
    throw InvalidArgument("price window overruns the scenario");
  }
  std::vector<double> out(kQuarters);
  for (std::size_t h = 0; h < kQuarters; ++h) {
    out[(start_step + h) % kQuarters] = scenario.price[start_step + h];
  }
  return out;
}

std::array<double, 6> support_model_input(const StateVector& x, int u_phys) {
  return {static_cast<double>(x.quarter), x.t_in, x.t_out, x.solar,
          static_cast<double>(x.u_prev), static_cast<double>(u_phys)};
}

VirtualTupleResult generate_virtual_tuples(std::span<const ExperienceTuple> experimental,
                                           const ElmEnsemble& model,
                                           const VirtualTupleParams& params,
                                           const ComfortBounds& bounds, const StateScale& scale,
                                           const Forecast& exogenous, std::uint64_t seed) {
  if (!(params.radius >= 0.0)) throw InvalidArgument("virtual tuple radius must be >= 0");
  if (exogenous.horizon() != kQuarters) {
    throw InvalidArgument("virtual tuples need a quarter-indexed exogenous profile");
  }
  VirtualTupleResult result;
  if (!(params.count_ratio >= 0.0)) throw InvalidArgument("virtual tuple count ratio must be >= 0");
  result.max_count = params.max_count.value_or(static_cast<std::size_t>(
      std::llround(params.count_ratio * static_cast<double>(experimental.size()))));
  result.budget = params.budget.value_or(20 * result.max_count);
  if (result.max_count == 0) return result;
  if (model.input_dim() != 6) {
    throw InvalidArgument("support model must take 6 inputs, has " +
                          std::to_string(model.input_dim()));
  }

  const ExperimentalIndex index(experimental, scale);
  Rng rng(seed);
  while (result.tuples.size() < result.max_count && result.draws < result.budget) {
    ++result.draws;
    StateVector x;
    x.quarter = 1 + static_cast<int>(rng() % kQuarters);
    x.t_in = uniform(rng, bounds.lower_at(x.quarter) - params.t_in_margin,
                     bounds.upper_at(x.quarter) + params.t_in_margin);
    x.t_out = exogenous.outside_temp_hat[static_cast<std::size_t>(x.quarter - 1)];
    x.solar = exogenous.solar_hat[static_cast<std::size_t>(x.quarter - 1)];
    x.u_prev = uniform01(rng) < 0.5 ? 1 : 0;
    const int u = uniform01(rng) < 0.5 ? 1 : 0;

    if (index.any_within(scale.normalize(x), u, params.radius)) continue;

    const int u_phys = apply_backup(x, u, bounds);
    const double delta = model.predict_raw(support_model_input(x, u_phys));
    StateVector next;
    next.quarter = next_quarter(x.quarter);
    next.t_in = x.t_in + delta;
    next.t_out = exogenous.outside_temp_hat[static_cast<std::size_t>(next.quarter - 1)];
    next.solar = exogenous.solar_hat[static_cast<std::size_t>(next.quarter - 1)];
    next.u_prev = u_phys;
    result.tuples.push_back({x, u, next, u_phys});
  }
  return result;
}

double QFunction::value(const StateVector& x, int u) const {
  const auto row = q_row(scale.normalize(x), u);
  return predict_forest(forest, row);
}

QFunction fitted_q_iteration(const Batch& batch, const Forecast& exogenous,
                             std::span<const double> prices, const StateScale& scale,
                             const CostModel& cost, const FqiParams& params, std::uint64_t seed,
                             const FqiObserver& observer) {
  if (batch.size() == 0) throw InvalidArgument("fitted_q_iteration: empty batch");
  if (params.iterations < 1) throw InvalidArgument("fitted_q_iteration: need >= 1 iteration");
  check_quarter_profile(exogenous, prices);

  const std::size_t n = batch.size();
  RowMatrix rows(n, 6);
  RowMatrix next_rows(n, 6);  // action column filled per evaluation
  std::vector<double> costs(n);

  std::size_t l = 0;
  for (const auto* set : {&batch.experimental, &batch.virtual_tuples}) {
    for (const auto& t : *set) {
      if (!t.x.valid() || !t.x_next.valid()) {
        throw InvalidArgument("fitted_q_iteration: tuple " + std::to_string(l) +
                              " has an invalid state");
      }
      const auto row = q_row(scale.normalize(t.x), t.u);
      std::copy(row.begin(), row.end(), rows.row(l).begin());

      StateVector next = t.x_next;
      const auto qi = static_cast<std::size_t>(next.quarter - 1);
      next.t_out = exogenous.outside_temp_hat[qi];
      next.solar = exogenous.solar_hat[qi];
      const auto nrow = q_row(scale.normalize(next), 0);
      std::copy(nrow.begin(), nrow.end(), next_rows.row(l).begin());

      costs[l] = stage_cost(t.u_phys, prices[static_cast<std::size_t>(t.x.quarter - 1)],
                            cost.p_elec, cost.step_hours);
      ++l;
    }
  }

  QFunction q;
  q.scale = scale;
  std::vector<double> targets(n);
  std::vector<double> next_value(n, 0.0);  // min_u Q_{N-1}(x', u); Q_0 = 0
  for (std::size_t iter = 1; iter <= params.iterations; ++iter) {
    for (std::size_t i = 0; i < n; ++i) targets[i] = costs[i] + next_value[i];
    if (observer) observer(iter, costs, targets);
    q.forest = fit_forest(rows, targets, params.forest, derive_seed(seed, iter));
    if (iter == params.iterations) break;
    for (std::size_t i = 0; i < n; ++i) {
      auto r = next_rows.row(i);
      r[5] = 0.0;
      const double off = predict_forest(q.forest, r);
      r[5] = 1.0;
      const double on = predict_forest(q.forest, r);
      next_value[i] = std::min(off, on);
    }
  }
  return q;
}

int greedy_action(const QFunction& q, const StateVector& x) {
  return q.value(x, 1) < q.value(x, 0) ? 1 : 0;
}

PolicyGrid extract_policy_grid(const QFunction& q, const Forecast& exogenous,
                               std::span<const double> temps) {
  if (exogenous.horizon() != kQuarters) {
    throw InvalidArgument("policy grid needs a quarter-indexed exogenous profile");
  }
  PolicyGrid grid;
  grid.temps.assign(temps.begin(), temps.end());
  grid.actions.assign(kQuarters, std::vector<int>(temps.size(), 0));
  for (std::size_t qi = 0; qi < kQuarters; ++qi) {
    StateVector x;
    x.quarter = static_cast<int>(qi) + 1;
    x.t_out = exogenous.outside_temp_hat[qi];
    x.solar = exogenous.solar_hat[qi];
    x.u_prev = 0;
    for (std::size_t i = 0; i < temps.size(); ++i) {
      x.t_in = temps[i];
      grid.actions[qi][i] = greedy_action(q, x);
    }
  }
  return grid;
}

}  // namespace mabrl
