#pragma once

// Model-assisted fitted Q-iteration. Experimental transitions are optionally
// augmented with virtual transitions labelled by the ELM support model in
// sparsely sampled regions, and the Q-function is regressed with extra-trees
// while the next-state exogenous inputs are replaced by their forecast.

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "mabrl/backup.hpp"
#include "mabrl/elm.hpp"
#include "mabrl/extratrees.hpp"
#include "mabrl/policy_grid.hpp"
#include "mabrl/scenario.hpp"

namespace mabrl {

struct ExperienceTuple {
  StateVector x;
  int u = 0;        // requested action
  StateVector x_next;
  int u_phys = 0;   // applied action after the backup controller

  // next quarter follows x.quarter and x_next.u_prev equals u_phys.
  bool consistent() const {
    return x.valid() && x_next.valid() && x_next.quarter == next_quarter(x.quarter) &&
           x_next.u_prev == u_phys && (u == 0 || u == 1) && (u_phys == 0 || u_phys == 1);
  }

  friend bool operator==(const ExperienceTuple&, const ExperienceTuple&) = default;
};

struct Batch {
  std::vector<ExperienceTuple> experimental;  // observed transitions
  std::vector<ExperienceTuple> virtual_tuples;  // model-labelled transitions

  std::size_t size() const { return experimental.size() + virtual_tuples.size(); }
};

using NormalizedState = std::array<double, 5>;

// Physical ranges used to map states onto [0, 1] per dimension. The quarter
// maps 1..96 -> 0..1 and u_prev is already binary.
struct StateScale {
  double t_in_lo = 14.0;
  double t_in_hi = 29.0;
  double t_out_lo = -15.0;
  double t_out_hi = 20.0;
  double solar_lo = 0.0;
  double solar_hi = 1.0;

  NormalizedState normalize(const StateVector& x) const;

  // Six-dimensional raw -> [0, 1] map for (quarter, t_in, t_out, solar,
  // u_prev, action) rows, as used by the support model.
  MinMaxScaler state_action_scaler() const;

  // Indoor range = comfort band +/- t_in_margin; exogenous ranges from the
  // scenario extremes.
  static StateScale from(const Scenario& scenario, const ComfortBounds& bounds,
                         double t_in_margin = 3.0);
};

// Euclidean norm over the normalized state plus |u_a - u_b|.
double tuple_distance(const NormalizedState& a, int u_a, const NormalizedState& b, int u_b);

// Quarter-indexed exogenous profile: element q - 1 holds quarter q. Built from
// a forecast starting at `start_step`, so entries for quarters already past in
// the current day refer to the following day.
Forecast forecast_by_quarter(const Scenario& scenario, std::size_t start_step,
                             ForecastNoise noise, std::uint64_t seed);
std::vector<double> prices_by_quarter(const Scenario& scenario, std::size_t start_step);

struct VirtualTupleParams {
  double radius = 0.1;                    // r, normalized units
  std::optional<std::size_t> max_count;   // n; defaults to count_ratio * #experimental
  double count_ratio = 1.0;
  std::optional<std::size_t> budget;      // H; defaults to 20 n
  double t_in_margin = 1.0;               // candidates drawn within bounds +/- margin
};

struct VirtualTupleResult {
  std::vector<ExperienceTuple> tuples;
  std::size_t draws = 0;
  std::size_t max_count = 0;
  std::size_t budget = 0;
};

// Random (state, action) candidates are accepted when their distance to every
// experimental tuple exceeds the radius; accepted candidates are filtered
// through the backup controller and labelled with the ensemble's predicted
// temperature change. Exogenous values come from `exogenous` (quarter-indexed).
VirtualTupleResult generate_virtual_tuples(std::span<const ExperienceTuple> experimental,
                                           const ElmEnsemble& model,
                                           const VirtualTupleParams& params,
                                           const ComfortBounds& bounds, const StateScale& scale,
                                           const Forecast& exogenous, std::uint64_t seed);

// Raw support-model input (quarter, t_in, t_out, solar, u_prev, u_phys).
std::array<double, 6> support_model_input(const StateVector& x, int u_phys);

struct CostModel {
  double p_elec = 2.0;       // kW
  double step_hours = 0.25;
};

struct FqiParams {
  std::size_t iterations = 96;
  ForestParams forest;
};

struct QFunction {
  Forest forest;
  StateScale scale;

  double value(const StateVector& x, int u) const;
};

// Observer invoked once per iteration with the per-tuple stage costs and the
// regression targets (experimental tuples first, then virtual ones).
using FqiObserver = std::function<void(std::size_t iteration, std::span<const double> costs,
                                       std::span<const double> targets)>;

// `exogenous` and `prices` are quarter-indexed (96 entries).
QFunction fitted_q_iteration(const Batch& batch, const Forecast& exogenous,
                             std::span<const double> prices, const StateScale& scale,
                             const CostModel& cost, const FqiParams& params, std::uint64_t seed,
                             const FqiObserver& observer = {});

// argmin over {0, 1}; exact ties go to 0.
int greedy_action(const QFunction& q, const StateVector& x);

// Greedy action at every (quarter, temperature) with forecast exogenous values
// and u_prev = 0.
PolicyGrid extract_policy_grid(const QFunction& q, const Forecast& exogenous,
                               std::span<const double> temps);

// Batch persistence, one row per tuple with an E/M origin column.
void save_batch(const Batch& batch, const std::filesystem::path& path);
Batch load_batch(const std::filesystem::path& path);

}  // namespace mabrl
