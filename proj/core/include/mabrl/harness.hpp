#pragma once

// Multi-day closed-loop experiments: learn from the growing batch, rebuild the
// policy at fixed steps of each day, dispatch with exploration through the
// backup controller, and log every step.

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "mabrl/config.hpp"
#include "mabrl/elm.hpp"
#include "mabrl/fqi.hpp"
#include "mabrl/policy_grid.hpp"
#include "mabrl/shaping.hpp"

namespace mabrl {

struct StepRecord {
  int day = 1;
  int step = 0;        // within the day
  StateVector x;
  double t_m = 0.0;    // envelope temperature before the step (not observed by the agent)
  int u = 0;
  int u_phys = 0;
  double cost = 0.0;
  double epsilon = 0.0;
};

struct DayLog {
  int day = 1;
  std::vector<StepRecord> steps;
  double cost = 0.0;
  double cumulative_cost = 0.0;
  // Optimum for this day from the controller's own start-of-day state; NaN
  // when not computed.
  double optimal_cost = std::numeric_limits<double>::quiet_NaN();
  std::size_t violations = 0;
};

struct RunDiagnostics {
  std::size_t comfort_violations = 0;
  double max_elm_residual = 0.0;    // relative normal-equations residual
  std::size_t elm_trainings = 0;
  std::size_t policy_builds = 0;
  std::size_t virtual_tuples = 0;   // total accepted over all builds
};

struct RunResult {
  Controller controller = Controller::Mabrl;
  std::uint64_t seed = 0;
  std::vector<DayLog> days;
  std::vector<ExperienceTuple> experience;  // full experimental batch at the end
  RunDiagnostics diagnostics;
};

// Inputs shared by every policy build at one recompute time.
struct PolicyContext {
  Forecast exogenous;            // quarter-indexed
  std::vector<double> prices;    // quarter-indexed
  StateScale scale;
  ComfortBounds bounds;
  CostModel cost;
};

struct PolicyBuild {
  Batch batch;
  VirtualTupleResult virtual_result;
  VirtualTupleParams virtual_params;
  QFunction q;
  ShapedPolicy shaped;
};

// Support-model training rows: normalized (state, applied action) -> change of
// indoor temperature.
TrainSet support_training_set(std::span<const ExperienceTuple> experience, const StateScale& scale);

// Trains the ELM ensemble with the hidden count chosen by cross-validation.
// `max_residual` receives the largest member residual.
ElmEnsemble train_support_model(std::span<const ExperienceTuple> experience,
                                const StateScale& scale, const SupportModelConfig& config,
                                std::uint64_t seed, double* max_residual = nullptr);

// Virtual tuples (when `model` is given), fitted Q-iteration and shaping.
PolicyBuild build_policy(std::span<const ExperienceTuple> experience, const ElmEnsemble* model,
                         const PolicyContext& context, const ExperimentConfig& config,
                         std::uint64_t seed);

PolicyContext policy_context(const Scenario& scenario, std::size_t start_step,
                             const ExperimentConfig& config, std::uint64_t seed);

struct RecomputeEvent {
  int day;
  int step;
  const PolicyBuild& build;
};

struct HarnessHooks {
  std::function<void(const RecomputeEvent&)> on_recompute;
};

// Scenario used by a run for `seed`: the configured CSV or the synthetic
// generator, covering days + 1 so the last day's forecasts are available.
Scenario experiment_scenario(const ExperimentConfig& config, std::uint64_t seed);

RunResult run_experiment(const ExperimentConfig& config, Controller controller,
                         std::uint64_t seed, const HarnessHooks& hooks = {});

// Whether T_next left the band by more than one step of the dynamics could
// explain, or a forced backup action was not applied.
bool comfort_violation(const StateVector& x, double t_m, int u_phys, double t_next,
                       const EtpParams& params, const ComfortBounds& bounds, double step_seconds);

// Fraction of equal cells; throws InvalidArgument on a shape mismatch.
double policy_overlap(const PolicyGrid& a, const PolicyGrid& b);

}  // namespace mabrl
