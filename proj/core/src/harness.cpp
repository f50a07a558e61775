#include "mabrl/harness.hpp"

#include <algorithm>
#include <memory>
#include <string>

#include "mabrl/dispatch.hpp"
#include "mabrl/error.hpp"
#include "mabrl/etp.hpp"
#include "mabrl/optimal.hpp"
#include "mabrl/rng.hpp"

namespace mabrl {

namespace {

// Independent RNG streams per run.
enum Stream : std::uint64_t {
  kScenarioStream = 1,
  kDispatchStream = 2,
  kSupportStream = 3,
  kForecastStream = 4,
  kPolicyStream = 5,
};

std::uint64_t stream_seed(std::uint64_t seed, Stream s, std::uint64_t index) {
  return derive_seed(derive_seed(seed, s), index);
}

bool is_learning(Controller c) { return c == Controller::Mabrl || c == Controller::Brl; }

}  // namespace

TrainSet support_training_set(std::span<const ExperienceTuple> experience, const StateScale& scale) {
  const MinMaxScaler scaler = scale.state_action_scaler();
  TrainSet train;
  train.inputs = RowMatrix(0, 6);
  train.targets.reserve(experience.size());
  for (const auto& t : experience) {
    const auto raw = support_model_input(t.x, t.u_phys);
    train.inputs.push_row(scaler.apply(raw));
    train.targets.push_back(t.x_next.t_in - t.x.t_in);
  }
  return train;
}

ElmEnsemble train_support_model(std::span<const ExperienceTuple> experience,
                                const StateScale& scale, const SupportModelConfig& config,
                                std::uint64_t seed, double* max_residual) {
  if (experience.empty()) throw InvalidArgument("support model needs at least one tuple");
  const TrainSet train = support_training_set(experience, scale);
  std::size_t hidden = config.hidden_candidates.front();
  if (config.hidden_candidates.size() > 1 && train.size() >= config.folds) {
    hidden = select_hidden_count(train, config.hidden_candidates, config.folds,
                                 config.regularization, derive_seed(seed, 1));
  }
  ElmEnsemble ens = train_ensemble(
      train, ElmEnsembleParams{config.ensemble_size, hidden, config.regularization}, derive_seed(seed, 2));
  ens.input_scaler = scale.state_action_scaler();
  if (max_residual) {
    *max_residual = 0.0;
    for (const auto& m : ens.members) *max_residual = std::max(*max_residual, m.train_residual);
  }
  return ens;
}

PolicyContext policy_context(const Scenario& scenario, std::size_t start_step,
                             const ExperimentConfig& config, std::uint64_t seed) {
  PolicyContext ctx;
  ctx.exogenous = forecast_by_quarter(scenario, start_step, config.scenario.forecast_noise, seed);
  ctx.prices = prices_by_quarter(scenario, start_step);
  ctx.scale = StateScale::from(scenario, config.bounds, config.scale_margin);
  ctx.bounds = config.bounds;
  ctx.cost = CostModel{config.etp.p_elec, scenario.step_hours()};
  return ctx;
}

PolicyBuild build_policy(std::span<const ExperienceTuple> experience, const ElmEnsemble* model,
                         const PolicyContext& context, const ExperimentConfig& config,
                         std::uint64_t seed) {
  if (experience.empty()) throw InvalidArgument("build_policy: empty experimental batch");
  PolicyBuild b;
  b.batch.experimental.assign(experience.begin(), experience.end());
  if (model) {
    b.virtual_params = config.virtual_tuples;
    b.virtual_result = generate_virtual_tuples(experience, *model, b.virtual_params, context.bounds,
                                               context.scale, context.exogenous, derive_seed(seed, 1));
    b.batch.virtual_tuples = b.virtual_result.tuples;
  } else {
    b.virtual_params.max_count = 0;
  }
  b.q = fitted_q_iteration(b.batch, context.exogenous, context.prices, context.scale, context.cost,
                           config.fqi, derive_seed(seed, 2));

  // Greedy actions at every batch state, evaluated with the forecast
  // exogenous inputs of its quarter.
  std::vector<PolicySample> samples;
  samples.reserve(b.batch.size());
  auto add = [&](const ExperienceTuple& t) {
    const auto qi = static_cast<std::size_t>(t.x.quarter - 1);
    const StateVector s{t.x.quarter, t.x.t_in, context.exogenous.outside_temp_hat[qi],
                        context.exogenous.solar_hat[qi], 0};
    samples.push_back({t.x.quarter, t.x.t_in, greedy_action(b.q, s)});
  };
  for (const auto& t : b.batch.experimental) add(t);
  for (const auto& t : b.batch.virtual_tuples) add(t);
  b.shaped = fit_shaped_policy(samples, config.shaping_grid, config.shaping_solver);
  return b;
}

Scenario experiment_scenario(const ExperimentConfig& config, std::uint64_t seed) {
  const std::size_t needed = (config.days + 1) * kQuartersPerDay;
  if (config.scenario.csv) {
    Scenario s = load_scenario(*config.scenario.csv);
    if (s.size() < needed) {
      throw InvalidArgument("scenario " + config.scenario.csv->string() + " has " +
                            std::to_string(s.size()) + " steps, experiment needs " +
                            std::to_string(needed));
    }
    return s;
  }
  return synthetic_scenario(config.days + 1, derive_seed(seed, kScenarioStream),
                            config.scenario.synthetic);
}

bool comfort_violation(const StateVector& x, double t_m, int u_phys, double t_next,
                       const EtpParams& params, const ComfortBounds& bounds, double step_seconds) {
  const double lower = bounds.lower_at(x.quarter);
  const double upper = bounds.upper_at(x.quarter);
  if (x.t_in <= lower && u_phys != 1) return true;
  if (x.t_in > upper && u_phys != 0) return true;
  const double qs = solar_heat_gain(params, x.solar);
  const double drop = lower - step_etp({lower, t_m}, params, x.t_out, qs, false, step_seconds).t_a;
  const double rise = step_etp({upper, t_m}, params, x.t_out, qs, true, step_seconds).t_a - upper;
  constexpr double slack = 1e-9;
  // A step that starts outside the band is judged from where it started.
  const double floor = std::min(lower, x.t_in) - std::max(drop, 0.0) - slack;
  const double ceiling = std::max(upper, x.t_in) + std::max(rise, 0.0) + slack;
  return t_next < floor || t_next > ceiling;
}

RunResult run_experiment(const ExperimentConfig& config, Controller controller, std::uint64_t seed,
                         const HarnessHooks& hooks) {
  config.validate();
  const Scenario scenario = experiment_scenario(config, seed);
  const StateScale scale = StateScale::from(scenario, config.bounds, config.scale_margin);
  const auto spd = static_cast<std::size_t>(kQuartersPerDay);

  RunResult result;
  result.controller = controller;
  result.seed = seed;
  Rng dispatch_rng(derive_seed(seed, kDispatchStream));
  EtpState state = config.initial_state;
  int u_prev = 0;
  double cumulative = 0.0;
  auto& diag = result.diagnostics;

  for (std::size_t d = 1; d <= config.days; ++d) {
    const int day = static_cast<int>(d);
    const std::size_t base = (d - 1) * spd;
    DayLog log;
    log.day = day;
    log.steps.reserve(spd);

    const bool learning = is_learning(controller);
    const double eps = learning ? epsilon(config.exploration, day) : 0.0;

    OptimalPlan plan;
    if (controller == Controller::Optimal || config.per_day_optimum) {
      const ControlProblem problem{state, u_prev, 1, config.etp, scenario.slice(base, spd), config.bounds};
      plan = optimal_dp(problem, config.dp_grid);
      log.optimal_cost = plan.cost;
    }

    std::unique_ptr<ElmEnsemble> model;
    if (controller == Controller::Mabrl && !result.experience.empty()) {
      double residual = 0.0;
      model = std::make_unique<ElmEnsemble>(train_support_model(
          result.experience, scale, config.support_model, stream_seed(seed, kSupportStream, d), &residual));
      diag.max_elm_residual = std::max(diag.max_elm_residual, residual);
      ++diag.elm_trainings;
    }

    std::unique_ptr<ShapedPolicy> shaped;
    const PolicyFn idle = [](const StateVector&) { return 0; };
    PolicyFn policy = idle;

    std::vector<ExperienceTuple> today;
    today.reserve(spd);
    for (std::size_t k = 0; k < spd; ++k) {
      const std::size_t t = base + k;
      const bool recompute =
          learning && !result.experience.empty() &&
          std::find(config.recompute_steps.begin(), config.recompute_steps.end(), static_cast<int>(k)) !=
              config.recompute_steps.end();
      if (recompute) {
        const PolicyContext ctx =
            policy_context(scenario, t, config, stream_seed(seed, kForecastStream, t));
        const PolicyBuild build =
            build_policy(result.experience, model.get(), ctx, config, stream_seed(seed, kPolicyStream, t));
        diag.policy_builds++;
        diag.virtual_tuples += build.batch.virtual_tuples.size();
        if (hooks.on_recompute) hooks.on_recompute(RecomputeEvent{day, static_cast<int>(k), build});
        shaped = std::make_unique<ShapedPolicy>(build.shaped);
        policy = as_policy(*shaped);
      }

      const StateVector x{static_cast<int>(k) + 1, state.t_a, scenario.outside_temp[t], scenario.solar[t],
                          u_prev};
      int u = 0;
      if (learning) {
        u = select_action(policy, x, eps, dispatch_rng);
      } else if (controller == Controller::Optimal) {
        u = plan.requested[k];
      }
      const int u_phys = apply_backup(x, u, config.bounds);
      const EtpState next = step_etp(state, config.etp, x.t_out, solar_heat_gain(config.etp, x.solar),
                                     u_phys != 0, scenario.step_seconds);
      const double cost = stage_cost(u_phys, scenario.price[t], config.etp.p_elec, scenario.step_hours());

      if (comfort_violation(x, state.t_m, u_phys, next.t_a, config.etp, config.bounds,
                            scenario.step_seconds)) {
        ++log.violations;
      }
      log.steps.push_back(StepRecord{day, static_cast<int>(k), x, state.t_m, u, u_phys, cost, eps});
      log.cost += cost;

      const StateVector x_next{next_quarter(x.quarter), next.t_a, scenario.outside_temp[t + 1],
                               scenario.solar[t + 1], u_phys};
      today.push_back(ExperienceTuple{x, u, x_next, u_phys});
      state = next;
      u_prev = u_phys;
    }
    cumulative += log.cost;
    log.cumulative_cost = cumulative;
    diag.comfort_violations += log.violations;
    result.experience.insert(result.experience.end(), today.begin(), today.end());
    result.days.push_back(std::move(log));
  }
  return result;
}

double policy_overlap(const PolicyGrid& a, const PolicyGrid& b) {
  if (a.temps.size() != b.temps.size() || a.actions.size() != b.actions.size()) {
    throw InvalidArgument("policy_overlap: grid shapes differ");
  }
  std::size_t equal = 0;
  std::size_t total = 0;
  for (std::size_t q = 0; q < a.actions.size(); ++q) {
    if (a.actions[q].size() != b.actions[q].size() || a.actions[q].size() != a.temps.size()) {
      throw InvalidArgument("policy_overlap: grid shapes differ");
    }
    for (std::size_t i = 0; i < a.actions[q].size(); ++i) {
      equal += a.actions[q][i] == b.actions[q][i] ? 1 : 0;
      ++total;
    }
  }
  if (total == 0) throw InvalidArgument("policy_overlap: empty grids");
  return static_cast<double>(equal) / static_cast<double>(total);
}

}  // namespace mabrl
