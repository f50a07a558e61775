// mabrl: command-line front end for simulations, learning experiments and the
// optimal/default benchmark.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mabrl/config.hpp"
#include "mabrl/harness.hpp"
#include "mabrl/report.hpp"

namespace fs = std::filesystem;
using namespace mabrl;

namespace {

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> days;
  std::string out_dir = ".";
  std::vector<std::string> controllers;
};

void add_common(CLI::App* cmd, CommonOptions& o, bool with_controller) {
  cmd->add_option("--config", o.config, "experiment config JSON")->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "run a single seed instead of the configured list");
  cmd->add_option("--days", o.days, "number of simulated days")->check(CLI::PositiveNumber);
  cmd->add_option("--out-dir", o.out_dir, "directory for output files");
  if (with_controller) {
    cmd->add_option("--controller", o.controllers, "MABRL, BRL, DEFAULT or OPTIMAL (repeatable)");
  }
}

ExperimentConfig resolve(const CommonOptions& o) {
  ExperimentConfig c = o.config.empty() ? ExperimentConfig{} : load_config(o.config);
  if (o.seed) c.seeds = {*o.seed};
  if (o.days) c.days = *o.days;
  if (!o.controllers.empty()) {
    c.controllers.clear();
    for (const auto& name : o.controllers) c.controllers.push_back(parse_controller(name));
  }
  c.validate();
  return c;
}

void print_summary(const std::vector<RunResult>& runs) {
  std::printf("%-8s %6s %5s %12s %12s %10s\n", "ctrl", "seed", "days", "total_eur", "mean_eur/d",
              "violations");
  for (const auto& r : runs) {
    const double total = r.days.empty() ? 0.0 : r.days.back().cumulative_cost;
    std::printf("%-8s %6llu %5zu %12.4f %12.4f %10zu\n", to_string(r.controller).c_str(),
                static_cast<unsigned long long>(r.seed), r.days.size(), total,
                r.days.empty() ? 0.0 : total / static_cast<double>(r.days.size()),
                r.diagnostics.comfort_violations);
  }
}

int cmd_simulate(const CommonOptions& o) {
  CommonOptions opts = o;
  if (opts.controllers.empty()) opts.controllers = {"DEFAULT"};
  const ExperimentConfig c = resolve(opts);
  std::vector<RunResult> runs;
  runs.push_back(run_experiment(c, c.controllers.front(), c.seeds.front()));
  export_report(runs, opts.out_dir);
  print_summary(runs);
  return 0;
}

int cmd_run(const CommonOptions& o) {
  const ExperimentConfig c = resolve(o);
  const fs::path out(o.out_dir);
  fs::create_directories(out);
  std::vector<RunResult> runs;
  std::vector<std::pair<std::string, PolicyGrid>> grids;
  const auto lattice = temperature_lattice(c.lattice_lo, c.lattice_hi, c.lattice_step);
  for (auto seed : c.seeds) {
    for (auto ctl : c.controllers) {
      std::optional<PolicyGrid> last;
      HarnessHooks hooks;
      hooks.on_recompute = [&](const RecomputeEvent& e) { last = shaped_policy_grid(e.build.shaped, lattice); };
      std::cerr << "running " << to_string(ctl) << " seed " << seed << " for " << c.days << " days\n";
      runs.push_back(run_experiment(c, ctl, seed, hooks));
      const std::string tag = to_string(ctl) + "_" + std::to_string(seed);
      if (last) grids.emplace_back(tag, *last);
      if (!runs.back().experience.empty()) {
        save_batch(Batch{runs.back().experience, {}}, out / ("batch_" + tag + ".csv"));
      }
    }
  }
  export_report(runs, out);
  export_benchmark(runs, out / "benchmark.json");
  export_policy_grids(grids, out);
  print_summary(runs);
  return 0;
}

int cmd_benchmark(const CommonOptions& o) {
  CommonOptions opts = o;
  if (opts.controllers.empty()) opts.controllers = {"OPTIMAL", "DEFAULT"};
  const ExperimentConfig c = resolve(opts);
  std::vector<RunResult> runs;
  for (auto seed : c.seeds) {
    for (auto ctl : c.controllers) runs.push_back(run_experiment(c, ctl, seed));
  }
  export_report(runs, opts.out_dir);
  export_benchmark(runs, fs::path(opts.out_dir) / "benchmark.json");
  print_summary(runs);
  return 0;
}

struct PolicyOptions {
  std::string batch;
  std::string model;
  std::string scenario;
  std::size_t start_step = 0;
};

int cmd_policy(const CommonOptions& o, const PolicyOptions& p) {
  const ExperimentConfig c = resolve(o);
  const std::uint64_t seed = c.seeds.front();
  const Batch batch = load_batch(p.batch);
  const Scenario scenario = p.scenario.empty() ? experiment_scenario(c, seed) : load_scenario(p.scenario);
  if (p.start_step + kQuartersPerDay > scenario.size()) {
    throw InvalidArgument("start step leaves less than one day of scenario");
  }
  const PolicyContext ctx = policy_context(scenario, p.start_step, c, derive_seed(seed, 4));
  std::optional<ElmEnsemble> model;
  if (!p.model.empty()) model = load_ensemble(p.model);
  const PolicyBuild build =
      build_policy(batch.experimental, model ? &*model : nullptr, ctx, c, derive_seed(seed, 5));
  const auto lattice = temperature_lattice(c.lattice_lo, c.lattice_hi, c.lattice_step);
  const std::vector<std::pair<std::string, PolicyGrid>> grids{
      {"greedy", extract_policy_grid(build.q, ctx.exogenous, lattice)},
      {"shaped", shaped_policy_grid(build.shaped, lattice)}};
  export_policy_grids(grids, o.out_dir);
  std::printf("experimental tuples %zu, virtual tuples %zu, overlap(greedy, shaped) %.4f\n",
              build.batch.experimental.size(), build.batch.virtual_tuples.size(),
              policy_overlap(grids[0].second, grids[1].second));
  return 0;
}

int cmd_train_model(const CommonOptions& o, const std::string& batch_path) {
  const ExperimentConfig c = resolve(o);
  const Batch batch = load_batch(batch_path);
  const Scenario scenario = experiment_scenario(c, c.seeds.front());
  const StateScale scale = StateScale::from(scenario, c.bounds, c.scale_margin);
  double residual = 0.0;
  const ElmEnsemble ens = train_support_model(batch.experimental, scale, c.support_model,
                                              derive_seed(c.seeds.front(), 3), &residual);
  fs::create_directories(o.out_dir);
  const fs::path out = fs::path(o.out_dir) / "support_model.json";
  save_ensemble(ens, out);
  std::printf("trained %zu networks (%zu hidden) on %zu tuples, max residual %.3g -> %s\n",
              ens.members.size(), ens.members.front().hidden_count(), batch.experimental.size(), residual,
              out.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Model-assisted batch RL for a heated room: simulation, learning and benchmarks"};
  app.require_subcommand(1);

  CommonOptions sim_o, run_o, bench_o, pol_o, train_o;
  PolicyOptions pol;
  std::string train_batch;

  auto* sim = app.add_subcommand("simulate", "closed-loop trajectory for one controller and seed");
  add_common(sim, sim_o, true);
  auto* run = app.add_subcommand("run", "full experiment from a config");
  add_common(run, run_o, true);
  auto* bench = app.add_subcommand("benchmark", "optimal and default-thermostat costs");
  add_common(bench, bench_o, true);
  auto* policy = app.add_subcommand("policy", "export policy grids for a saved batch and forecast");
  add_common(policy, pol_o, false);
  policy->add_option("--batch", pol.batch, "batch CSV")->required()->check(CLI::ExistingFile);
  policy->add_option("--model", pol.model, "support model JSON; adds virtual tuples")->check(CLI::ExistingFile);
  policy->add_option("--scenario", pol.scenario, "scenario CSV for forecasts and prices")->check(CLI::ExistingFile);
  policy->add_option("--start-step", pol.start_step, "scenario step of the recompute time");
  auto* train = app.add_subcommand("train-model", "train the support-model ensemble on a batch");
  add_common(train, train_o, false);
  train->add_option("--batch", train_batch, "batch CSV")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*sim) return cmd_simulate(sim_o);
    if (*run) return cmd_run(run_o);
    if (*bench) return cmd_benchmark(bench_o);
    if (*policy) return cmd_policy(pol_o, pol);
    if (*train) return cmd_train_model(train_o, train_batch);
  } catch (const std::exception& e) {
    std::cerr << "mabrl: error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
