#pragma once

// Experiment artifacts:
//   steps.csv   controller,seed,day,step,quarter,t_in,t_out,solar,u_prev,t_m,u,u_phys,cost,epsilon
//   daily.csv   controller,seed,day,cost,cumulative_cost,optimal_cost,violations
//   benchmark.json  [{seed, day, optimal_cost, default_cost, mabrl_cost, brl_cost}]
// A missing value is an empty CSV field or a JSON null.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mabrl/harness.hpp"
#include "mabrl/policy_grid.hpp"

namespace mabrl {

struct DailyRow {
  std::string controller;
  std::uint64_t seed = 0;
  int day = 1;
  double cost = 0.0;
  double cumulative_cost = 0.0;
  std::optional<double> optimal_cost;
  std::size_t violations = 0;

  friend bool operator==(const DailyRow&, const DailyRow&) = default;
};

struct BenchmarkRow {
  std::uint64_t seed = 0;
  int day = 1;
  std::optional<double> optimal_cost;
  std::optional<double> default_cost;
  std::optional<double> mabrl_cost;
  std::optional<double> brl_cost;

  friend bool operator==(const BenchmarkRow&, const BenchmarkRow&) = default;
};

std::vector<DailyRow> daily_rows(std::span<const RunResult> runs);

// Writes steps.csv and daily.csv into `dir` (created if missing).
void export_report(std::span<const RunResult> runs, const std::filesystem::path& dir);
std::vector<DailyRow> load_daily_report(const std::filesystem::path& path);

// One row per (seed, day) seen in any run. The optimal column comes from an
// OPTIMAL run when present.
std::vector<BenchmarkRow> benchmark_rows(std::span<const RunResult> runs);
void export_benchmark(std::span<const RunResult> runs, const std::filesystem::path& path);
std::vector<BenchmarkRow> load_benchmark(const std::filesystem::path& path);

// Writes each grid to dir/policy_<name>.csv.
void export_policy_grids(std::span<const std::pair<std::string, PolicyGrid>> grids,
                         const std::filesystem::path& dir);

}  // namespace mabrl
