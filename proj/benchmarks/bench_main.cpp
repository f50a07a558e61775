#include <benchmark/benchmark.h>

#include "mabrl/etp.hpp"
#include "mabrl/extratrees.hpp"
#include "mabrl/fqi.hpp"
#include "mabrl/optimal.hpp"
#include "mabrl/rng.hpp"
#include "mabrl/scenario.hpp"
#include "mabrl/shaping.hpp"

using namespace mabrl;

namespace {

// Q-regression sized rows: 6 features in [0, 1], two of them binary.
void make_rows(std::size_t n, RowMatrix& rows, std::vector<double>& y) {
  Rng rng(7);
  rows = RowMatrix(0, 6);
  y.clear();
  for (std::size_t i = 0; i < n; ++i) {
    std::array<double, 6> r{};
    for (std::size_t f = 0; f < 4; ++f) r[f] = uniform01(rng);
    r[4] = uniform01(rng) < 0.5 ? 0.0 : 1.0;
    r[5] = uniform01(rng) < 0.5 ? 0.0 : 1.0;
    rows.push_row(r);
    y.push_back(r[0] * 0.3 + r[5] * (0.1 - 0.05 * r[1]) + 0.01 * uniform01(rng));
  }
}

void BM_FitForest(benchmark::State& state) {
  RowMatrix rows;
  std::vector<double> y;
  make_rows(static_cast<std::size_t>(state.range(0)), rows, y);
  ForestParams p;
  p.tree_count = 10;
  std::uint64_t seed = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_forest(rows, y, p, seed++));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(p.tree_count));
}
BENCHMARK(BM_FitForest)->Arg(1000)->Arg(8000)->Unit(benchmark::kMillisecond);

void BM_PredictForest(benchmark::State& state) {
  RowMatrix rows;
  std::vector<double> y;
  make_rows(8000, rows, y);
  const Forest f = fit_forest(rows, y, ForestParams{}, 3);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(predict_forest(f, rows.row(i++ % rows.rows())));
  }
}
BENCHMARK(BM_PredictForest);

void BM_StepEtp(benchmark::State& state) {
  const EtpParams p;
  EtpState s{21.0, 21.0};
  int on = 0;
  for (auto _ : state) {
    s = step_etp(s, p, 2.0, 0.0, on != 0, 900.0);
    on = s.t_a < 21.0 ? 1 : 0;
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_StepEtp);

void BM_OptimalDpDay(benchmark::State& state) {
  const Scenario sc = synthetic_scenario(1, 11);
  const ControlProblem problem{{21.5, 21.5}, 0, 1, EtpParams{}, sc, ComfortBounds{20.0, 23.0}};
  for (auto _ : state) benchmark::DoNotOptimize(optimal_dp(problem));
}
BENCHMARK(BM_OptimalDpDay)->Unit(benchmark::kMillisecond);

void BM_ShapePolicy(benchmark::State& state) {
  Rng rng(5);
  std::vector<PolicySample> samples;
  for (int i = 0; i < 4000; ++i) {
    const int q = 1 + static_cast<int>(uniform01(rng) * 96.0) % 96;
    const double t = uniform(rng, 19.0, 24.0);
    samples.push_back({q, t, t < 21.0 + 0.01 * q ? 1 : 0});
  }
  for (auto _ : state) benchmark::DoNotOptimize(fit_shaped_policy(samples, MfGridShape{}));
}
BENCHMARK(BM_ShapePolicy)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
