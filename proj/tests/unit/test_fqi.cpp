#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <vector>

#include "mabrl/error.hpp"
#include "mabrl/fqi.hpp"
#include "mabrl/rng.hpp"
#include "support/toy_mdp.hpp"

using namespace mabrl;

namespace {

const ComfortBounds kBounds(20.0, 23.0);

std::vector<ExperienceTuple> random_tuples(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<ExperienceTuple> out;
  for (std::size_t i = 0; i < n; ++i) {
    StateVector x{1 + static_cast<int>(rng() % 96), uniform(rng, 19.0, 24.0), uniform(rng, 0.0, 8.0),
                  uniform(rng, 0.0, 0.3), static_cast<int>(rng() % 2)};
    const int u = static_cast<int>(rng() % 2);
    const int phys = apply_backup(x, u, kBounds);
    StateVector next{next_quarter(x.quarter), x.t_in + (phys ? 0.3 : -0.2), x.t_out, x.solar, phys};
    out.push_back({x, u, next, phys});
  }
  return out;
}

ElmEnsemble tiny_model(double delta) {
  TrainSet t;
  Rng rng(5);
  for (int i = 0; i < 40; ++i) {
    std::vector<double> row(6);
    for (auto& v : row) v = uniform01(rng);
    t.inputs.push_row(row);
    t.targets.push_back(delta);
  }
  ElmEnsemble e = train_ensemble(t, {2, 5, 1e6}, 3);
  e.input_scaler = toy::scale().state_action_scaler();
  return e;
}

Forecast flat(double t_out, double solar) {
  return {std::vector<double>(96, t_out), std::vector<double>(96, solar)};
}

}  // namespace

TEST(TupleDistance, Examples) {
  const NormalizedState a{0.0, 0.0, 0.0, 0.0, 0.0};
  const NormalizedState b{0.3, 0.4, 0.0, 0.0, 0.0};
  EXPECT_DOUBLE_EQ(tuple_distance(a, 0, a, 0), 0.0);
  EXPECT_DOUBLE_EQ(tuple_distance(a, 0, b, 0), 0.5);
  EXPECT_DOUBLE_EQ(tuple_distance(a, 0, b, 1), 1.5);
  EXPECT_DOUBLE_EQ(tuple_distance(b, 1, a, 0), tuple_distance(a, 0, b, 1));
}

TEST(StateScale, NormalizesToUnitRange) {
  const StateScale s = toy::scale();
  const NormalizedState lo = s.normalize({1, 19.0, 0.0, 0.0, 0});
  const NormalizedState hi = s.normalize({96, 23.0, 10.0, 1.0, 1});
  for (std::size_t d = 0; d < 5; ++d) {
    EXPECT_DOUBLE_EQ(lo[d], 0.0);
    EXPECT_DOUBLE_EQ(hi[d], 1.0);
  }
  const Scenario sc = synthetic_scenario(2, 3);
  const StateScale from = StateScale::from(sc, kBounds, 2.0);
  EXPECT_DOUBLE_EQ(from.t_in_lo, 18.0);
  EXPECT_DOUBLE_EQ(from.t_in_hi, 25.0);
  EXPECT_DOUBLE_EQ(from.t_out_lo, *std::min_element(sc.outside_temp.begin(), sc.outside_temp.end()));
}

TEST(VirtualTuples, InfiniteRadiusRejectsEverything) {
  const auto exp = random_tuples(30, 1);
  VirtualTupleParams p;
  p.radius = std::numeric_limits<double>::infinity();
  const auto r = generate_virtual_tuples(exp, tiny_model(0.1), p, kBounds, toy::scale(), flat(4, 0.1), 2);
  EXPECT_TRUE(r.tuples.empty());
  EXPECT_EQ(r.max_count, 30u);
  EXPECT_EQ(r.budget, 600u);
  EXPECT_EQ(r.draws, r.budget);
}

TEST(VirtualTuples, ZeroRadiusFillsQuota) {
  const auto exp = random_tuples(30, 3);
  VirtualTupleParams p;
  p.radius = 0.0;
  p.max_count = 10;
  const auto r = generate_virtual_tuples(exp, tiny_model(0.1), p, kBounds, toy::scale(), flat(4, 0.1), 4);
  EXPECT_EQ(r.tuples.size(), 10u);
  EXPECT_EQ(r.draws, 10u);
}

TEST(VirtualTuples, AcceptedTuplesAreFarAndLabelled) {
  const auto exp = random_tuples(400, 5);
  const StateScale scale = toy::scale();
  Forecast fc = flat(0.0, 0.0);
  for (std::size_t q = 0; q < 96; ++q) {
    fc.outside_temp_hat[q] = 3.0 + 0.05 * static_cast<double>(q);
    fc.solar_hat[q] = q > 30 && q < 60 ? 0.2 : 0.0;
  }
  const ElmEnsemble model = tiny_model(0.25);
  VirtualTupleParams p;
  p.radius = 0.12;
  p.max_count = 200;
  p.t_in_margin = 1.0;
  const auto r = generate_virtual_tuples(exp, model, p, kBounds, scale, fc, 6);
  ASSERT_FALSE(r.tuples.empty());
  for (const auto& v : r.tuples) {
    EXPECT_TRUE(v.consistent());
    double nearest = std::numeric_limits<double>::infinity();
    for (const auto& e : exp) {
      nearest = std::min(nearest, tuple_distance(scale.normalize(e.x), e.u, scale.normalize(v.x), v.u));
    }
    EXPECT_GT(nearest, p.radius);
    EXPECT_EQ(v.u_phys, apply_backup(v.x, v.u, kBounds));
    EXPECT_NEAR(v.x_next.t_in - v.x.t_in, model.predict_raw(support_model_input(v.x, v.u_phys)), 1e-12);
    const auto q = static_cast<std::size_t>(v.x.quarter - 1);
    EXPECT_EQ(v.x.t_out, fc.outside_temp_hat[q]);
    EXPECT_EQ(v.x.solar, fc.solar_hat[q]);
    const auto nq = static_cast<std::size_t>(v.x_next.quarter - 1);
    EXPECT_EQ(v.x_next.t_out, fc.outside_temp_hat[nq]);
    EXPECT_GE(v.x.t_in, 19.0);
    EXPECT_LE(v.x.t_in, 24.0);
  }
}

TEST(VirtualTuples, Errors) {
  const auto exp = random_tuples(5, 7);
  VirtualTupleParams p;
  p.radius = -1.0;
  EXPECT_THROW(generate_virtual_tuples(exp, tiny_model(0.1), p, kBounds, toy::scale(), flat(4, 0), 1),
               InvalidArgument);
  p.radius = 0.1;
  Forecast short_fc = flat(4, 0);
  short_fc.outside_temp_hat.pop_back();
  short_fc.solar_hat.pop_back();
  EXPECT_THROW(generate_virtual_tuples(exp, tiny_model(0.1), p, kBounds, toy::scale(), short_fc, 1),
               InvalidArgument);
}

TEST(Fqi, ZeroPricesGiveZeroQ) {
  Batch b;
  b.experimental = random_tuples(200, 8);
  const std::vector<double> prices(96, 0.0);
  FqiParams p;
  p.iterations = 5;
  p.forest.tree_count = 5;
  const QFunction q = fitted_q_iteration(b, flat(4, 0.1), prices, toy::scale(), {}, p, 9);
  for (const auto& t : b.experimental) {
    EXPECT_EQ(q.value(t.x, 0), 0.0);
    EXPECT_EQ(q.value(t.x, 1), 0.0);
    EXPECT_EQ(greedy_action(q, t.x), 0);
  }
}

TEST(Fqi, MatchesValueIterationOnToyMdps) {
  for (const auto& m : toy::instances()) {
    const Batch b = toy::tuples(m);
    const QFunction q = fitted_q_iteration(b, toy::flat_forecast(), m.prices, toy::scale(), m.cost,
                                           toy::exact_params(m.horizon), 11);
    const toy::Table oracle = toy::value_iteration(m, m.horizon);
    EXPECT_LT(toy::max_gap(m, q, oracle), 1e-9);
  }
}

TEST(Fqi, ObserverBookkeeping) {
  const auto m = toy::instances()[0];
  Batch b = toy::tuples(m);
  b.virtual_tuples = random_tuples(7, 12);
  std::size_t calls = 0;
  std::vector<std::vector<double>> history;
  const QFunction q = fitted_q_iteration(
      b, toy::flat_forecast(), m.prices, toy::scale(), m.cost, toy::exact_params(6), 13,
      [&](std::size_t iter, std::span<const double> costs, std::span<const double> targets) {
        ++calls;
        EXPECT_EQ(iter, calls);
        ASSERT_EQ(costs.size(), b.size());
        ASSERT_EQ(targets.size(), b.size());
        for (std::size_t i = 0; i < b.experimental.size(); ++i) {
          const auto& t = b.experimental[i];
          EXPECT_DOUBLE_EQ(costs[i], stage_cost(t.u_phys, m.prices[static_cast<std::size_t>(t.x.quarter - 1)], 2.0, 0.25));
        }
        if (iter == 1) {
          for (std::size_t i = 0; i < costs.size(); ++i) EXPECT_EQ(targets[i], costs[i]);
        }
        history.emplace_back(targets.begin(), targets.end());
      });
  EXPECT_EQ(calls, 6u);
  // Exact regression of a cost-nonnegative MDP from zero grows monotonically.
  for (std::size_t it = 1; it < history.size(); ++it) {
    for (std::size_t i = 0; i < b.experimental.size(); ++i) {
      EXPECT_GE(history[it][i], history[it - 1][i] - 1e-12);
    }
  }
}

TEST(Fqi, TargetsBoundedByHorizonCost) {
  Batch b;
  b.experimental = random_tuples(300, 14);
  std::vector<double> prices(96);
  for (std::size_t q = 0; q < 96; ++q) prices[q] = 0.02 + 0.001 * static_cast<double>(q);
  const double max_stage = 2.0 * 0.25 * prices.back();
  FqiParams p;
  p.iterations = 8;
  p.forest.tree_count = 5;
  fitted_q_iteration(b, flat(4, 0.1), prices, toy::scale(), {}, p, 15,
                     [&](std::size_t iter, std::span<const double>, std::span<const double> targets) {
                       for (double t : targets) {
                         EXPECT_GE(t, 0.0);
                         EXPECT_LE(t, static_cast<double>(iter) * max_stage + 1e-12);
                       }
                     });
}

TEST(Fqi, StageCostsIgnoreForecast) {
  Batch b;
  b.experimental = random_tuples(100, 16);
  std::vector<double> prices(96, 0.04);
  FqiParams p;
  p.iterations = 3;
  p.forest.tree_count = 3;
  std::vector<double> first;
  std::vector<double> second;
  fitted_q_iteration(b, flat(4, 0.1), prices, toy::scale(), {}, p, 17,
                     [&](std::size_t iter, std::span<const double> c, std::span<const double>) {
                       if (iter == 3) first.assign(c.begin(), c.end());
                     });
  fitted_q_iteration(b, flat(-6, 0.5), prices, toy::scale(), {}, p, 17,
                     [&](std::size_t iter, std::span<const double> c, std::span<const double>) {
                       if (iter == 3) second.assign(c.begin(), c.end());
                     });
  EXPECT_EQ(first, second);
}

TEST(Fqi, Errors) {
  const std::vector<double> prices(96, 0.04);
  FqiParams p;
  EXPECT_THROW(fitted_q_iteration(Batch{}, flat(4, 0), prices, toy::scale(), {}, p, 1), InvalidArgument);
  Batch b;
  b.experimental = random_tuples(10, 18);
  p.iterations = 0;
  EXPECT_THROW(fitted_q_iteration(b, flat(4, 0), prices, toy::scale(), {}, p, 1), InvalidArgument);
  p.iterations = 1;
  const std::vector<double> short_prices(95, 0.04);
  EXPECT_THROW(fitted_q_iteration(b, flat(4, 0), short_prices, toy::scale(), {}, p, 1), InvalidArgument);
}

TEST(PolicyGrid, MatchesGreedyActions) {
  const auto m = toy::instances()[2];
  const QFunction q = fitted_q_iteration(toy::tuples(m), toy::flat_forecast(), m.prices, toy::scale(),
                                         m.cost, toy::exact_params(m.horizon), 19);
  const auto temps = temperature_lattice(19.0, 23.0, 0.5);
  ASSERT_EQ(temps.size(), 9u);
  const PolicyGrid g = extract_policy_grid(q, toy::flat_forecast(), temps);
  ASSERT_EQ(g.quarters(), 96u);
  for (int qq = 1; qq <= 96; ++qq) {
    for (std::size_t i = 0; i < temps.size(); ++i) {
      EXPECT_EQ(g.at(qq, i), greedy_action(q, {qq, temps[i], toy::kOutside, toy::kSolar, 0}));
    }
  }
  const auto path = std::filesystem::temp_directory_path() / "mabrl_unit_grid.csv";
  save_policy_grid(g, path);
  EXPECT_EQ(load_policy_grid(path), g);
}

TEST(PolicyGrid, Lattice) {
  const auto t = temperature_lattice(17.0, 26.0, 0.25);
  EXPECT_EQ(t.size(), 37u);
  EXPECT_DOUBLE_EQ(t.front(), 17.0);
  EXPECT_NEAR(t.back(), 26.0, 1e-9);
  EXPECT_THROW(temperature_lattice(17.0, 26.0, 0.0), InvalidArgument);
}

TEST(Batch, SaveLoadRoundTrip) {
  Batch b;
  b.experimental = random_tuples(20, 20);
  b.virtual_tuples = random_tuples(5, 21);
  const auto path = std::filesystem::temp_directory_path() / "mabrl_unit_batch.csv";
  save_batch(b, path);
  const Batch back = load_batch(path);
  EXPECT_EQ(back.experimental, b.experimental);
  EXPECT_EQ(back.virtual_tuples, b.virtual_tuples);
  EXPECT_THROW(load_batch(path.string() + ".missing"), FormatError);
}

TEST(QuarterProfiles, IndexByQuarter) {
  const Scenario s = synthetic_scenario(3, 22);
  const Forecast f = forecast_by_quarter(s, 10, {}, 1);
  const auto prices = prices_by_quarter(s, 10);
  ASSERT_EQ(f.horizon(), 96u);
  for (std::size_t h = 0; h < 96; ++h) {
    const std::size_t q = (10 + h) % 96;
    EXPECT_EQ(f.outside_temp_hat[q], s.outside_temp[10 + h]);
    EXPECT_EQ(f.solar_hat[q], s.solar[10 + h]);
    EXPECT_EQ(prices[q], s.price[10 + h]);
  }
  EXPECT_THROW(prices_by_quarter(s, 200), InvalidArgument);
}
