#pragma once

// Small deterministic MDPs encoded as experience tuples, plus explicit value
// iteration on the same MDP. States are (temperature level, previous applied
// action) pairs, so at most 4 states; every quarter of the day carries the
// same dynamics and the price varies by quarter.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include "mabrl/fqi.hpp"

namespace toy {

struct Mdp {
  int levels = 2;                                  // temperature levels (1 or 2)
  std::function<int(int level, int u_prev, int u)> applied;   // applied action
  std::function<int(int level, int u_phys)> next_level;
  std::vector<double> prices;                      // 96, per quarter
  mabrl::CostModel cost{2.0, 0.25};
  std::size_t horizon = 10;

  double level_temp(int level) const { return 20.0 + 1.5 * level; }
};

inline constexpr double kOutside = 4.0;
inline constexpr double kSolar = 0.05;

inline mabrl::StateVector state(const Mdp& m, int quarter, int level, int u_prev) {
  return {quarter, m.level_temp(level), kOutside, kSolar, u_prev};
}

// One tuple per (quarter, level, u_prev, u).
inline mabrl::Batch tuples(const Mdp& m) {
  mabrl::Batch b;
  for (int q = 1; q <= mabrl::kQuartersPerDay; ++q) {
    for (int level = 0; level < m.levels; ++level) {
      for (int up = 0; up <= 1; ++up) {
        for (int u = 0; u <= 1; ++u) {
          const int phys = m.applied(level, up, u);
          const int nl = m.next_level(level, phys);
          b.experimental.push_back(
              {state(m, q, level, up), u, state(m, mabrl::next_quarter(q), nl, phys), phys});
        }
      }
    }
  }
  return b;
}

inline mabrl::Forecast flat_forecast() {
  return {std::vector<double>(mabrl::kQuartersPerDay, kOutside),
          std::vector<double>(mabrl::kQuartersPerDay, kSolar)};
}

// Q_N[q-1][level][u_prev][u] after N backups from Q_0 = 0.
using Table = std::vector<std::array<std::array<std::array<double, 2>, 2>, 2>>;

inline Table value_iteration(const Mdp& m, std::size_t n) {
  Table q(mabrl::kQuartersPerDay);
  for (auto& a : q) for (auto& b : a) for (auto& c : b) c = {0.0, 0.0};
  for (std::size_t it = 0; it < n; ++it) {
    Table next = q;
    for (int qi = 0; qi < mabrl::kQuartersPerDay; ++qi) {
      const int nq = (qi + 1) % mabrl::kQuartersPerDay;
      for (int level = 0; level < m.levels; ++level) {
        for (int up = 0; up <= 1; ++up) {
          for (int u = 0; u <= 1; ++u) {
            const int phys = m.applied(level, up, u);
            const int nl = m.next_level(level, phys);
            const double stage = phys ? m.cost.p_elec * m.cost.step_hours * m.prices[static_cast<std::size_t>(qi)] : 0.0;
            const auto& cont = q[static_cast<std::size_t>(nq)][static_cast<std::size_t>(nl)][static_cast<std::size_t>(phys)];
            next[static_cast<std::size_t>(qi)][static_cast<std::size_t>(level)][static_cast<std::size_t>(up)][static_cast<std::size_t>(u)] =
                stage + std::min(cont[0], cont[1]);
          }
        }
      }
    }
    q = std::move(next);
  }
  return q;
}

inline mabrl::StateScale scale() {
  mabrl::StateScale s;
  s.t_in_lo = 19.0;
  s.t_in_hi = 23.0;
  s.t_out_lo = 0.0;
  s.t_out_hi = 10.0;
  s.solar_lo = 0.0;
  s.solar_hi = 1.0;
  return s;
}

// Regressor settings under which one tree isolates every distinct row.
inline mabrl::FqiParams exact_params(std::size_t iterations) {
  mabrl::FqiParams p;
  p.iterations = iterations;
  p.forest.tree_count = 1;
  p.forest.features_per_split = 0;
  p.forest.min_samples_split = 2;
  return p;
}

// Three instances: a forced-ON low level with hysteresis latch, a single
// level where ON is optional, and an instance whose OFF action is overridden
// at the high level.
inline std::vector<Mdp> instances() {
  std::vector<Mdp> out;
  {
    Mdp m;
    m.levels = 2;
    m.applied = [](int level, int up, int u) { return level == 0 ? 1 : (up == 1 ? 1 : u); };
    m.next_level = [](int, int phys) { return phys ? 1 : 0; };
    for (int q = 0; q < 96; ++q) m.prices.push_back(0.03 + 0.02 * ((q / 8) % 3));
    m.horizon = 10;
    out.push_back(m);
  }
  {
    Mdp m;
    m.levels = 1;
    m.applied = [](int, int, int u) { return u; };
    m.next_level = [](int, int) { return 0; };
    for (int q = 0; q < 96; ++q) m.prices.push_back(q % 5 == 0 ? 0.0 : 0.01 * (1 + q % 7));
    m.horizon = 6;
    out.push_back(m);
  }
  {
    Mdp m;
    m.levels = 2;
    m.applied = [](int level, int up, int u) { return level == 1 ? 0 : (up == 1 ? 1 : u); };
    m.next_level = [](int, int phys) { return phys; };
    for (int q = 0; q < 96; ++q) m.prices.push_back(0.05 + 0.04 * std::sin(0.3 * q));
    m.horizon = 8;
    out.push_back(m);
  }
  return out;
}

// Largest |Q_fqi - Q_vi| over all (quarter, level, u_prev, u).
inline double max_gap(const Mdp& m, const mabrl::QFunction& q, const Table& oracle) {
  double gap = 0.0;
  for (int qi = 1; qi <= mabrl::kQuartersPerDay; ++qi) {
    for (int level = 0; level < m.levels; ++level) {
      for (int up = 0; up <= 1; ++up) {
        for (int u = 0; u <= 1; ++u) {
          const double fqi = q.value(state(m, qi, level, up), u);
          const double vi = oracle[static_cast<std::size_t>(qi - 1)][static_cast<std::size_t>(level)][static_cast<std::size_t>(up)][static_cast<std::size_t>(u)];
          gap = std::max(gap, std::abs(fqi - vi));
        }
      }
    }
  }
  return gap;
}

}  // namespace toy
