#include "mabrl/optimal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mabrl/error.hpp"

namespace mabrl {

namespace {

struct StepOutcome {
  int u_phys;
  EtpState next;
  double cost;
};

StateVector observe(const ControlProblem& p, std::size_t k, const EtpState& s, int u_prev) {
  return StateVector{p.quarter_at(k), s.t_a, p.scenario.outside_temp[k], p.scenario.solar[k], u_prev};
}

StepOutcome advance(const ControlProblem& p, std::size_t k, const EtpState& s, int u_prev, int u) {
  const int u_phys = apply_backup(observe(p, k, s, u_prev), u, p.bounds);
  const EtpState next = step_etp(s, p.params, p.scenario.outside_temp[k],
                                 solar_heat_gain(p.params, p.scenario.solar[k]), u_phys != 0,
                                 p.scenario.step_seconds);
  const double cost = stage_cost(u_phys, p.scenario.price[k], p.params.p_elec, p.scenario.step_hours());
  return {u_phys, next, cost};
}

// True when the request can change the applied action at this state.
bool request_matters(const ControlProblem& p, std::size_t k, const EtpState& s, int u_prev) {
  const StateVector x = observe(p, k, s, u_prev);
  return apply_backup(x, 0, p.bounds) != apply_backup(x, 1, p.bounds);
}

void check_problem(const ControlProblem& p) {
  p.params.validate();
  p.scenario.validate();
  if (p.horizon() == 0) throw InvalidArgument("control problem has an empty horizon");
  if (p.start_quarter < 1 || p.start_quarter > kQuartersPerDay || (p.u_prev != 0 && p.u_prev != 1)) {
    throw InvalidArgument("control problem: bad start quarter or previous action");
  }
}

class ExhaustiveSearch {
 public:
  explicit ExhaustiveSearch(const ControlProblem& p) : p_(p), path_(p.horizon(), 0) {}

  std::vector<int> run() {
    recurse(0, p_.initial, p_.u_prev, 0.0);
    return best_path_;
  }

 private:
  void recurse(std::size_t k, const EtpState& s, int u_prev, double cost) {
    if (cost >= best_cost_) return;  // stage costs are nonnegative
    if (k == p_.horizon()) {
      best_cost_ = cost;
      best_path_ = path_;
      return;
    }
    const int branches = request_matters(p_, k, s, u_prev) ? 2 : 1;
    for (int u = 0; u < branches; ++u) {
      const StepOutcome o = advance(p_, k, s, u_prev, u);
      path_[k] = u;
      recurse(k + 1, o.next, o.u_phys, cost + o.cost);
    }
  }

  const ControlProblem& p_;
  std::vector<int> path_;
  std::vector<int> best_path_;
  double best_cost_ = std::numeric_limits<double>::infinity();
};

// Uniform 1-D axis with clamped linear interpolation weights.
struct Axis {
  double lo = 0.0;
  double step = 1.0;
  std::size_t count = 1;

  static Axis covering(double lo, double hi, double step) {
    const auto n = static_cast<std::size_t>(std::ceil((hi - lo) / step - 1e-9)) + 1;
    return {lo, step, std::max<std::size_t>(n, 2)};
  }
  double at(std::size_t i) const { return lo + step * static_cast<double>(i); }

  void locate(double x, std::size_t& i, double& w) const {
    const double c = std::clamp((x - lo) / step, 0.0, static_cast<double>(count - 1));
    i = std::min(static_cast<std::size_t>(c), count - 2);
    w = c - static_cast<double>(i);
  }
};

// Offset of the node that carries the value just above a jump. Large against
// rounding in the dynamics, negligible against the grid.
constexpr double kJumpWidth = 1e-9;

// Sorted t_a nodes for one t_m column. The cost-to-go of an idle heater jumps
// wherever the step at which the backup forces an action (or stops allowing
// one) changes, so each such point b gets nodes at b and b + kJumpWidth.
struct BrokenAxis {
  std::vector<double> nodes;

  BrokenAxis(const Axis& base, std::span<const double> breaks) {
    nodes.reserve(base.count + 2 * breaks.size());
    for (std::size_t i = 0; i < base.count; ++i) nodes.push_back(base.at(i));
    const double lo = nodes.front();
    const double hi = nodes.back();
    for (double b : breaks) {
      if (!(b > lo && b + kJumpWidth < hi)) continue;
      nodes.push_back(b);
      nodes.push_back(b + kJumpWidth);
    }
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  }
  std::size_t count() const { return nodes.size(); }

  void locate(double x, std::size_t& i, double& w) const {
    if (x <= nodes.front()) {
      i = 0;
      w = 0.0;
      return;
    }
    if (x >= nodes.back()) {
      i = nodes.size() - 2;
      w = 1.0;
      return;
    }
    const auto it = std::upper_bound(nodes.begin(), nodes.end(), x);
    i = static_cast<std::size_t>(it - nodes.begin()) - 1;
    w = (x - nodes[i]) / (nodes[i + 1] - nodes[i]);
  }
};

// Cost-to-go of an idle heater over (t_a, t_m). The jump locations move
// linearly with t_m, so a query between two columns first warps its t_a onto
// each column so that it keeps its place between the same pair of jumps.
struct ValueTable {
  Axis m;
  std::vector<BrokenAxis> columns;
  std::vector<std::vector<double>> breaks;  // per column, same order in every column
  std::vector<std::size_t> offset;
  std::vector<double> v;

  ValueTable(const Axis& m_axis, std::vector<std::vector<double>> column_breaks, const Axis& base_a)
      : m(m_axis), breaks(std::move(column_breaks)) {
    std::size_t total = 0;
    for (const auto& b : breaks) {
      columns.emplace_back(base_a, b);
      offset.push_back(total);
      total += columns.back().count();
    }
    v.assign(total, 0.0);
  }

  double& at(std::size_t im, std::size_t ia) { return v[offset[im] + ia]; }

  double column_value(std::size_t im, double t_a) const {
    std::size_t ia = 0;
    double wa = 0.0;
    columns[im].locate(t_a, ia, wa);
    const double* c = v.data() + offset[im];
    return (1.0 - wa) * c[ia] + wa * c[ia + 1];
  }

  // Maps t_a between the query's own jumps onto the same interval of column im.
  static double warp(double t_a, const std::vector<double>& query, const std::vector<double>& col) {
    if (query.empty()) return t_a;
    if (t_a <= query.front()) return t_a + (col.front() - query.front());
    if (t_a > query.back()) return t_a + (col.back() - query.back());
    // Intervals are (b_i, b_{i+1}]: a point on a jump belongs to the lower side.
    const auto it = std::lower_bound(query.begin(), query.end(), t_a);
    const std::size_t i = static_cast<std::size_t>(it - query.begin()) - 1;
    const double span = query[i + 1] - query[i];
    if (!(span > 0.0)) return col[i + 1];
    const double f = (t_a - query[i]) / span;
    return col[i] + f * (col[i + 1] - col[i]);
  }

  double interpolate(const EtpState& s) const {
    std::size_t im = 0;
    double wm = 0.0;
    m.locate(s.t_m, im, wm);
    const auto& b0 = breaks[im];
    const auto& b1 = breaks[im + 1];
    std::vector<double>& query = scratch();
    query.resize(b0.size());
    for (std::size_t i = 0; i < b0.size(); ++i) query[i] = (1.0 - wm) * b0[i] + wm * b1[i];
    return (1.0 - wm) * column_value(im, warp(s.t_a, query, b0)) +
           wm * column_value(im + 1, warp(s.t_a, query, b1));
  }

  static std::vector<double>& scratch() {
    thread_local std::vector<double> buf;
    return buf;
  }
};

// One idle step is affine in the state: next = a * (t_a, t_m) + c.
struct AffineStep {
  double a[2][2];
  double c[2];
};

AffineStep idle_step(const ControlProblem& p, std::size_t k) {
  auto f = [&](double ta, double tm) {
    return step_etp({ta, tm}, p.params, p.scenario.outside_temp[k], solar_heat_gain(p.params, p.scenario.solar[k]),
                    false, p.scenario.step_seconds);
  };
  const EtpState c = f(0.0, 0.0);
  const EtpState ea = f(1.0, 0.0);
  const EtpState em = f(0.0, 1.0);
  return {{{ea.t_a - c.t_a, em.t_a - c.t_a}, {ea.t_m - c.t_m, em.t_m - c.t_m}}, {c.t_a, c.t_m}};
}

// t_a values at step k whose idle trajectory reaches a comfort bound exactly
// at some later step, for envelope temperature t_m.
std::vector<double> idle_breaks(const ControlProblem& p, const std::vector<AffineStep>& steps, std::size_t k,
                                double t_m) {
  std::vector<double> out;
  // Running map from (t_a, t_m) at step k to the state at step j.
  double ma[2][2] = {{1.0, 0.0}, {0.0, 1.0}};
  double mc[2] = {0.0, 0.0};
  for (std::size_t j = k; j < p.horizon(); ++j) {
    const int q = p.quarter_at(j);
    for (double bound : {p.bounds.lower_at(q), p.bounds.upper_at(q)}) {
      if (ma[0][0] > 0.0) out.push_back((bound - ma[0][1] * t_m - mc[0]) / ma[0][0]);
    }
    const AffineStep& st = steps[j];
    double na[2][2];
    double nc[2];
    for (int r = 0; r < 2; ++r) {
      for (int col = 0; col < 2; ++col) na[r][col] = st.a[r][0] * ma[0][col] + st.a[r][1] * ma[1][col];
      nc[r] = st.a[r][0] * mc[0] + st.a[r][1] * mc[1] + st.c[r];
    }
    std::copy(&na[0][0], &na[0][0] + 4, &ma[0][0]);
    std::copy(nc, nc + 2, mc);
  }
  return out;
}

// Orders every column by the first column's order so that entry i is the same
// jump everywhere; columns where two jumps swap places are sorted on their own.
void sort_breaks(std::vector<std::vector<double>>& breaks) {
  if (breaks.empty()) return;
  std::vector<std::size_t> order(breaks.front().size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto& first = breaks.front();
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return first[a] < first[b]; });
  for (auto& col : breaks) {
    std::vector<double> sorted(col.size());
    for (std::size_t i = 0; i < order.size(); ++i) sorted[i] = col[order[i]];
    if (!std::is_sorted(sorted.begin(), sorted.end())) std::sort(sorted.begin(), sorted.end());
    col = std::move(sorted);
  }
}

}  // namespace

OptimalPlan replay_plan(const ControlProblem& problem, const std::vector<int>& requested) {
  if (requested.size() != problem.horizon()) {
    throw InvalidArgument("replay_plan: " + std::to_string(requested.size()) +
                          " requests for horizon " + std::to_string(problem.horizon()));
  }
  OptimalPlan plan;
  plan.requested = requested;
  plan.actions.reserve(requested.size());
  plan.trajectory.reserve(requested.size());
  EtpState s = problem.initial;
  int u_prev = problem.u_prev;
  for (std::size_t k = 0; k < requested.size(); ++k) {
    const StepOutcome o = advance(problem, k, s, u_prev, requested[k]);
    plan.actions.push_back(o.u_phys);
    plan.trajectory.push_back(o.next);
    plan.cost += o.cost;
    s = o.next;
    u_prev = o.u_phys;
  }
  return plan;
}

OptimalPlan optimal_exhaustive(const ControlProblem& problem) {
  check_problem(problem);
  if (problem.horizon() > kMaxExhaustiveHorizon) {
    throw InvalidArgument("exhaustive search limited to horizon " +
                          std::to_string(kMaxExhaustiveHorizon) + ", got " +
                          std::to_string(problem.horizon()));
  }
  ExhaustiveSearch search(problem);
  return replay_plan(problem, search.run());
}

OptimalPlan optimal_dp(const ControlProblem& problem, const DpGrid& grid) {
  check_problem(problem);
  if (!(grid.t_a_resolution > 0.0) || !(grid.t_m_resolution > 0.0) || !(grid.t_a_margin >= 0.0)) {
    throw InvalidArgument("DP grid resolutions must be positive");
  }
  const std::size_t horizon = problem.horizon();
  const EtpParams& prm = problem.params;

  const double a_lo = std::min(problem.bounds.min_lower() - grid.t_a_margin, problem.initial.t_a - 0.5);
  const double a_hi = std::max(problem.bounds.max_upper() + grid.t_a_margin, problem.initial.t_a + 0.5);

  // The envelope node drifts at most |dT_m/dt|max * duration over the horizon.
  double max_solar = 0.0;
  for (double s : problem.scenario.solar) max_solar = std::max(max_solar, std::abs(solar_heat_gain(prm, s)));
  const double gap = std::max(std::abs(a_hi - problem.initial.t_m), std::abs(a_lo - problem.initial.t_m)) + 5.0;
  const double drift_rate = 1000.0 * (gap / prm.r_m + (1.0 - prm.a_s) * max_solar) / prm.c_m;
  const double drift = drift_rate * problem.scenario.step_seconds * static_cast<double>(horizon) +
                       grid.t_m_resolution;

  const Axis base_a = Axis::covering(a_lo, a_hi, grid.t_a_resolution);
  const Axis m_axis = Axis::covering(problem.initial.t_m - drift, problem.initial.t_m + drift, grid.t_m_resolution);

  // Only idle (u_prev = 0) states are tabulated. With u_prev = 1 the backup
  // ignores the request and holds the heater on until the room passes the
  // upper bound, so an episode is rolled out exactly and interpolation happens
  // only where it ends. values[k] is the cost-to-go before step k.
  std::vector<AffineStep> steps;
  steps.reserve(horizon);
  for (std::size_t k = 0; k < horizon; ++k) steps.push_back(idle_step(problem, k));
  std::vector<ValueTable> values;
  values.reserve(horizon);
  for (std::size_t k = 0; k < horizon; ++k) {
    std::vector<std::vector<double>> breaks;
    breaks.reserve(m_axis.count);
    for (std::size_t im = 0; im < m_axis.count; ++im) breaks.push_back(idle_breaks(problem, steps, k, m_axis.at(im)));
    sort_breaks(breaks);
    values.emplace_back(m_axis, std::move(breaks), base_a);
  }
  auto value = [&](std::size_t k, const EtpState& s) {
    return k == horizon ? 0.0 : values[k].interpolate(s);
  };
  // Cost of applying request u at step k from an idle heater, up to the next idle state.
  auto q_value = [&](std::size_t k, const EtpState& s, int u) {
    StepOutcome o = advance(problem, k, s, 0, u);
    double cost = o.cost;
    std::size_t j = k + 1;
    while (o.u_phys == 1 && j < horizon) {
      o = advance(problem, j, o.next, 1, 0);
      cost += o.cost;
      ++j;
    }
    return cost + (o.u_phys == 1 ? 0.0 : value(j, o.next));
  };

  for (std::size_t k = horizon; k-- > 0;) {
    ValueTable& cur = values[k];
    for (std::size_t im = 0; im < m_axis.count; ++im) {
      const auto& nodes = cur.columns[im].nodes;
      for (std::size_t ia = 0; ia < nodes.size(); ++ia) {
        const EtpState s{nodes[ia], m_axis.at(im)};
        double best = q_value(k, s, 0);
        if (request_matters(problem, k, s, 0)) best = std::min(best, q_value(k, s, 1));
        cur.at(im, ia) = best;
      }
    }
  }

  std::vector<int> requested(horizon, 0);
  EtpState s = problem.initial;
  int u_prev = problem.u_prev;
  for (std::size_t k = 0; k < horizon; ++k) {
    int choice = 0;
    if (u_prev == 0 && request_matters(problem, k, s, 0)) choice = q_value(k, s, 1) < q_value(k, s, 0) ? 1 : 0;
    requested[k] = choice;
    const StepOutcome o = advance(problem, k, s, u_prev, choice);
    s = o.next;
    u_prev = o.u_phys;
  }
  return replay_plan(problem, requested);
}

OptimalPlan default_thermostat(const ControlProblem& problem) {
  check_problem(problem);
  return replay_plan(problem, std::vector<int>(problem.horizon(), 0));
}

}  // namespace mabrl
