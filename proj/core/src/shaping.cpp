#include "mabrl/shaping.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mabrl/backup.hpp"
#include "mabrl/error.hpp"

namespace mabrl {

namespace {

// Triangular MFs along one axis with nodes at 0..nodes-1 in grid units.
struct AxisActivation {
  std::size_t lower = 0;
  double upper_weight = 0.0;  // weight of lower + 1; lower gets 1 - upper_weight
};

AxisActivation axis_activation(double coord, std::size_t nodes) {
  if (nodes == 1) return {0, 0.0};
  const double max_coord = static_cast<double>(nodes - 1);
  coord = std::clamp(coord, 0.0, max_coord);
  auto lower = static_cast<std::size_t>(std::floor(coord));
  if (lower >= nodes - 1) lower = nodes - 2;
  return {lower, coord - static_cast<double>(lower)};
}

double quarter_coord(const MfGridShape& s, double quarter) {
  return (quarter - 1.0) / static_cast<double>(kQuartersPerDay - 1) *
         static_cast<double>(s.quarter_nodes - 1);
}

double temp_coord(const MfGridShape& s, double t_in) {
  return (t_in - s.t_lo) / (s.t_hi - s.t_lo) * static_cast<double>(s.temp_nodes - 1);
}

// Normal-equation matrix A = Phi^T Phi on the tensor grid. Each node couples
// only with its 3x3 neighbourhood, stored as a 9-point stencil.
struct StencilMatrix {
  std::size_t nq = 0;
  std::size_t nt = 0;
  std::vector<std::array<double, 9>> coef;

  static std::size_t slot(std::ptrdiff_t dq, std::ptrdiff_t dt) {
    return static_cast<std::size_t>((dq + 1) * 3 + (dt + 1));
  }

  void add(std::size_t a, std::size_t b, double v) {
    const auto dq = static_cast<std::ptrdiff_t>(b / nt) - static_cast<std::ptrdiff_t>(a / nt);
    const auto dt = static_cast<std::ptrdiff_t>(b % nt) - static_cast<std::ptrdiff_t>(a % nt);
    coef[a][slot(dq, dt)] += v;
  }

  void multiply(const std::vector<double>& x, std::vector<double>& y) const {
    for (std::size_t a = 0; a < coef.size(); ++a) {
      const auto qa = static_cast<std::ptrdiff_t>(a / nt);
      const auto ta = static_cast<std::ptrdiff_t>(a % nt);
      double sum = 0.0;
      for (std::ptrdiff_t dq = -1; dq <= 1; ++dq) {
        const auto q = qa + dq;
        if (q < 0 || q >= static_cast<std::ptrdiff_t>(nq)) continue;
        for (std::ptrdiff_t dt = -1; dt <= 1; ++dt) {
          const auto t = ta + dt;
          if (t < 0 || t >= static_cast<std::ptrdiff_t>(nt)) continue;
          const double c = coef[a][slot(dq, dt)];
          if (c != 0.0) sum += c * x[static_cast<std::size_t>(q) * nt + static_cast<std::size_t>(t)];
        }
      }
      y[a] = sum;
    }
  }

  double gershgorin_bound() const {
    double bound = 0.0;
    for (const auto& row : coef) {
      double s = 0.0;
      for (double c : row) s += std::abs(c);
      bound = std::max(bound, s);
    }
    return bound;
  }
};

void project_rows(std::vector<double>& theta, std::size_t nq, std::size_t nt) {
  for (std::size_t q = 0; q < nq; ++q) {
    project_nonincreasing(std::span<double>(theta.data() + q * nt, nt));
  }
}

}  // namespace

void MfGridShape::validate() const {
  if (quarter_nodes < 1 || temp_nodes < 2) {
    throw InvalidArgument("MF grid needs >= 1 quarter node and >= 2 temperature nodes");
  }
  if (!(t_hi > t_lo)) throw InvalidArgument("MF grid temperature range is empty");
}

double MfGrid::temp_node(std::size_t ti) const {
  return shape.t_lo + (shape.t_hi - shape.t_lo) * static_cast<double>(ti) /
                          static_cast<double>(shape.temp_nodes - 1);
}

SparseActivation sparse_activation(const MfGridShape& shape, double quarter, double t_in) {
  const AxisActivation aq = axis_activation(quarter_coord(shape, quarter), shape.quarter_nodes);
  const AxisActivation at = axis_activation(temp_coord(shape, t_in), shape.temp_nodes);
  SparseActivation out;
  const std::size_t nt = shape.temp_nodes;
  const std::size_t q_count = shape.quarter_nodes == 1 ? 1 : 2;
  for (std::size_t i = 0; i < q_count; ++i) {
    const double wq = i == 0 ? 1.0 - aq.upper_weight : aq.upper_weight;
    for (std::size_t j = 0; j < 2; ++j) {
      const double wt = j == 0 ? 1.0 - at.upper_weight : at.upper_weight;
      out.node[out.count] = (aq.lower + i) * nt + at.lower + j;
      out.weight[out.count] = wq * wt;
      ++out.count;
    }
  }
  return out;
}

std::vector<double> mf_activation(const MfGrid& grid, double quarter, double t_in) {
  std::vector<double> dense(grid.node_count(), 0.0);
  const auto a = sparse_activation(grid.shape, quarter, t_in);
  for (std::size_t k = 0; k < a.count; ++k) dense[a.node[k]] += a.weight[k];
  return dense;
}

void project_nonincreasing(std::span<double> values) {
  // Blocks of pooled values, each holding (mean, length).
  std::vector<std::pair<double, std::size_t>> blocks;
  blocks.reserve(values.size());
  for (double v : values) {
    blocks.emplace_back(v, 1);
    while (blocks.size() > 1) {
      auto& prev = blocks[blocks.size() - 2];
      const auto& last = blocks.back();
      if (prev.first >= last.first) break;
      const double total = prev.first * static_cast<double>(prev.second) +
                           last.first * static_cast<double>(last.second);
      prev.second += last.second;
      prev.first = total / static_cast<double>(prev.second);
      blocks.pop_back();
    }
  }
  std::size_t i = 0;
  for (const auto& [mean, len] : blocks) {
    for (std::size_t k = 0; k < len; ++k) values[i++] = mean;
  }
}

double ShapedPolicy::surrogate(double quarter, double t_in) const {
  const auto a = sparse_activation(grid.shape, quarter, t_in);
  double s = 0.0;
  for (std::size_t k = 0; k < a.count; ++k) s += a.weight[k] * grid.weights[a.node[k]];
  return s;
}

int eval_shaped_policy(const ShapedPolicy& policy, int quarter, double t_in) {
  return policy.action(quarter, t_in);
}

ShapedPolicy fit_shaped_policy(std::span<const PolicySample> samples, const MfGridShape& shape,
                               const ShapingSolverParams& solver) {
  shape.validate();
  if (samples.empty()) throw InvalidArgument("fit_shaped_policy: no samples");

  const std::size_t nq = shape.quarter_nodes;
  const std::size_t nt = shape.temp_nodes;
  const std::size_t nodes = nq * nt;

  StencilMatrix a{nq, nt, std::vector<std::array<double, 9>>(nodes, std::array<double, 9>{})};
  std::vector<double> b(nodes, 0.0);
  std::vector<double> mass(nodes, 0.0);
  for (const auto& s : samples) {
    if (s.action != 0 && s.action != 1) throw InvalidArgument("policy samples must be binary");
    const auto act = sparse_activation(shape, s.quarter, s.t_in);
    for (std::size_t i = 0; i < act.count; ++i) {
      b[act.node[i]] += act.weight[i] * s.action;
      mass[act.node[i]] += act.weight[i];
      for (std::size_t j = 0; j < act.count; ++j) {
        a.add(act.node[i], act.node[j], act.weight[i] * act.weight[j]);
      }
    }
  }

  // Warm start: activation-weighted sample mean per node, unsampled nodes
  // copy the nearest sampled node of their quarter row.
  std::vector<double> theta(nodes, 0.0);
  for (std::size_t q = 0; q < nq; ++q) {
    for (std::size_t t = 0; t < nt; ++t) {
      const std::size_t idx = q * nt + t;
      if (mass[idx] > 0.0) {
        theta[idx] = b[idx] / mass[idx];
        continue;
      }
      for (std::size_t d = 1; d < nt; ++d) {
        if (t >= d && mass[idx - d] > 0.0) {
          theta[idx] = b[idx - d] / mass[idx - d];
          break;
        }
        if (t + d < nt && mass[idx + d] > 0.0) {
          theta[idx] = b[idx + d] / mass[idx + d];
          break;
        }
      }
    }
  }
  project_rows(theta, nq, nt);

  // FISTA on 0.5 theta^T A theta - b^T theta over the monotone cone.
  const double lipschitz = std::max(a.gershgorin_bound(), 1e-12);
  std::vector<double> y = theta;
  std::vector<double> prev = theta;
  std::vector<double> grad(nodes);
  std::vector<double> probe(nodes);
  double momentum = 1.0;
  ShapedPolicy policy;
  policy.grid.shape = shape;
  for (std::size_t it = 1; it <= solver.max_iterations; ++it) {
    a.multiply(y, grad);
    for (std::size_t i = 0; i < nodes; ++i) theta[i] = y[i] - (grad[i] - b[i]) / lipschitz;
    project_rows(theta, nq, nt);

    policy.iterations = it;
    if (it % 10 == 0 || it == solver.max_iterations) {
      // Fixed-point residual of the projected-gradient map at the new iterate.
      a.multiply(theta, grad);
      for (std::size_t i = 0; i < nodes; ++i) probe[i] = theta[i] - (grad[i] - b[i]) / lipschitz;
      project_rows(probe, nq, nt);
      double residual = 0.0;
      for (std::size_t i = 0; i < nodes; ++i) {
        residual = std::max(residual, std::abs(probe[i] - theta[i]));
      }
      policy.residual = residual;
      if (residual < solver.tolerance) break;
    }

    const double next_momentum = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
    const double beta = (momentum - 1.0) / next_momentum;
    for (std::size_t i = 0; i < nodes; ++i) y[i] = theta[i] + beta * (theta[i] - prev[i]);
    prev = theta;
    momentum = next_momentum;
  }
  policy.grid.weights = std::move(theta);
  return policy;
}

PolicyGrid shaped_policy_grid(const ShapedPolicy& policy, std::span<const double> temps) {
  PolicyGrid grid;
  grid.temps.assign(temps.begin(), temps.end());
  grid.actions.assign(kQuartersPerDay, std::vector<int>(temps.size(), 0));
  for (int q = 1; q <= kQuartersPerDay; ++q) {
    for (std::size_t i = 0; i < temps.size(); ++i) {
      grid.actions[static_cast<std::size_t>(q - 1)][i] = policy.action(q, temps[i]);
    }
  }
  return grid;
}

}  // namespace mabrl
