#pragma once

// Policy shaping: a binary policy over (quarter, indoor temperature) is
// regressed onto a tensor grid of triangular membership functions subject to
// the weights being nonincreasing in temperature, then thresholded at 0.5.

#include <array>
#include <span>
#include <vector>

#include "mabrl/policy_grid.hpp"

namespace mabrl {

struct MfGridShape {
  std::size_t quarter_nodes = 21;  // 96 gives one node per quarter
  std::size_t temp_nodes = 21;
  double t_lo = 17.0;
  double t_hi = 26.0;

  void validate() const;
};

struct MfGrid {
  MfGridShape shape;
  std::vector<double> weights;  // weights[qi * temp_nodes + ti]

  std::size_t node_count() const { return shape.quarter_nodes * shape.temp_nodes; }
  double weight(std::size_t qi, std::size_t ti) const {
    return weights[qi * shape.temp_nodes + ti];
  }
  double temp_node(std::size_t ti) const;
};

// Nonzero activations of at most four nodes; weights sum to one.
struct SparseActivation {
  std::array<std::size_t, 4> node{};
  std::array<double, 4> weight{};
  std::size_t count = 0;
};

// Quarter is continuous in [1, 96]; points outside the hull are clamped.
SparseActivation sparse_activation(const MfGridShape& shape, double quarter, double t_in);
std::vector<double> mf_activation(const MfGrid& grid, double quarter, double t_in);

struct PolicySample {
  int quarter = 1;
  double t_in = 0.0;
  int action = 0;
};

struct ShapingSolverParams {
  std::size_t max_iterations = 5000;
  double tolerance = 1e-8;  // on the projected-gradient fixed-point residual
};

struct ShapedPolicy {
  MfGrid grid;
  double threshold = 0.5;
  std::size_t iterations = 0;
  double residual = 0.0;

  double surrogate(double quarter, double t_in) const;
  int action(int quarter, double t_in) const { return surrogate(quarter, t_in) >= threshold ? 1 : 0; }
};

ShapedPolicy fit_shaped_policy(std::span<const PolicySample> samples, const MfGridShape& shape,
                               const ShapingSolverParams& solver = {});

int eval_shaped_policy(const ShapedPolicy& policy, int quarter, double t_in);

// Binary shaped policy on quarters 1..96 x temps.
PolicyGrid shaped_policy_grid(const ShapedPolicy& policy, std::span<const double> temps);

// Euclidean projection of `values` onto nonincreasing sequences (pool
// adjacent violators).
void project_nonincreasing(std::span<double> values);

}  // namespace mabrl
