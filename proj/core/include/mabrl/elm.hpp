#pragma once

// Extreme learning machines: single-hidden-layer sigmoid networks with random
// input weights and ridge-regressed output weights, bagged into an ensemble.
// Used as the support model predicting the one-step indoor temperature change.

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "mabrl/matrix.hpp"

namespace mabrl {

struct TrainSet {
  RowMatrix inputs;              // m x p, already normalized
  std::vector<double> targets;   // m

  std::size_t size() const { return targets.size(); }
  void validate() const;
};

struct ElmNetwork {
  RowMatrix input_weights;            // n x p, entries U(-1, 1)
  std::vector<double> biases;         // n, entries U(0, 1)
  std::vector<double> output_weights; // n
  double train_residual = 0.0;        // relative normal-equations residual at fit time

  std::size_t hidden_count() const { return biases.size(); }
  std::size_t input_dim() const { return input_weights.cols(); }
};

struct ElmEnsemble {
  std::vector<ElmNetwork> members;
  double regularization = 100.0;
  MinMaxScaler input_scaler;   // raw -> normalized input map; empty means identity

  std::size_t input_dim() const { return members.empty() ? 0 : members.front().input_dim(); }

  // Applies input_scaler (when present) then predict_ensemble.
  double predict_raw(std::span<const double> raw) const;
};

// Hidden-layer output matrix G (m x n) with sigmoid activation.
RowMatrix hidden_layer(const ElmNetwork& net, const RowMatrix& inputs);

// Random hidden layer from `seed`, then beta = (I/C + G^T G)^{-1} G^T Y via a
// pivoted LDL^T factorization with one refinement step.
ElmNetwork train_elm(const TrainSet& train, std::size_t hidden_count, double regularization,
                     std::uint64_t seed);

double predict_elm(const ElmNetwork& net, std::span<const double> x);
double predict_ensemble(const ElmEnsemble& ensemble, std::span<const double> x);

struct ElmEnsembleParams {
  std::size_t count = 40;
  std::size_t hidden_count = 20;
  double regularization = 100.0;
};

ElmEnsemble train_ensemble(const TrainSet& train, const ElmEnsembleParams& params,
                           std::uint64_t seed);

// k-fold cross-validation over single networks; ties go to the smaller count.
std::size_t select_hidden_count(const TrainSet& train, std::span<const std::size_t> candidates,
                                std::size_t folds, double regularization, std::uint64_t seed);

void save_ensemble(const ElmEnsemble& ensemble, const std::filesystem::path& path);
ElmEnsemble load_ensemble(const std::filesystem::path& path);

}  // namespace mabrl
