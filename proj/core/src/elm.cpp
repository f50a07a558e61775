#include "mabrl/elm.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <string>

#include <nlohmann/json.hpp>

#include "mabrl/error.hpp"
#include "mabrl/rng.hpp"

namespace mabrl {

namespace {

using MatrixXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

Eigen::Map<const MatrixXd> as_eigen(const RowMatrix& m) {
  return {m.data().data(), static_cast<Eigen::Index>(m.rows()),
          static_cast<Eigen::Index>(m.cols())};
}

}  // namespace

void TrainSet::validate() const {
  if (targets.empty()) {
    throw InvalidArgument("train set is empty");
  }
  if (inputs.rows() != targets.size()) {
    throw InvalidArgument("train set: inputs and targets have different row counts");
  }
  for (double v : inputs.data()) {
    if (!std::isfinite(v)) throw InvalidArgument("train set: non-finite input");
  }
  for (double v : targets) {
    if (!std::isfinite(v)) throw InvalidArgument("train set: non-finite target");
  }
}

RowMatrix hidden_layer(const ElmNetwork& net, const RowMatrix& inputs) {
  if (inputs.cols() != net.input_dim()) {
    throw InvalidArgument("ELM input dimension mismatch");
  }
  const std::size_t m = inputs.rows();
  const std::size_t n = net.hidden_count();
  RowMatrix g(m, n);
  for (std::size_t j = 0; j < m; ++j) {
    const auto x = inputs.row(j);
    for (std::size_t i = 0; i < n; ++i) {
      const auto w = net.input_weights.row(i);
      const double z = std::inner_product(w.begin(), w.end(), x.begin(), net.biases[i]);
      g(j, i) = sigmoid(z);
    }
  }
  return g;
}

ElmNetwork train_elm(const TrainSet& train, std::size_t hidden_count, double regularization,
                     std::uint64_t seed) {
  if (hidden_count < 1) throw InvalidArgument("ELM needs at least one hidden node");
  if (!(regularization > 0.0)) throw InvalidArgument("ELM regularization C must be positive");
  train.validate();

  const std::size_t p = train.inputs.cols();
  ElmNetwork net;
  net.input_weights = RowMatrix(hidden_count, p);
  net.biases.resize(hidden_count);
  Rng rng(seed);
  for (std::size_t i = 0; i < hidden_count; ++i) {
    for (std::size_t d = 0; d < p; ++d) net.input_weights(i, d) = uniform(rng, -1.0, 1.0);
    net.biases[i] = uniform01(rng);
  }

  const RowMatrix g_rows = hidden_layer(net, train.inputs);
  const auto g = as_eigen(g_rows);
  const Eigen::Map<const Eigen::VectorXd> y(train.targets.data(),
                                            static_cast<Eigen::Index>(train.targets.size()));
  const auto n = static_cast<Eigen::Index>(hidden_count);

  Eigen::MatrixXd a = g.transpose() * g;
  a.diagonal().array() += 1.0 / regularization;
  const Eigen::VectorXd rhs = g.transpose() * y;

  const Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
  if (ldlt.info() != Eigen::Success) {
    throw NumericError("ELM normal equations could not be factorized");
  }
  Eigen::VectorXd beta = ldlt.solve(rhs);
  Eigen::VectorXd residual = rhs - a * beta;
  beta += ldlt.solve(residual);
  residual = rhs - a * beta;
  if (!beta.allFinite()) {
    throw NumericError("ELM output weights are not finite");
  }

  const double rhs_norm = rhs.norm();
  net.train_residual = rhs_norm > 0.0 ? residual.norm() / rhs_norm : residual.norm();
  net.output_weights.assign(beta.data(), beta.data() + n);
  return net;
}

double predict_elm(const ElmNetwork& net, std::span<const double> x) {
  if (x.size() != net.input_dim()) {
    throw InvalidArgument("ELM input dimension mismatch: got " + std::to_string(x.size()) +
                          ", expected " + std::to_string(net.input_dim()));
  }
  double y = 0.0;
  for (std::size_t i = 0; i < net.hidden_count(); ++i) {
    const auto w = net.input_weights.row(i);
    const double z = std::inner_product(w.begin(), w.end(), x.begin(), net.biases[i]);
    y += net.output_weights[i] * sigmoid(z);
  }
  return y;
}

double predict_ensemble(const ElmEnsemble& ensemble, std::span<const double> x) {
  if (ensemble.members.empty()) {
    throw InvalidArgument("ELM ensemble has no members");
  }
  double sum = 0.0;
  for (const auto& net : ensemble.members) sum += predict_elm(net, x);
  return sum / static_cast<double>(ensemble.members.size());
}

double ElmEnsemble::predict_raw(std::span<const double> raw) const {
  if (input_scaler.dim() == 0) return predict_ensemble(*this, raw);
  const auto x = input_scaler.apply(raw);
  return predict_ensemble(*this, x);
}

ElmEnsemble train_ensemble(const TrainSet& train, const ElmEnsembleParams& params,
                           std::uint64_t seed) {
  if (params.count < 1) throw InvalidArgument("ELM ensemble needs at least one member");
  ElmEnsemble ens;
  ens.regularization = params.regularization;
  ens.members.reserve(params.count);
  for (std::size_t l = 0; l < params.count; ++l) {
    ens.members.push_back(
        train_elm(train, params.hidden_count, params.regularization, derive_seed(seed, l)));
  }
  return ens;
}

std::size_t select_hidden_count(const TrainSet& train, std::span<const std::size_t> candidates,
                                std::size_t folds, double regularization, std::uint64_t seed) {
  if (candidates.empty()) throw InvalidArgument("no hidden-count candidates given");
  if (folds < 2) throw InvalidArgument("cross-validation needs at least two folds");
  train.validate();
  const std::size_t m = train.size();
  if (m < folds) {
    throw InvalidArgument("train set of " + std::to_string(m) + " rows is smaller than " +
                          std::to_string(folds) + " folds");
  }
  if (candidates.size() == 1) return candidates.front();

  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(seed, 0xf01d));
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::size_t> fold_of(m);
  for (std::size_t i = 0; i < m; ++i) fold_of[order[i]] = i % folds;

  std::vector<std::size_t> sorted(candidates.begin(), candidates.end());
  std::sort(sorted.begin(), sorted.end());

  std::size_t best = sorted.front();
  double best_rmse = std::numeric_limits<double>::infinity();
  for (std::size_t n : sorted) {
    double total = 0.0;
    for (std::size_t f = 0; f < folds; ++f) {
      TrainSet fit;
      TrainSet held;
      for (std::size_t i = 0; i < m; ++i) {
        auto& dst = fold_of[i] == f ? held : fit;
        dst.inputs.push_row(train.inputs.row(i));
        dst.targets.push_back(train.targets[i]);
      }
      const ElmNetwork net = train_elm(fit, n, regularization, derive_seed(seed, f));
      double sse = 0.0;
      for (std::size_t i = 0; i < held.size(); ++i) {
        const double e = predict_elm(net, held.inputs.row(i)) - held.targets[i];
        sse += e * e;
      }
      total += std::sqrt(sse / static_cast<double>(held.size()));
    }
    const double mean_rmse = total / static_cast<double>(folds);
    if (mean_rmse < best_rmse) {  // strict: ties keep the smaller count
      best_rmse = mean_rmse;
      best = n;
    }
  }
  return best;
}

void save_ensemble(const ElmEnsemble& ensemble, const std::filesystem::path& path) {
  nlohmann::json j;
  j["regularization"] = ensemble.regularization;
  j["scaler"] = {{"lo", ensemble.input_scaler.lo}, {"hi", ensemble.input_scaler.hi}};
  auto& members = j["members"] = nlohmann::json::array();
  for (const auto& net : ensemble.members) {
    members.push_back({{"hidden_count", net.hidden_count()},
                       {"input_dim", net.input_dim()},
                       {"input_weights", net.input_weights.data()},
                       {"biases", net.biases},
                       {"output_weights", net.output_weights}});
  }
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write ensemble file " + path.string());
  out << j.dump();
  if (!out) throw FormatError("write failed for " + path.string());
}

ElmEnsemble load_ensemble(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open ensemble file " + path.string());
  ElmEnsemble ens;
  try {
    const auto j = nlohmann::json::parse(in);
    ens.regularization = j.at("regularization").get<double>();
    ens.input_scaler.lo = j.at("scaler").at("lo").get<std::vector<double>>();
    ens.input_scaler.hi = j.at("scaler").at("hi").get<std::vector<double>>();
    for (const auto& m : j.at("members")) {
      ElmNetwork net;
      const auto n = m.at("hidden_count").get<std::size_t>();
      const auto p = m.at("input_dim").get<std::size_t>();
      net.input_weights = RowMatrix(n, p, m.at("input_weights").get<std::vector<double>>());
      net.biases = m.at("biases").get<std::vector<double>>();
      net.output_weights = m.at("output_weights").get<std::vector<double>>();
      if (net.biases.size() != n || net.output_weights.size() != n) {
        throw FormatError("ensemble member has inconsistent sizes");
      }
      ens.members.push_back(std::move(net));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("malformed ensemble file " + path.string() + ": " + e.what());
  } catch (const InvalidArgument& e) {
    throw FormatError("malformed ensemble file " + path.string() + ": " + e.what());
  }
  if (ens.members.empty()) throw FormatError("ensemble file has no members");
  if (ens.input_scaler.lo.size() != ens.input_scaler.hi.size()) {
    throw FormatError("ensemble scaler bounds have different lengths");
  }
  return ens;
}

}  // namespace mabrl
