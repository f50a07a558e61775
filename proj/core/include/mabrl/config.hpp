#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mabrl/backup.hpp"
#include "mabrl/dispatch.hpp"
#include "mabrl/etp.hpp"
#include "mabrl/extratrees.hpp"
#include "mabrl/fqi.hpp"
#include "mabrl/optimal.hpp"
#include "mabrl/scenario.hpp"
#include "mabrl/shaping.hpp"

namespace mabrl {

enum class Controller { Mabrl, Brl, Default, Optimal };

std::string to_string(Controller c);
Controller parse_controller(const std::string& name);  // case-insensitive

struct SupportModelConfig {
  std::size_t ensemble_size = 40;
  std::vector<std::size_t> hidden_candidates{10, 20, 40};
  std::size_t folds = 3;
  double regularization = 100.0;
};

struct ScenarioConfig {
  std::optional<std::filesystem::path> csv;  // otherwise synthetic
  SyntheticScenarioParams synthetic;
  ForecastNoise forecast_noise{0.5, 0.02};
};

struct ExperimentConfig {
  std::size_t days = 40;
  std::vector<std::uint64_t> seeds{1};
  std::vector<Controller> controllers{Controller::Mabrl};
  std::vector<int> recompute_steps{0, 32, 64};  // steps within the day

  ScenarioConfig scenario;
  EtpParams etp;
  EtpState initial_state{21.5, 21.5};
  ComfortBounds bounds{20.0, 23.0};
  double scale_margin = 3.0;  // indoor normalization range = band +/- margin

  SupportModelConfig support_model;
  VirtualTupleParams virtual_tuples;
  FqiParams fqi;
  MfGridShape shaping_grid;
  ShapingSolverParams shaping_solver;
  ExplorationSchedule exploration;
  DpGrid dp_grid;

  // Also compute, for learning controllers, the per-day optimum from the
  // controller's own start-of-day state.
  bool per_day_optimum = true;

  // Lattice used for exported policy grids.
  double lattice_lo = 17.0;
  double lattice_hi = 26.0;
  double lattice_step = 0.25;

  // Throws InvalidArgument on inconsistent settings.
  void validate() const;
};

// Missing keys keep their defaults; unknown keys are rejected.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& config);
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace mabrl
