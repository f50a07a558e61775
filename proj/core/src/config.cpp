#include "mabrl/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "mabrl/error.hpp"

namespace mabrl {

using nlohmann::json;

std::string to_string(Controller c) {
  switch (c) {
    case Controller::Mabrl: return "MABRL";
    case Controller::Brl: return "BRL";
    case Controller::Default: return "DEFAULT";
    case Controller::Optimal: return "OPTIMAL";
  }
  return "?";
}

Controller parse_controller(const std::string& name) {
  std::string up = name;
  std::transform(up.begin(), up.end(), up.begin(), [](unsigned char c) { return std::toupper(c); });
  if (up == "MABRL") return Controller::Mabrl;
  if (up == "BRL") return Controller::Brl;
  if (up == "DEFAULT") return Controller::Default;
  if (up == "OPTIMAL") return Controller::Optimal;
  throw InvalidArgument("unknown controller '" + name + "' (expected MABRL, BRL, DEFAULT or OPTIMAL)");
}

void ExperimentConfig::validate() const {
  if (days < 1) throw InvalidArgument("config: days must be >= 1");
  if (seeds.empty()) throw InvalidArgument("config: at least one seed is required");
  if (controllers.empty()) throw InvalidArgument("config: at least one controller is required");
  for (int s : recompute_steps) {
    if (s < 0 || s >= kQuartersPerDay) {
      throw InvalidArgument("config: recompute step " + std::to_string(s) + " outside the day");
    }
  }
  if (recompute_steps.empty()) throw InvalidArgument("config: no recompute steps");
  etp.validate();
  shaping_grid.validate();
  fqi.forest.validate(6);
  if (support_model.ensemble_size < 1 || support_model.hidden_candidates.empty() ||
      support_model.folds < 2 || !(support_model.regularization > 0.0)) {
    throw InvalidArgument("config: invalid support model settings");
  }
  if (!(virtual_tuples.radius >= 0.0)) throw InvalidArgument("config: negative virtual-tuple radius");
  if (!(virtual_tuples.count_ratio >= 0.0)) throw InvalidArgument("config: negative virtual-tuple count ratio");
  if (!(exploration.epsilon_0 > 0.0 && exploration.epsilon_0 <= 1.0) || !(exploration.decay > 0.0)) {
    throw InvalidArgument("config: exploration needs epsilon_0 in (0, 1] and decay > 0");
  }
  if (!(lattice_step > 0.0) || !(lattice_hi > lattice_lo)) {
    throw InvalidArgument("config: bad policy lattice");
  }
  if (!(scale_margin > 0.0)) throw InvalidArgument("config: scale_margin must be positive");
}

namespace {

// Reads keys from one JSON object and rejects the ones nobody asked for.
class Section {
 public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw InvalidArgument("config: '" + name_ + "' must be an object");
  }
  ~Section() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw InvalidArgument("config: unknown key '" + name_ + "." + key + "'");
    }
  }

  template <typename T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw InvalidArgument("config: bad value for '" + name_ + "." + key + "': " + e.what());
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

 private:
  const json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

std::vector<double> scalar_or_array(const json& j, const char* what) {
  if (j.is_number()) return {j.get<double>()};
  if (j.is_array()) return j.get<std::vector<double>>();
  throw InvalidArgument(std::string("config: comfort.") + what + " must be a number or an array");
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig c;
  {
    Section root(j, "config");
    root.read("days", c.days);
    root.read("seeds", c.seeds);
    root.read("recompute_steps", c.recompute_steps);
    root.read("scale_margin", c.scale_margin);
    root.read("per_day_optimum", c.per_day_optimum);
    if (const json* ctl = root.child("controllers")) {
      c.controllers.clear();
      for (const auto& name : ctl->get<std::vector<std::string>>()) {
        c.controllers.push_back(parse_controller(name));
      }
    }
    if (const json* s = root.child("scenario")) {
      Section sec(*s, "scenario");
      if (const json* csv = sec.child("csv")) c.scenario.csv = csv->get<std::string>();
      if (const json* syn = sec.child("synthetic")) {
        Section p(*syn, "scenario.synthetic");
        auto& sp = c.scenario.synthetic;
        p.read("mean_temp", sp.mean_temp);
        p.read("daily_mean_spread", sp.daily_mean_spread);
        p.read("diurnal_amplitude", sp.diurnal_amplitude);
        p.read("solar_peak", sp.solar_peak);
        p.read("price_base", sp.price_base);
        p.read("price_peak", sp.price_peak);
        p.read("price_noise", sp.price_noise);
      }
      if (const json* fn = sec.child("forecast_noise")) {
        Section p(*fn, "scenario.forecast_noise");
        p.read("outside_temp_std", c.scenario.forecast_noise.outside_temp_std);
        p.read("solar_std", c.scenario.forecast_noise.solar_std);
      }
    }
    if (const json* e = root.child("etp")) {
      Section p(*e, "etp");
      p.read("r_a", c.etp.r_a);
      p.read("c_a", c.etp.c_a);
      p.read("r_m", c.etp.r_m);
      p.read("c_m", c.etp.c_m);
      p.read("a_s", c.etp.a_s);
      p.read("a_c", c.etp.a_c);
      p.read("q_ac", c.etp.q_ac);
      p.read("p_elec", c.etp.p_elec);
      p.read("solar_aperture", c.etp.solar_aperture);
      p.read("substep_seconds", c.etp.substep_seconds);
      p.read("sanity_bound", c.etp.sanity_bound);
    }
    if (const json* s = root.child("initial_state")) {
      Section p(*s, "initial_state");
      p.read("t_a", c.initial_state.t_a);
      p.read("t_m", c.initial_state.t_m);
    }
    if (const json* b = root.child("comfort")) {
      Section p(*b, "comfort");
      const json* lo = p.child("lower");
      const json* hi = p.child("upper");
      std::vector<double> lower = lo ? scalar_or_array(*lo, "lower") : c.bounds.lower();
      std::vector<double> upper = hi ? scalar_or_array(*hi, "upper") : c.bounds.upper();
      c.bounds = ComfortBounds(std::move(lower), std::move(upper));
    }
    if (const json* s = root.child("support_model")) {
      Section p(*s, "support_model");
      p.read("ensemble_size", c.support_model.ensemble_size);
      p.read("hidden_candidates", c.support_model.hidden_candidates);
      p.read("folds", c.support_model.folds);
      p.read("regularization", c.support_model.regularization);
    }
    if (const json* v = root.child("virtual_tuples")) {
      Section p(*v, "virtual_tuples");
      p.read("radius", c.virtual_tuples.radius);
      p.read("t_in_margin", c.virtual_tuples.t_in_margin);
      p.read("count_ratio", c.virtual_tuples.count_ratio);
      if (const json* n = p.child("max_count"); n && !n->is_null()) c.virtual_tuples.max_count = n->get<std::size_t>();
      if (const json* h = p.child("budget"); h && !h->is_null()) c.virtual_tuples.budget = h->get<std::size_t>();
    }
    if (const json* f = root.child("fqi")) {
      Section p(*f, "fqi");
      p.read("iterations", c.fqi.iterations);
      p.read("tree_count", c.fqi.forest.tree_count);
      p.read("features_per_split", c.fqi.forest.features_per_split);
      p.read("min_samples_split", c.fqi.forest.min_samples_split);
    }
    if (const json* s = root.child("shaping")) {
      Section p(*s, "shaping");
      p.read("quarter_nodes", c.shaping_grid.quarter_nodes);
      p.read("temp_nodes", c.shaping_grid.temp_nodes);
      p.read("t_lo", c.shaping_grid.t_lo);
      p.read("t_hi", c.shaping_grid.t_hi);
      p.read("max_iterations", c.shaping_solver.max_iterations);
      p.read("tolerance", c.shaping_solver.tolerance);
    }
    if (const json* e = root.child("exploration")) {
      Section p(*e, "exploration");
      p.read("epsilon_0", c.exploration.epsilon_0);
      p.read("decay", c.exploration.decay);
    }
    if (const json* g = root.child("dp_grid")) {
      Section p(*g, "dp_grid");
      p.read("t_a_resolution", c.dp_grid.t_a_resolution);
      p.read("t_m_resolution", c.dp_grid.t_m_resolution);
      p.read("t_a_margin", c.dp_grid.t_a_margin);
    }
    if (const json* l = root.child("policy_lattice")) {
      Section p(*l, "policy_lattice");
      p.read("lo", c.lattice_lo);
      p.read("hi", c.lattice_hi);
      p.read("step", c.lattice_step);
    }
  }
  c.validate();
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["days"] = c.days;
  j["seeds"] = c.seeds;
  j["controllers"] = json::array();
  for (auto ctl : c.controllers) j["controllers"].push_back(to_string(ctl));
  j["recompute_steps"] = c.recompute_steps;
  j["scale_margin"] = c.scale_margin;
  j["per_day_optimum"] = c.per_day_optimum;
  json sc;
  if (c.scenario.csv) sc["csv"] = c.scenario.csv->string();
  const auto& sp = c.scenario.synthetic;
  sc["synthetic"] = {{"mean_temp", sp.mean_temp},       {"daily_mean_spread", sp.daily_mean_spread},
                     {"diurnal_amplitude", sp.diurnal_amplitude}, {"solar_peak", sp.solar_peak},
                     {"price_base", sp.price_base},     {"price_peak", sp.price_peak},
                     {"price_noise", sp.price_noise}};
  sc["forecast_noise"] = {{"outside_temp_std", c.scenario.forecast_noise.outside_temp_std},
                          {"solar_std", c.scenario.forecast_noise.solar_std}};
  j["scenario"] = sc;
  const auto& e = c.etp;
  j["etp"] = {{"r_a", e.r_a},   {"c_a", e.c_a},   {"r_m", e.r_m},     {"c_m", e.c_m},
              {"a_s", e.a_s},   {"a_c", e.a_c},   {"q_ac", e.q_ac},   {"p_elec", e.p_elec},
              {"solar_aperture", e.solar_aperture}, {"substep_seconds", e.substep_seconds},
              {"sanity_bound", e.sanity_bound}};
  j["initial_state"] = {{"t_a", c.initial_state.t_a}, {"t_m", c.initial_state.t_m}};
  const auto& lo = c.bounds.lower();
  const auto& hi = c.bounds.upper();
  j["comfort"] = {{"lower", lo.size() == 1 ? json(lo[0]) : json(lo)},
                  {"upper", hi.size() == 1 ? json(hi[0]) : json(hi)}};
  j["support_model"] = {{"ensemble_size", c.support_model.ensemble_size},
                        {"hidden_candidates", c.support_model.hidden_candidates},
                        {"folds", c.support_model.folds},
                        {"regularization", c.support_model.regularization}};
  json vt = {{"radius", c.virtual_tuples.radius},
             {"t_in_margin", c.virtual_tuples.t_in_margin},
             {"count_ratio", c.virtual_tuples.count_ratio}};
  vt["max_count"] = c.virtual_tuples.max_count ? json(*c.virtual_tuples.max_count) : json(nullptr);
  vt["budget"] = c.virtual_tuples.budget ? json(*c.virtual_tuples.budget) : json(nullptr);
  j["virtual_tuples"] = vt;
  j["fqi"] = {{"iterations", c.fqi.iterations},
              {"tree_count", c.fqi.forest.tree_count},
              {"features_per_split", c.fqi.forest.features_per_split},
              {"min_samples_split", c.fqi.forest.min_samples_split}};
  j["shaping"] = {{"quarter_nodes", c.shaping_grid.quarter_nodes}, {"temp_nodes", c.shaping_grid.temp_nodes},
                  {"t_lo", c.shaping_grid.t_lo},                   {"t_hi", c.shaping_grid.t_hi},
                  {"max_iterations", c.shaping_solver.max_iterations},
                  {"tolerance", c.shaping_solver.tolerance}};
  j["exploration"] = {{"epsilon_0", c.exploration.epsilon_0}, {"decay", c.exploration.decay}};
  j["dp_grid"] = {{"t_a_resolution", c.dp_grid.t_a_resolution},
                  {"t_m_resolution", c.dp_grid.t_m_resolution},
                  {"t_a_margin", c.dp_grid.t_a_margin}};
  j["policy_lattice"] = {{"lo", c.lattice_lo}, {"hi", c.lattice_hi}, {"step", c.lattice_step}};
  return j;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw FormatError("config " + path.string() + ": " + e.what());
  }
  ExperimentConfig c = config_from_json(j);
  if (c.scenario.csv && c.scenario.csv->is_relative()) {
    c.scenario.csv = path.parent_path() / *c.scenario.csv;
  }
  return c;
}

}  // namespace mabrl
