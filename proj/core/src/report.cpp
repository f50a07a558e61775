#include "mabrl/report.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>

#include <nlohmann/json.hpp>

#include "csv_util.hpp"
#include "mabrl/error.hpp"

namespace mabrl {

namespace {

constexpr const char* kStepsHeader =
    "controller,seed,day,step,quarter,t_in,t_out,solar,u_prev,t_m,u,u_phys,cost,epsilon";
constexpr const char* kDailyHeader = "controller,seed,day,cost,cumulative_cost,optimal_cost,violations";

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << std::setprecision(17);
  return out;
}

void write_optional(std::ostream& out, const std::optional<double>& v) {
  if (v) out << *v;
}

nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::optional<double> optional_from(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

}  // namespace

std::vector<DailyRow> daily_rows(std::span<const RunResult> runs) {
  std::vector<DailyRow> rows;
  for (const auto& run : runs) {
    for (const auto& d : run.days) {
      DailyRow r{to_string(run.controller), run.seed, d.day, d.cost, d.cumulative_cost, std::nullopt,
                 d.violations};
      if (!std::isnan(d.optimal_cost)) r.optimal_cost = d.optimal_cost;
      rows.push_back(std::move(r));
    }
  }
  return rows;
}

void export_report(std::span<const RunResult> runs, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto steps = open_out(dir / "steps.csv");
  steps << kStepsHeader << '\n';
  for (const auto& run : runs) {
    const std::string name = to_string(run.controller);
    for (const auto& d : run.days) {
      for (const auto& s : d.steps) {
        steps << name << ',' << run.seed << ',' << s.day << ',' << s.step << ',' << s.x.quarter << ','
              << s.x.t_in << ',' << s.x.t_out << ',' << s.x.solar << ',' << s.x.u_prev << ',' << s.t_m
              << ',' << s.u << ',' << s.u_phys << ',' << s.cost << ',' << s.epsilon << '\n';
      }
    }
  }
  auto daily = open_out(dir / "daily.csv");
  daily << kDailyHeader << '\n';
  for (const auto& r : daily_rows(runs)) {
    daily << r.controller << ',' << r.seed << ',' << r.day << ',' << r.cost << ',' << r.cumulative_cost
          << ',';
    write_optional(daily, r.optimal_cost);
    daily << ',' << r.violations << '\n';
  }
  if (!steps || !daily) throw Error("write failure in " + dir.string());
}

std::vector<DailyRow> load_daily_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || csv::strip_cr(line) != kDailyHeader) {
    throw FormatError(path.string() + " lacks the daily report header");
  }
  std::vector<DailyRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = csv::strip_cr(line);
    if (line.empty()) continue;
    const auto f = csv::split(line);
    if (f.size() != 7) throw FormatError("line " + std::to_string(lineno) + ": expected 7 fields");
    DailyRow r;
    r.controller = f[0];
    r.seed = std::stoull(f[1]);
    r.day = static_cast<int>(csv::to_int(f[2], lineno));
    r.cost = csv::to_double(f[3], lineno);
    r.cumulative_cost = csv::to_double(f[4], lineno);
    if (!f[5].empty()) r.optimal_cost = csv::to_double(f[5], lineno);
    r.violations = static_cast<std::size_t>(csv::to_int(f[6], lineno));
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<BenchmarkRow> benchmark_rows(std::span<const RunResult> runs) {
  std::map<std::pair<std::uint64_t, int>, BenchmarkRow> table;
  for (const auto& run : runs) {
    for (const auto& d : run.days) {
      auto& row = table[{run.seed, d.day}];
      row.seed = run.seed;
      row.day = d.day;
      switch (run.controller) {
        case Controller::Optimal: row.optimal_cost = d.cost; break;
        case Controller::Default: row.default_cost = d.cost; break;
        case Controller::Mabrl: row.mabrl_cost = d.cost; break;
        case Controller::Brl: row.brl_cost = d.cost; break;
      }
    }
  }
  std::vector<BenchmarkRow> rows;
  rows.reserve(table.size());
  for (auto& [key, row] : table) rows.push_back(row);
  return rows;
}

void export_benchmark(std::span<const RunResult> runs, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : benchmark_rows(runs)) {
    j.push_back({{"seed", r.seed},
                 {"day", r.day},
                 {"optimal_cost", optional_json(r.optimal_cost)},
                 {"default_cost", optional_json(r.default_cost)},
                 {"mabrl_cost", optional_json(r.mabrl_cost)},
                 {"brl_cost", optional_json(r.brl_cost)}});
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

std::vector<BenchmarkRow> load_benchmark(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<BenchmarkRow> rows;
  try {
    const auto j = nlohmann::json::parse(in);
    for (const auto& e : j) {
      BenchmarkRow r;
      r.seed = e.at("seed").get<std::uint64_t>();
      r.day = e.at("day").get<int>();
      r.optimal_cost = optional_from(e, "optimal_cost");
      r.default_cost = optional_from(e, "default_cost");
      r.mabrl_cost = optional_from(e, "mabrl_cost");
      r.brl_cost = optional_from(e, "brl_cost");
      rows.push_back(r);
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  return rows;
}

void export_policy_grids(std::span<const std::pair<std::string, PolicyGrid>> grids,
                         const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& [name, grid] : grids) save_policy_grid(grid, dir / ("policy_" + name + ".csv"));
}

}  // namespace mabrl
