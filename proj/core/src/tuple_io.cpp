#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "csv_util.hpp"
#include "mabrl/error.hpp"
#include "mabrl/fqi.hpp"
#include "mabrl/policy_grid.hpp"

namespace mabrl {

namespace {

constexpr const char* kBatchHeader =
    "quarter,t_in,t_out,solar,u_prev,u,quarter_next,t_in_next,t_out_next,solar_next,"
    "u_prev_next,u_phys,origin";
constexpr const char* kGridHeader = "quarter,t_in_c,action";

int int_field(const std::string& s, std::size_t line) {
  return static_cast<int>(csv::to_int(s, line));
}

void write_tuple(std::ostream& out, const ExperienceTuple& t, char origin) {
  out << t.x.quarter << ',' << t.x.t_in << ',' << t.x.t_out << ',' << t.x.solar << ','
      << t.x.u_prev << ',' << t.u << ',' << t.x_next.quarter << ',' << t.x_next.t_in << ','
      << t.x_next.t_out << ',' << t.x_next.solar << ',' << t.x_next.u_prev << ',' << t.u_phys
      << ',' << origin << '\n';
}

}  // namespace

void save_batch(const Batch& batch, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write batch file " + path.string());
  out << kBatchHeader << '\n' << std::setprecision(17);
  for (const auto& t : batch.experimental) write_tuple(out, t, 'E');
  for (const auto& t : batch.virtual_tuples) write_tuple(out, t, 'M');
  if (!out) throw FormatError("write failed for " + path.string());
}

Batch load_batch(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open batch file " + path.string());
  std::string line;
  if (!std::getline(in, line) || csv::strip_cr(line) != kBatchHeader) {
    throw FormatError("batch file " + path.string() + " lacks the expected header");
  }
  Batch batch;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = csv::strip_cr(line);
    if (line.empty()) continue;
    const auto f = csv::split(line);
    if (f.size() != 13) {
      throw FormatError("line " + std::to_string(lineno) + ": expected 13 fields");
    }
    ExperienceTuple t;
    t.x = {int_field(f[0], lineno), csv::to_double(f[1], lineno), csv::to_double(f[2], lineno),
           csv::to_double(f[3], lineno), int_field(f[4], lineno)};
    t.u = int_field(f[5], lineno);
    t.x_next = {int_field(f[6], lineno), csv::to_double(f[7], lineno), csv::to_double(f[8], lineno),
                csv::to_double(f[9], lineno), int_field(f[10], lineno)};
    t.u_phys = int_field(f[11], lineno);
    if (!t.consistent()) {
      throw FormatError("line " + std::to_string(lineno) + ": inconsistent tuple");
    }
    if (f[12] == "E") {
      batch.experimental.push_back(t);
    } else if (f[12] == "M") {
      batch.virtual_tuples.push_back(t);
    } else {
      throw FormatError("line " + std::to_string(lineno) + ": origin must be E or M");
    }
  }
  return batch;
}

std::vector<double> temperature_lattice(double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi >= lo)) {
    throw InvalidArgument("temperature lattice needs step > 0 and hi >= lo");
  }
  std::vector<double> temps;
  const auto count = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  temps.reserve(count);
  for (std::size_t i = 0; i < count; ++i) temps.push_back(lo + step * static_cast<double>(i));
  return temps;
}

void save_policy_grid(const PolicyGrid& grid, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write policy grid " + path.string());
  out << kGridHeader << '\n' << std::setprecision(17);
  for (std::size_t q = 0; q < grid.actions.size(); ++q) {
    for (std::size_t i = 0; i < grid.temps.size(); ++i) {
      out << q + 1 << ',' << grid.temps[i] << ',' << grid.actions[q][i] << '\n';
    }
  }
  if (!out) throw FormatError("write failed for " + path.string());
}

PolicyGrid load_policy_grid(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open policy grid " + path.string());
  std::string line;
  if (!std::getline(in, line) || csv::strip_cr(line) != kGridHeader) {
    throw FormatError("policy grid " + path.string() + " lacks the expected header");
  }
  PolicyGrid grid;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = csv::strip_cr(line);
    if (line.empty()) continue;
    const auto f = csv::split(line);
    if (f.size() != 3) throw FormatError("line " + std::to_string(lineno) + ": expected 3 fields");
    const int q = int_field(f[0], lineno);
    const double t = csv::to_double(f[1], lineno);
    const int a = int_field(f[2], lineno);
    if (q < 1 || (a != 0 && a != 1)) {
      throw FormatError("line " + std::to_string(lineno) + ": bad quarter or action");
    }
    const auto qi = static_cast<std::size_t>(q - 1);
    if (qi == grid.actions.size()) {
      grid.actions.emplace_back();
    } else if (qi + 1 != grid.actions.size()) {
      throw FormatError("line " + std::to_string(lineno) + ": quarters out of order");
    }
    if (qi == 0) grid.temps.push_back(t);
    auto& row = grid.actions.back();
    if (row.size() >= grid.temps.size() || grid.temps[row.size()] != t) {
      throw FormatError("line " + std::to_string(lineno) + ": temperature column mismatch");
    }
    row.push_back(a);
  }
  for (const auto& row : grid.actions) {
    if (row.size() != grid.temps.size()) throw FormatError("policy grid rows are ragged");
  }
  return grid;
}

}  // namespace mabrl
