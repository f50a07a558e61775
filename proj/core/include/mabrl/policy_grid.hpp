#pragma once

#include <filesystem>
#include <vector>

namespace mabrl {

// Binary policy sampled on (quarter x indoor temperature). actions[q - 1][i]
// is the action at quarter q and temperature temps[i].
struct PolicyGrid {
  std::vector<double> temps;
  std::vector<std::vector<int>> actions;

  std::size_t quarters() const { return actions.size(); }
  int at(int quarter, std::size_t temp_index) const {
    return actions[static_cast<std::size_t>(quarter - 1)][temp_index];
  }

  friend bool operator==(const PolicyGrid&, const PolicyGrid&) = default;
};

// Evenly spaced temperatures lo, lo + step, ..., <= hi (+ rounding slack).
std::vector<double> temperature_lattice(double lo, double hi, double step);

// Long-format CSV with header `quarter,t_in_c,action`.
void save_policy_grid(const PolicyGrid& grid, const std::filesystem::path& path);
PolicyGrid load_policy_grid(const std::filesystem::path& path);

}  // namespace mabrl
