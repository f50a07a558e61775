#pragma once

#include <array>
#include <vector>

namespace mabrl {

inline constexpr int kQuartersPerDay = 96;

// MDP state: quarter of the day, indoor and outside temperature, solar heat
// gain and the previously applied action. Actions are 0 (OFF) or 1 (ON).
struct StateVector {
  int quarter = 1;        // 1..96
  double t_in = 20.0;     // degC
  double t_out = 0.0;     // degC
  double solar = 0.0;     // kW
  int u_prev = 0;         // 0 or 1

  bool valid() const {
    return quarter >= 1 && quarter <= kQuartersPerDay && (u_prev == 0 || u_prev == 1);
  }

  friend bool operator==(const StateVector&, const StateVector&) = default;
};

// Quarter following q, wrapping 96 -> 1.
constexpr int next_quarter(int q) { return q % kQuartersPerDay + 1; }

// Comfort band per quarter of the day. A single entry means a constant band.
class ComfortBounds {
 public:
  ComfortBounds() : ComfortBounds(20.0, 23.0) {}
  ComfortBounds(double lower, double upper);
  ComfortBounds(std::vector<double> lower, std::vector<double> upper);

  double lower_at(int quarter) const { return lower_[index(quarter)]; }
  double upper_at(int quarter) const { return upper_[index(quarter)]; }

  double min_lower() const;
  double max_upper() const;
  bool is_constant() const { return lower_.size() == 1; }
  const std::vector<double>& lower() const { return lower_; }
  const std::vector<double>& upper() const { return upper_; }

 private:
  std::size_t index(int quarter) const {
    return lower_.size() == 1 ? 0 : static_cast<std::size_t>(quarter - 1);
  }

  std::vector<double> lower_;
  std::vector<double> upper_;
};

// Hysteresis safety filter mapping a requested action to the applied one:
// forced ON at or below the lower bound, latched ON inside the band once
// running, forced OFF above the upper bound.
int apply_backup(const StateVector& x, int u, const ComfortBounds& bounds);

// Electricity cost of one step, EUR. Nonnegative for nonnegative prices.
inline double stage_cost(int u_phys, double price, double p_elec, double step_hours) {
  return u_phys != 0 ? p_elec * step_hours * price : 0.0;
}

}  // namespace mabrl
