#include "mabrl/backup.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mabrl/error.hpp"

namespace mabrl {

ComfortBounds::ComfortBounds(double lower, double upper)
    : ComfortBounds(std::vector<double>{lower}, std::vector<double>{upper}) {}

ComfortBounds::ComfortBounds(std::vector<double> lower, std::vector<double> upper)
    : lower_(std::move(lower)), upper_(std::move(upper)) {
  if (lower_.size() != upper_.size()) {
    throw InvalidArgument("comfort bounds: lower and upper lengths differ");
  }
  if (lower_.size() != 1 && lower_.size() != static_cast<std::size_t>(kQuartersPerDay)) {
    throw InvalidArgument("comfort bounds need 1 or 96 entries, got " +
                          std::to_string(lower_.size()));
  }
  for (std::size_t i = 0; i < lower_.size(); ++i) {
    if (!std::isfinite(lower_[i]) || !std::isfinite(upper_[i]) || !(lower_[i] < upper_[i])) {
      throw InvalidArgument("comfort bounds: lower must be strictly below upper at index " +
                            std::to_string(i));
    }
  }
}

double ComfortBounds::min_lower() const { return *std::min_element(lower_.begin(), lower_.end()); }

double ComfortBounds::max_upper() const { return *std::max_element(upper_.begin(), upper_.end()); }

int apply_backup(const StateVector& x, int u, const ComfortBounds& bounds) {
  const double lo = bounds.lower_at(x.quarter);
  const double hi = bounds.upper_at(x.quarter);
  if (x.t_in <= lo) return 1;
  if (x.t_in > hi) return 0;
  if (x.u_prev == 1) return 1;
  return u != 0 ? 1 : 0;
}

}  // namespace mabrl
