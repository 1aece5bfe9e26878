#pragma once

#include <cmath>
#include <vector>

namespace kinlab {

// Two-sided Hoeffding half-width for a mean of n variables in [0, range].
inline double hoeffding_half_width(double n, double delta, double range = 1.0) {
  if (n <= 0) return range;
  return range * std::sqrt(std::log(2.0 / delta) / (2.0 * n));
}

inline double total_variation(const std::vector<double>& p, const std::vector<double>& q) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - (i < q.size() ? q[i] : 0.0));
  for (std::size_t i = p.size(); i < q.size(); ++i) s += std::abs(q[i]);
  return 0.5 * s;
}

}  // namespace kinlab
