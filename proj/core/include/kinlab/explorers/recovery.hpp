#pragma once

#include <nlohmann/json.hpp>
#include <vector>

#include "kinlab/explorers/abstraction.hpp"
#include "kinlab/psdp/psdp.hpp"

namespace kinlab {

// Empirical T(j | i, a) between combined codes of steps h and h+1.
struct AbstractTransitions {
  int h = 1;
  int from_codes = 0;
  int to_codes = 0;
  int num_actions = 0;
  std::vector<std::uint64_t> counts;  // [(i * K + a) * to_codes + j]

  std::uint64_t row_count(int i, Action a) const;
  // Empty when the row has no data.
  std::vector<double> row(int i, Action a) const;
};

struct AbstractDynamics {
  std::vector<AbstractTransitions> steps;  // h = 1..H-1
  nlohmann::json to_json() const;
};

// n transitions per step: roll in with Unf(Psi_h), act uniformly at h,
// decode x_h and x_{h+1} with the combined abstraction.
AbstractDynamics recover_dynamics(const Environment& env, const std::vector<PolicyCover>& covers,
                                  const Abstraction& forward, const Abstraction& backward, std::size_t n_per_step,
                                  std::uint64_t seed);

}  // namespace kinlab
