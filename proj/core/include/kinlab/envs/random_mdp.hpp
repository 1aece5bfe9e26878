#pragma once

#include "kinlab/block_mdp/mdp.hpp"
#include "kinlab/common/random.hpp"

namespace kinlab {

// Random tabular Block MDPs with planted structure: some states are split
// into copies whose inflows are proportional.  A copy either shares its
// sibling's outgoing rows (kinematically inseparable) or gets fresh rows
// (backward inseparable only).
struct RandomMdpOptions {
  int min_horizon = 2;
  int max_horizon = 4;
  int max_states = 4;
  int min_actions = 1;
  int max_actions = 3;
  double zero_prob = 0.3;
  double split_prob = 0.5;
  double forward_copy_prob = 0.5;
  int max_obs_per_state = 2;
};

LatentBlockMDP random_block_mdp(const RandomMdpOptions& opts, Rng& rng);

}  // namespace kinlab
