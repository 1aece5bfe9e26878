#pragma once

#include <string>
#include <vector>

#include "kinlab/block_mdp/emission.hpp"
#include "kinlab/common/types.hpp"

namespace kinlab {

// Reward paid on a transition: `scale` times a Bernoulli(prob) draw.
// A constant reward is prob == 1.
struct RewardDescriptor {
  double scale = 0.0;
  double prob = 1.0;

  double mean() const { return scale * prob; }
  double max() const { return scale > 0.0 ? scale : 0.0; }
  double sample(Rng& rng) const;
  bool operator==(const RewardDescriptor&) const = default;
};

// Raw ingredients of a tabular Block MDP.  Global state ids are assigned
// step-major: the states of step 1 come first, then step 2, and so on.
//
//   transitions[s][a][j]  probability of the j-th state of step(s)+1
//   rewards[s][a][j]      reward descriptor for that transition; states of
//                         the last step carry a single entry (j = 0) for the
//                         terminal pseudo-transition
struct BlockMdpParts {
  int horizon = 0;
  int num_actions = 0;
  std::vector<int> states_per_step;
  std::vector<std::string> state_names;  // optional; defaults to s<id+1>
  std::vector<double> start;
  std::vector<std::vector<std::vector<double>>> transitions;
  std::vector<std::vector<std::vector<RewardDescriptor>>> rewards;
  EmissionModel emission;
};

class LatentBlockMDP {
 public:
  // Validates and takes ownership.  Throws ConfigurationError when rows do
  // not sum to one within 1e-12, shapes disagree, or discrete emission
  // supports overlap.  Missing reward tables default to zero rewards.
  explicit LatentBlockMDP(BlockMdpParts parts);

  int horizon() const { return parts_.horizon; }
  int num_actions() const { return parts_.num_actions; }
  int num_states() const { return static_cast<int>(step_of_.size()); }
  int num_states_at(int h) const { return parts_.states_per_step[h - 1]; }
  // Global id of the j-th state at step h (1-based step, 0-based j).
  StateId state_at(int h, int j) const { return offset_[h - 1] + j; }
  std::vector<StateId> states_at(int h) const;
  int step_of(StateId s) const { return step_of_[s]; }
  int local_index(StateId s) const { return s - offset_[step_of_[s] - 1]; }
  const std::string& name(StateId s) const { return parts_.state_names[s]; }

  const std::vector<double>& start() const { return parts_.start; }
  // Distribution over the states of step(s)+1 (local indices); empty at H.
  const std::vector<double>& transition(StateId s, Action a) const { return parts_.transitions[s][a]; }
  double transition(StateId s, Action a, StateId next) const;
  const RewardDescriptor& reward(StateId s, Action a, int next_local) const {
    return parts_.rewards[s][a][next_local];
  }
  // Expected immediate reward of taking a in s.
  double expected_reward(StateId s, Action a) const;

  const EmissionModel& emission() const { return parts_.emission; }
  const BlockMdpParts& parts() const { return parts_; }

 private:
  BlockMdpParts parts_;
  std::vector<int> offset_;
  std::vector<int> step_of_;
};

}  // namespace kinlab
