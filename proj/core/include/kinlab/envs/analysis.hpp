#pragma once

#include <utility>
#include <vector>

#include "kinlab/block_mdp/mdp.hpp"

namespace kinlab {

using StatePartition = std::vector<std::vector<StateId>>;

// Greedy first-fit (in state-id order) partition of S_h whose blocks leave
// the Bayes posterior P(a | x, x') under uniform actions unchanged for every
// predecessor x.  Step 1 is returned as a single block.
StatePartition bayes_prev_action_collapse(const LatentBlockMDP& mdp, int h, double tol = 1e-12);

// Expected Hamming reconstruction loss of a one-bit code on noisy_bits that
// keeps the state bit versus one that keeps a noise bit:
// ((d-1)/2, (d-2)/2 + min(p, 1-p)).
std::pair<double, double> autoencoder_loss_compare(int bits, double state_prob);

struct AbstractReach {
  double best = 0.0;
  std::vector<std::vector<Action>> block_actions;  // per step, per block
  double policies_enumerated = 0;
};

// Best probability of reaching `targets` at their step with deterministic
// policies that act on blocks of `partitions[h-1]` (steps before the target
// step).  Enumerates all block-level policies; throws
// EnumerationBudgetExceeded past `budget`.
AbstractReach best_reach_under_abstraction(const LatentBlockMDP& mdp, const std::vector<StatePartition>& partitions,
                                           const std::vector<StateId>& targets, double budget = 1e6);

// Same target, policies acting on the latent state directly.
double best_reach_latent(const LatentBlockMDP& mdp, const std::vector<StateId>& targets);

}  // namespace kinlab
