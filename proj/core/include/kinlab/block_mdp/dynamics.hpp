#pragma once

#include <cstdint>
#include <functional>
#include <variant>
#include <vector>

#include "kinlab/block_mdp/mdp.hpp"
#include "kinlab/block_mdp/policy.hpp"

namespace kinlab {

// Probability of each global state under `policy` for steps 1..len+1, where
// len = min(policy.length(), H-1).  States beyond that carry 0.  Requires a
// latent-table policy or a discrete emission; otherwise throws
// UnsupportedOperation.
std::vector<double> exact_visitation(const LatentBlockMDP& mdp, const NonstationaryPolicy& policy);

// P(a | s) for a decider at state s, marginalizing the emission.
std::vector<double> state_action_distribution(const LatentBlockMDP& mdp, const StepDecider& d, StateId s);

// Propagates a distribution over the states of step h (local indices)
// through per-state action distributions.
std::vector<double> propagate(const LatentBlockMDP& mdp, int h, const std::vector<double>& dist,
                              const std::vector<std::vector<double>>& action_probs);

struct EtaResult {
  std::vector<double> eta;                    // per global state
  std::vector<NonstationaryPolicy> homing;    // latent policy of length step(s)-1
  double eta_min = 1.0;                       // over reachable states
  std::vector<bool> reachable;
};

EtaResult eta_exact(const LatentBlockMDP& mdp);

struct ExternalReward {};
// Reward of (s, a, next); next is kTerminalState on the last step.
using LatentRewardFn = std::function<double(StateId, Action, StateId)>;
// Reward of (x, a, x'); x' is empty on the last step.
using ObservationRewardFn = std::function<double(const Observation&, Action, const Observation&)>;
using RewardSpec = std::variant<ExternalReward, LatentRewardFn, ObservationRewardFn>;

struct ValueEstimate {
  double value = 0.0;
  bool exact = true;
  double half_width = 0.0;  // Hoeffding band at delta when !exact
  std::uint64_t episodes = 0;
};

struct MonteCarloOptions {
  std::uint64_t episodes = 20000;
  std::uint64_t seed = 0;
  double delta = 1e-3;
};

// Exact when the policy admits marginalization (latent tables, or discrete
// emissions); otherwise a Monte-Carlo estimate with its Hoeffding band.
ValueEstimate value_of(const LatentBlockMDP& mdp, const NonstationaryPolicy& policy, const RewardSpec& reward,
                       const MonteCarloOptions& mc = {});

}  // namespace kinlab
