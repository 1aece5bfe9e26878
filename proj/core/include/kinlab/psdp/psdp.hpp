#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>
#include <optional>
#include <vector>

#include "kinlab/block_mdp/dynamics.hpp"
#include "kinlab/block_mdp/environment.hpp"
#include "kinlab/oracles/cb.hpp"

namespace kinlab {

// Psi_h: policies of length h-1 used as roll-in distributions for step h.
// An empty cover at h = 1 means "start from mu".
struct PolicyCover {
  int timestep = 1;
  std::vector<NonstationaryPolicy> policies;
  double claimed_alpha = 0.0;

  nlohmann::json to_json() const;
  static PolicyCover from_json(const nlohmann::json& j);
};

// External environment reward, or R(x, a, x') evaluated on observations.
struct PsdpReward {
  bool external = true;
  ObservationRewardFn fn;

  static PsdpReward environment() { return {}; }
  static PsdpReward observation(ObservationRewardFn f) { return {false, std::move(f)}; }

  // Sum of rewards of steps t..h of an episode (1-based).
  double tail_sum(const Episode& ep, int t, int h) const;
};

struct PsdpConfig {
  std::size_t n = 20000;
  PolicyClass policy_class = LinearClass{};
  std::uint64_t seed = 0;
};

struct PsdpLevelRecord {
  int t = 0;
  std::size_t dataset_size = 0;
  double cb_objective = 0.0;
  double mean_reward = 0.0;

  nlohmann::json to_json() const;
};

struct PsdpResult {
  NonstationaryPolicy policy;
  std::vector<PsdpLevelRecord> levels;  // in solve order, t = h..1
  std::uint64_t episodes = 0;
};

// covers[t-1] is Psi_t for t = 1..h.  Solves t = h, ..., 1: roll in with a
// uniformly chosen member of Psi_t, take a uniform action at t, roll out
// with the already learned pi_{t+1..h}, and fit pi_t by a contextual-bandit
// call on the cumulative reward of steps t..h.
PsdpResult psdp(const Environment& env, const std::vector<PolicyCover>& covers, const PsdpReward& reward, int h,
                const PsdpConfig& cfg);

// Draws the level-t dataset for a fixed continuation (exposed for tests).
std::vector<CBExample> psdp_dataset(const Environment& env, const PolicyCover& cover, const PsdpReward& reward, int t,
                                    int h, const NonstationaryPolicy& continuation, std::size_t n, std::uint64_t seed);

struct GpsConfig {
  double epsilon = 0.1;
  std::size_t mc_episodes = 2000;
  double delta = 0.05;
};

struct GpsResult {
  bool accepted = false;
  NonstationaryPolicy policy;  // best composition, accepted or not
  double value = 0.0;
  double half_width = 0.0;
  std::size_t best_prefix = 0;
  std::vector<double> prefix_values;
  std::uint64_t episodes = 0;
};

// Greedy composition: learn only pi_h on Unf(Psi_h) contexts (or on
// `reuse`, when given), append it to each cover member and keep the best by
// Monte Carlo.  Accepted iff the estimate is >= 1 - epsilon.
GpsResult gps_try(const Environment& env, const std::vector<PolicyCover>& covers, const PsdpReward& reward, int h,
                  const PsdpConfig& cfg, const GpsConfig& gps, const std::vector<CBExample>* reuse = nullptr);

// Monte-Carlo mean of the h-step reward of a policy.
double estimate_value(const Environment& env, const NonstationaryPolicy& policy, const PsdpReward& reward, int h,
                      std::size_t episodes, std::uint64_t seed);

struct TheorySizes {
  double n_psdp = 0.0;
  double n_reg = 0.0;
  double n_eval = 0.0;
  nlohmann::json to_json() const;
};

TheorySizes theory_sample_sizes(double N, double H, double num_actions, double eta, double epsilon, double delta,
                                double policy_class_size, double phi_class_size);

}  // namespace kinlab
