#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <nlohmann/json.hpp>
#include <vector>

#include "kinlab/block_mdp/mdp.hpp"
#include "kinlab/block_mdp/policy.hpp"

namespace kinlab {

// Learner-facing record of one rollout.  observations holds x_1..x_{k+1} for
// a rollout of k < H steps and x_1..x_H when k == H.
struct Episode {
  std::vector<Observation> observations;
  std::vector<Action> actions;
  std::vector<double> rewards;

  double total_reward() const;
};

// Diagnostic record that also exposes the latent path.
struct TrajectoryStep {
  StateId latent = kNoState;
  Observation observation;
  Action action = 0;
  double reward = 0.0;
};

struct TrajectoryLog {
  std::vector<TrajectoryStep> steps;
  std::uint64_t seed = 0;

  double total_reward() const;
  nlohmann::json to_json() const;
};

// Episodic access to a Block MDP.  Implementations must be safe to call
// concurrently from several threads.
class Environment {
 public:
  virtual ~Environment() = default;
  virtual int horizon() const = 0;
  virtual int num_actions() const = 0;
  // Executes `steps` actions with `policy` (whose length must be >= steps).
  virtual Episode run(const NonstationaryPolicy& policy, int steps, Rng& rng) const = 0;
  std::uint64_t episodes_used() const { return episodes_.load(); }
  void reset_episode_count() { episodes_.store(0); }

 protected:
  void count_episode() const { episodes_.fetch_add(1, std::memory_order_relaxed); }

 private:
  mutable std::atomic<std::uint64_t> episodes_{0};
};

class BlockMdpEnvironment final : public Environment {
 public:
  explicit BlockMdpEnvironment(std::shared_ptr<const LatentBlockMDP> mdp) : mdp_(std::move(mdp)) {}
  int horizon() const override { return mdp_->horizon(); }
  int num_actions() const override { return mdp_->num_actions(); }
  Episode run(const NonstationaryPolicy& policy, int steps, Rng& rng) const override;
  const LatentBlockMDP& mdp() const { return *mdp_; }
  std::shared_ptr<const LatentBlockMDP> mdp_ptr() const { return mdp_; }

 private:
  std::shared_ptr<const LatentBlockMDP> mdp_;
};

// Full H-step rollout with latent states recorded.  Throws
// ConfigurationError when the policy is shorter than H or a latent-only
// decider is paired with an emission it cannot read.
TrajectoryLog sample_trajectory(const LatentBlockMDP& mdp, const NonstationaryPolicy& policy, Rng& rng);

}  // namespace kinlab
