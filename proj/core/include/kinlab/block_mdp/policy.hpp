#pragma once

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <memory>
#include <nlohmann/json.hpp>
#include <vector>

#include "kinlab/block_mdp/observation.hpp"
#include "kinlab/common/random.hpp"

namespace kinlab {

class LatentBlockMDP;

// One step of a nonstationary policy.
class StepDecider {
 public:
  virtual ~StepDecider() = default;
  virtual int num_actions() const = 0;
  virtual std::vector<double> distribution(const Observation& x) const = 0;
  // Deterministic deciders must not consume randomness.
  virtual Action act(const Observation& x, Rng& rng) const { return sample_index(distribution(x), rng); }
  // True when the decider reads the latent state instead of the observation.
  virtual bool latent_only() const { return false; }
  virtual nlohmann::json to_json() const = 0;
};

using DeciderPtr = std::shared_ptr<const StepDecider>;

// Acts on the hidden state; used by exact DP, homing policies and oracles.
class LatentTableDecider final : public StepDecider {
 public:
  LatentTableDecider(int num_actions, std::map<StateId, Action> table, Action fallback = 0)
      : num_actions_(num_actions), table_(std::move(table)), fallback_(fallback) {}
  int num_actions() const override { return num_actions_; }
  Action action_for(StateId s) const;
  std::vector<double> distribution(const Observation& x) const override;
  Action act(const Observation& x, Rng&) const override;
  bool latent_only() const override { return true; }
  nlohmann::json to_json() const override;

 private:
  int num_actions_;
  std::map<StateId, Action> table_;
  Action fallback_;
};

// Deterministic lookup from discrete observation ids.
class ObservationTableDecider final : public StepDecider {
 public:
  ObservationTableDecider(int num_actions, std::map<ObsId, Action> table, Action fallback = 0)
      : num_actions_(num_actions), table_(std::move(table)), fallback_(fallback) {}
  int num_actions() const override { return num_actions_; }
  Action action_for(ObsId id) const;
  std::vector<double> distribution(const Observation& x) const override;
  Action act(const Observation& x, Rng&) const override;
  nlohmann::json to_json() const override;
  const std::map<ObsId, Action>& table() const { return table_; }

 private:
  int num_actions_;
  std::map<ObsId, Action> table_;
  Action fallback_;
};

// argmax_a (W x + b)_a with lowest-index tie breaking.
class LinearArgmaxDecider final : public StepDecider {
 public:
  LinearArgmaxDecider(Eigen::MatrixXd W, Eigen::VectorXd b, ObservationFeatures features)
      : W_(std::move(W)), b_(std::move(b)), features_(features) {}
  int num_actions() const override { return static_cast<int>(W_.rows()); }
  Action greedy(const Observation& x) const;
  std::vector<double> distribution(const Observation& x) const override;
  Action act(const Observation& x, Rng&) const override { return greedy(x); }
  nlohmann::json to_json() const override;
  const Eigen::MatrixXd& weights() const { return W_; }
  const Eigen::VectorXd& bias() const { return b_; }
  const ObservationFeatures& features() const { return features_; }

 private:
  Eigen::MatrixXd W_;
  Eigen::VectorXd b_;
  ObservationFeatures features_;
};

class UniformDecider final : public StepDecider {
 public:
  explicit UniformDecider(int num_actions) : num_actions_(num_actions) {}
  int num_actions() const override { return num_actions_; }
  std::vector<double> distribution(const Observation&) const override;
  Action act(const Observation&, Rng& rng) const override { return uniform_int(rng, num_actions_); }
  nlohmann::json to_json() const override;

 private:
  int num_actions_;
};

// Deterministic decider from an arbitrary function; not serializable beyond
// its tag.
class FunctionDecider final : public StepDecider {
 public:
  FunctionDecider(int num_actions, std::function<Action(const Observation&)> fn)
      : num_actions_(num_actions), fn_(std::move(fn)) {}
  int num_actions() const override { return num_actions_; }
  std::vector<double> distribution(const Observation& x) const override;
  Action act(const Observation& x, Rng&) const override { return fn_(x); }
  nlohmann::json to_json() const override;

 private:
  int num_actions_;
  std::function<Action(const Observation&)> fn_;
};

DeciderPtr decider_from_json(const nlohmann::json& j);

// pi_1 .. pi_L.  A policy of length L < H is a prefix; it acts on steps 1..L.
class NonstationaryPolicy {
 public:
  NonstationaryPolicy() = default;
  explicit NonstationaryPolicy(std::vector<DeciderPtr> deciders) : deciders_(std::move(deciders)) {}

  int length() const { return static_cast<int>(deciders_.size()); }
  const StepDecider& at(int h) const { return *deciders_.at(h - 1); }
  const DeciderPtr& ptr(int h) const { return deciders_.at(h - 1); }
  const std::vector<DeciderPtr>& deciders() const { return deciders_; }

  Action act(const Observation& x, Rng& rng) const;

  NonstationaryPolicy prefix(int len) const;
  NonstationaryPolicy then(DeciderPtr d) const;
  NonstationaryPolicy then(const NonstationaryPolicy& tail) const;

  nlohmann::json to_json() const;
  static NonstationaryPolicy from_json(const nlohmann::json& j);

 private:
  std::vector<DeciderPtr> deciders_;
};

// Policy acting on hidden states, one table per step.
NonstationaryPolicy latent_policy(int num_actions, const std::vector<std::map<StateId, Action>>& tables);
NonstationaryPolicy uniform_policy(int num_actions, int length);

}  // namespace kinlab
