#pragma once

#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "kinlab/kinematics/partition.hpp"

namespace kinlab {

struct CanonicalForm {
  std::shared_ptr<const LatentBlockMDP> mdp;
  std::vector<StateId> mapping;         // original id -> canonical id
  std::vector<double> mixing_weight;    // original id -> weight inside its block
  nlohmann::json to_json(const LatentBlockMDP& original) const;
};

// Merges every kinematically inseparable block.  Members are weighted by
// their share of the block's inflow (start mass on step 1), which is policy
// independent inside a backward block.  Requires a discrete emission.
CanonicalForm canonicalize(const LatentBlockMDP& mdp, double tol = kDefaultKITolerance);

// Step-preserving bijection a -> b under which start distribution,
// transitions, expected rewards and emissions agree within tol.
std::optional<std::vector<StateId>> find_isomorphism(const LatentBlockMDP& a, const LatentBlockMDP& b,
                                                     double tol = 1e-12);

// Distribution over observation sequences (x_1..x_H) under a deterministic
// observation policy given as one table per step.  Discrete emissions only.
std::map<std::vector<ObsId>, double> observation_process(const LatentBlockMDP& mdp,
                                                         const std::vector<std::map<ObsId, Action>>& policy);

// Every deterministic observation-level policy of the MDP (per-step tables),
// refusing past `budget`.
std::vector<std::vector<std::map<ObsId, Action>>> enumerate_observation_policies(const LatentBlockMDP& mdp,
                                                                                 double budget = 1e5);

}  // namespace kinlab
