#pragma once

#include <Eigen/Dense>
#include <utility>
#include <variant>
#include <vector>

#include "kinlab/block_mdp/observation.hpp"
#include "kinlab/common/random.hpp"

namespace kinlab {

// Finite per-state observation distributions.  table[s] lists (id, prob).
struct DiscreteEmission {
  std::vector<std::vector<std::pair<ObsId, double>>> table;

  ObsId max_id() const;
};

// Combination-lock emission: the state slot and the timestep are one-hot
// encoded, Gaussian noise is added to those H+3 coordinates, the vector is
// zero padded to `dim` and multiplied by `rotation`.
struct RotatedGaussianEmission {
  int horizon = 0;
  int dim = 0;
  double noise_std = 0.0;
  std::vector<int> slot;  // per global state id, in [0, 3)
  Eigen::MatrixXd rotation;
};

using EmissionModel = std::variant<DiscreteEmission, RotatedGaussianEmission>;

// Samples an observation for latent state s (global id) at timestep h.
Observation emit(const EmissionModel& em, StateId s, int h, Rng& rng);

inline bool is_discrete(const EmissionModel& em) { return std::holds_alternative<DiscreteEmission>(em); }

}  // namespace kinlab
