#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kinlab/block_mdp/mdp.hpp"

namespace kinlab {

// Diabolical combination lock.  Step 1 has the good states a and b; later
// steps add the absorbing bad state c.  Local indices are a = 0, b = 1, c = 2.
struct ComboLockSpec {
  int horizon = 0;
  int num_actions = 0;
  std::uint64_t seed = 0;
  std::vector<Action> u;  // good action at a, per step
  std::vector<Action> v;  // good action at b, per step
  double noise_variance = 0.1;
  int dim = 0;
  Eigen::MatrixXd rotation;

  nlohmann::json to_json() const;
};

struct ComboLockOptions {
  // Emit two private symbols per state instead of rotated Gaussian vectors.
  bool discrete_emission = false;
  // Force u_h == v_h at every step, making a and b kinematically inseparable.
  bool equal_good_actions = false;
};

// Unnormalized Sylvester construction; entries are +1/-1 and M^T M = n I.
Eigen::MatrixXd sylvester_hadamard(int n);
// FNV-1a 64 over the sign pattern (row-major), as 16 hex digits.
std::string hadamard_checksum(const Eigen::MatrixXd& m);
// 2^ceil(log2(H + 4)).
int combolock_dim(int horizon);

ComboLockSpec combolock_spec(int horizon, int num_actions, std::uint64_t seed, const ComboLockOptions& opts = {});
std::shared_ptr<const LatentBlockMDP> make_combolock(const ComboLockSpec& spec, const ComboLockOptions& opts = {});
std::shared_ptr<const LatentBlockMDP> make_combolock(int horizon, int num_actions, std::uint64_t seed,
                                                     const ComboLockOptions& opts = {});

}  // namespace kinlab
