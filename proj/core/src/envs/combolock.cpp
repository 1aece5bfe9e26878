#include "kinlab/envs/combolock.hpp"

#include <cmath>
#include <cstdio>

#include "kinlab/common/errors.hpp"
#include "kinlab/common/random.hpp"

namespace kinlab {

Eigen::MatrixXd sylvester_hadamard(int n) {
  if (n < 1 || (n & (n - 1)) != 0) throw ConfigurationError("Hadamard order must be a power of two");
  Eigen::MatrixXd m = Eigen::MatrixXd::Ones(1, 1);
  while (m.rows() < n) {
    const Eigen::Index k = m.rows();
    Eigen::MatrixXd next(2 * k, 2 * k);
    next << m, m, m, -m;
    m = std::move(next);
  }
  return m;
}

std::string hadamard_checksum(const Eigen::MatrixXd& m) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      h ^= m(r, c) > 0 ? 1u : 0u;
      h *= 0x100000001b3ULL;
    }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

int combolock_dim(int horizon) {
  int d = 1;
  while (d < horizon + 4) d <<= 1;
  return d;
}

nlohmann::json ComboLockSpec::to_json() const {
  return {{"horizon", horizon}, {"num_actions", num_actions}, {"seed", seed},
          {"u", u}, {"v", v}, {"noise_variance", noise_variance}, {"dim", dim},
          {"hadamard_checksum", hadamard_checksum(rotation)}};
}

ComboLockSpec combolock_spec(int horizon, int num_actions, std::uint64_t seed, const ComboLockOptions& opts) {
  if (horizon < 1) throw ConfigurationError("combination lock needs H >= 1");
  if (num_actions < 2) throw ConfigurationError("combination lock needs K >= 2");
  ComboLockSpec spec;
  spec.horizon = horizon;
  spec.num_actions = num_actions;
  spec.seed = seed;
  Rng rng = make_rng(seed, {0x636f6d626fULL});
  for (int h = 0; h < horizon; ++h) {
    spec.u.push_back(uniform_int(rng, num_actions));
    spec.v.push_back(opts.equal_good_actions ? spec.u.back() : uniform_int(rng, num_actions));
  }
  spec.dim = combolock_dim(horizon);
  spec.rotation = sylvester_hadamard(spec.dim);
  return spec;
}

std::shared_ptr<const LatentBlockMDP> make_combolock(const ComboLockSpec& spec, const ComboLockOptions& opts) {
  const int H = spec.horizon;
  const int K = spec.num_actions;
  BlockMdpParts p;
  p.horizon = H;
  p.num_actions = K;
  for (int h = 1; h <= H; ++h) {
    p.states_per_step.push_back(h == 1 ? 2 : 3);
    for (int j = 0; j < p.states_per_step.back(); ++j)
      p.state_names.push_back("s" + std::to_string(h) + "," + std::string(1, static_cast<char>('a' + j)));
  }
  p.start = {0.5, 0.5};
  const RewardDescriptor anti_shaped{0.1, 0.5};
  std::vector<int> slot;
  for (int h = 1; h <= H; ++h) {
    const int n = p.states_per_step[h - 1];
    for (int j = 0; j < n; ++j) {
      slot.push_back(j);
      std::vector<std::vector<double>> T(K);
      std::vector<std::vector<RewardDescriptor>> R(K);
      for (Action a = 0; a < K; ++a) {
        const bool good_move = (j == 0 && a == spec.u[h - 1]) || (j == 1 && a == spec.v[h - 1]);
        if (h == H) {
          R[a] = {RewardDescriptor{good_move ? 1.0 : 0.0, 1.0}};
          continue;
        }
        T[a] = good_move ? std::vector<double>{0.5, 0.5, 0.0} : std::vector<double>{0.0, 0.0, 1.0};
        R[a].assign(3, RewardDescriptor{});
        if (j < 2 && !good_move) R[a][2] = anti_shaped;
      }
      p.transitions.push_back(std::move(T));
      p.rewards.push_back(std::move(R));
    }
  }
  if (opts.discrete_emission) {
    DiscreteEmission em;
    for (std::size_t s = 0; s < slot.size(); ++s)
      em.table.push_back({{static_cast<ObsId>(2 * s), 0.5}, {static_cast<ObsId>(2 * s + 1), 0.5}});
    p.emission = std::move(em);
  } else {
    RotatedGaussianEmission em;
    em.horizon = H;
    em.dim = spec.dim;
    em.noise_std = std::sqrt(spec.noise_variance);
    em.slot = std::move(slot);
    em.rotation = spec.rotation;
    p.emission = std::move(em);
  }
  return std::make_shared<const LatentBlockMDP>(std::move(p));
}

std::shared_ptr<const LatentBlockMDP> make_combolock(int horizon, int num_actions, std::uint64_t seed,
                                                     const ComboLockOptions& opts) {
  return make_combolock(combolock_spec(horizon, num_actions, seed, opts), opts);
}

}  // namespace kinlab
