#include "kinlab/envs/random_mdp.hpp"

#include <algorithm>
#include <cmath>

namespace kinlab {

namespace {

struct Member {
  int base;
  double share;
  int row_owner;  // index (within the step) whose outgoing rows this state reuses
};

}  // namespace

LatentBlockMDP random_block_mdp(const RandomMdpOptions& o, Rng& rng) {
  const int H = o.min_horizon + uniform_int(rng, o.max_horizon - o.min_horizon + 1);
  const int K = o.min_actions + uniform_int(rng, o.max_actions - o.min_actions + 1);
  std::vector<std::vector<Member>> members(static_cast<std::size_t>(H));
  std::vector<int> bases(static_cast<std::size_t>(H));
  for (int h = 0; h < H; ++h) {
    bases[h] = 1 + uniform_int(rng, o.max_states);
    std::vector<int> sizes(static_cast<std::size_t>(bases[h]), 1);
    int total = bases[h];
    while (total < o.max_states && uniform01(rng) < o.split_prob) {
      ++sizes[uniform_int(rng, bases[h])];
      ++total;
    }
    for (int b = 0; b < bases[h]; ++b) {
      std::vector<double> w(static_cast<std::size_t>(sizes[b]));
      double z = 0.0;
      for (double& x : w) z += (x = 0.1 + uniform01(rng));
      const int owner = static_cast<int>(members[h].size());
      for (int m = 0; m < sizes[b]; ++m) {
        const int idx = static_cast<int>(members[h].size());
        const bool copy = m > 0 && uniform01(rng) < o.forward_copy_prob;
        members[h].push_back({b, w[m] / z, copy ? owner : idx});
      }
    }
  }
  auto random_row = [&](int n) {
    std::vector<double> r(static_cast<std::size_t>(n), 0.0);
    double z = 0.0;
    for (double& x : r)
      if (uniform01(rng) >= o.zero_prob) z += (x = uniform01(rng) + 1e-3);
    if (z == 0.0) {
      r[uniform_int(rng, n)] = 1.0;
      z = 1.0;
    }
    for (double& x : r) x /= z;
    return r;
  };
  auto expand = [&](const std::vector<double>& base_row, int h) {
    std::vector<double> r;
    for (const auto& m : members[h]) r.push_back(base_row[m.base] * m.share);
    double z = 0.0;
    for (double x : r) z += x;
    for (double& x : r) x /= z;
    return r;
  };

  BlockMdpParts p;
  p.horizon = H;
  p.num_actions = K;
  for (int h = 0; h < H; ++h) p.states_per_step.push_back(static_cast<int>(members[h].size()));
  p.start = expand(random_row(bases[0]), 0);
  DiscreteEmission em;
  ObsId next_obs = 0;
  for (int h = 0; h < H; ++h) {
    std::vector<std::vector<std::vector<double>>> rows;
    for (std::size_t i = 0; i < members[h].size(); ++i) {
      std::vector<std::vector<double>> T(static_cast<std::size_t>(K));
      std::vector<std::vector<RewardDescriptor>> R(static_cast<std::size_t>(K));
      const int owner = members[h][i].row_owner;
      for (Action a = 0; a < K; ++a) {
        if (h + 1 < H) {
          T[a] = owner == static_cast<int>(i) ? expand(random_row(bases[h + 1]), h + 1) : rows[owner][a];
          R[a].assign(members[h + 1].size(), RewardDescriptor{});
        } else {
          R[a] = {RewardDescriptor{std::round(uniform01(rng) * 100.0) / 100.0, 1.0}};
        }
      }
      rows.push_back(T);
      p.transitions.push_back(std::move(T));
      p.rewards.push_back(std::move(R));
      const int nobs = 1 + uniform_int(rng, o.max_obs_per_state);
      std::vector<std::pair<ObsId, double>> e;
      for (int k = 0; k < nobs; ++k) e.emplace_back(next_obs++, 1.0 / nobs);
      em.table.push_back(std::move(e));
    }
  }
  p.emission = std::move(em);
  return LatentBlockMDP(std::move(p));
}

}  // namespace kinlab
