#include "kinlab/envs/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "kinlab/block_mdp/dynamics.hpp"
#include "kinlab/common/errors.hpp"

namespace kinlab {

StatePartition bayes_prev_action_collapse(const LatentBlockMDP& mdp, int h, double tol) {
  if (h < 1 || h > mdp.horizon()) throw ConfigurationError("timestep out of range");
  if (h == 1) return {mdp.states_at(1)};
  const int K = mdp.num_actions();
  const auto prev = mdp.states_at(h - 1);
  // posterior[x][j]: normalized P(a | x, s_j) or empty when s_j is not
  // reachable from x.
  std::vector<std::vector<std::vector<double>>> posterior(prev.size());
  for (std::size_t xi = 0; xi < prev.size(); ++xi) {
    posterior[xi].resize(static_cast<std::size_t>(mdp.num_states_at(h)));
    for (int j = 0; j < mdp.num_states_at(h); ++j) {
      std::vector<double> p(static_cast<std::size_t>(K));
      double z = 0.0;
      for (Action a = 0; a < K; ++a) z += (p[a] = mdp.transition(prev[xi], a)[j]);
      if (z <= 0.0) continue;
      for (double& v : p) v /= z;
      posterior[xi][j] = std::move(p);
    }
  }
  auto compatible = [&](int j, int k) {
    for (const auto& row : posterior) {
      if (row[j].empty() || row[k].empty()) continue;
      for (int a = 0; a < K; ++a)
        if (std::abs(row[j][a] - row[k][a]) > tol) return false;
    }
    return true;
  };
  std::vector<std::vector<int>> blocks;
  for (int j = 0; j < mdp.num_states_at(h); ++j) {
    bool placed = false;
    for (auto& b : blocks) {
      if (std::all_of(b.begin(), b.end(), [&](int k) { return compatible(j, k); })) {
        b.push_back(j);
        placed = true;
        break;
      }
    }
    if (!placed) blocks.push_back({j});
  }
  StatePartition out;
  for (const auto& b : blocks) {
    std::vector<StateId> ids;
    for (int j : b) ids.push_back(mdp.state_at(h, j));
    out.push_back(std::move(ids));
  }
  return out;
}

std::pair<double, double> autoencoder_loss_compare(int bits, double p) {
  if (bits < 2) throw ConfigurationError("autoencoder comparison needs d >= 2");
  if (p < 0.0 || p > 1.0) throw ConfigurationError("state probability outside [0,1]");
  const double keep_state = (bits - 1) / 2.0;
  const double keep_noise = (bits - 2) / 2.0 + std::min(p, 1.0 - p);
  return {keep_state, keep_noise};
}

double best_reach_latent(const LatentBlockMDP& mdp, const std::vector<StateId>& targets) {
  if (targets.empty()) return 0.0;
  const int ht = mdp.step_of(targets.front());
  std::vector<double> V(static_cast<std::size_t>(mdp.num_states_at(ht)), 0.0);
  for (StateId t : targets) V[mdp.local_index(t)] = 1.0;
  for (int h = ht - 1; h >= 1; --h) {
    std::vector<double> W(static_cast<std::size_t>(mdp.num_states_at(h)), 0.0);
    for (int i = 0; i < mdp.num_states_at(h); ++i)
      for (Action a = 0; a < mdp.num_actions(); ++a) {
        const auto& t = mdp.transition(mdp.state_at(h, i), a);
        double v = 0.0;
        for (std::size_t j = 0; j < t.size(); ++j) v += t[j] * V[j];
        W[i] = std::max(W[i], v);
      }
    V = std::move(W);
  }
  double r = 0.0;
  for (int i = 0; i < mdp.num_states_at(1); ++i) r += mdp.start()[i] * V[i];
  return r;
}

AbstractReach best_reach_under_abstraction(const LatentBlockMDP& mdp, const std::vector<StatePartition>& partitions,
                                           const std::vector<StateId>& targets, double budget) {
  AbstractReach out;
  if (targets.empty()) return out;
  const int ht = mdp.step_of(targets.front());
  const int K = mdp.num_actions();
  std::vector<std::vector<int>> block_of(static_cast<std::size_t>(ht));
  std::vector<int> radix;
  for (int h = 1; h < ht; ++h) {
    block_of[h - 1].assign(static_cast<std::size_t>(mdp.num_states_at(h)), -1);
    const auto& part = partitions.at(h - 1);
    for (std::size_t b = 0; b < part.size(); ++b)
      for (StateId s : part[b]) block_of[h - 1][mdp.local_index(s)] = static_cast<int>(b);
    for (int i = 0; i < mdp.num_states_at(h); ++i)
      if (block_of[h - 1][i] < 0) throw ConfigurationError("partition does not cover step " + std::to_string(h));
    radix.push_back(static_cast<int>(part.size()));
  }
  double count = 1.0;
  for (int r : radix) count *= std::pow(static_cast<double>(K), r);
  if (count > budget) throw EnumerationBudgetExceeded("abstract policy enumeration", count, budget);

  std::vector<std::vector<Action>> choice;
  for (int r : radix) choice.emplace_back(static_cast<std::size_t>(r), 0);
  out.best = -1.0;
  for (;;) {
    std::vector<double> dist = mdp.start();
    for (int h = 1; h < ht; ++h) {
      std::vector<std::vector<double>> probs;
      for (int i = 0; i < mdp.num_states_at(h); ++i) {
        std::vector<double> p(static_cast<std::size_t>(K), 0.0);
        p[choice[h - 1][block_of[h - 1][i]]] = 1.0;
        probs.push_back(std::move(p));
      }
      dist = propagate(mdp, h, dist, probs);
    }
    double reach = 0.0;
    for (StateId t : targets) reach += dist[mdp.local_index(t)];
    out.policies_enumerated += 1;
    if (reach > out.best) {
      out.best = reach;
      out.block_actions = choice;
    }
    // Mixed-radix increment.
    std::size_t step = 0;
    for (; step < choice.size(); ++step) {
      std::size_t b = 0;
      for (; b < choice[step].size(); ++b) {
        if (++choice[step][b] < K) break;
        choice[step][b] = 0;
      }
      if (b < choice[step].size()) break;
    }
    if (step == choice.size()) break;
  }
  return out;
}

}  // namespace kinlab
