#include "kinlab/block_mdp/dynamics.hpp"

#include <algorithm>

#include "kinlab/block_mdp/latent_access.hpp"
#include "kinlab/common/errors.hpp"
#include "kinlab/common/parallel.hpp"
#include "kinlab/common/stats.hpp"

namespace kinlab {

namespace {

bool marginalizable(const LatentBlockMDP& mdp, const NonstationaryPolicy& policy, int len) {
  if (is_discrete(mdp.emission())) return true;
  for (int h = 1; h <= len; ++h) {
    const StepDecider& d = policy.at(h);
    if (!d.latent_only() && !dynamic_cast<const UniformDecider*>(&d)) return false;
  }
  return true;
}

// Per-step, per-local-state action distributions for steps 1..len.
std::vector<std::vector<std::vector<double>>> action_tables(const LatentBlockMDP& mdp,
                                                            const NonstationaryPolicy& policy, int len) {
  std::vector<std::vector<std::vector<double>>> out(static_cast<std::size_t>(len));
  for (int h = 1; h <= len; ++h)
    for (StateId s : mdp.states_at(h)) out[h - 1].push_back(state_action_distribution(mdp, policy.at(h), s));
  return out;
}

double sampled_return(const LatentBlockMDP& mdp, const NonstationaryPolicy& policy, int len, const RewardSpec& reward,
                      Rng& rng) {
  StateId s = mdp.state_at(1, sample_index(mdp.start(), rng));
  Observation x = emit(mdp.emission(), s, 1, rng);
  double total = 0.0;
  for (int h = 1; h <= len; ++h) {
    const Action a = policy.act(x, rng);
    StateId next = kTerminalState;
    int j = 0;
    Observation nx;
    if (h < mdp.horizon()) {
      j = sample_index(mdp.transition(s, a), rng);
      next = mdp.state_at(h + 1, j);
      nx = emit(mdp.emission(), next, h + 1, rng);
    }
    if (std::holds_alternative<ExternalReward>(reward)) {
      total += mdp.reward(s, a, j).sample(rng);
    } else if (const auto* f = std::get_if<LatentRewardFn>(&reward)) {
      total += (*f)(s, a, next);
    } else {
      total += std::get<ObservationRewardFn>(reward)(x, a, nx);
    }
    s = next;
    x = std::move(nx);
  }
  return total;
}

}  // namespace

std::vector<double> state_action_distribution(const LatentBlockMDP& mdp, const StepDecider& d, StateId s) {
  const int h = mdp.step_of(s);
  if (d.latent_only() || dynamic_cast<const UniformDecider*>(&d))
    return d.distribution(LatentAccess::make(h, std::monostate{}, s));
  const auto* em = std::get_if<DiscreteEmission>(&mdp.emission());
  if (!em) throw UnsupportedOperation("exact marginalization needs a latent policy or a discrete emission");
  std::vector<double> out(static_cast<std::size_t>(mdp.num_actions()), 0.0);
  for (const auto& [o, q] : em->table[s]) {
    auto p = d.distribution(LatentAccess::make(h, o, s));
    for (std::size_t a = 0; a < out.size(); ++a) out[a] += q * p[a];
  }
  return out;
}

std::vector<double> propagate(const LatentBlockMDP& mdp, int h, const std::vector<double>& dist,
                              const std::vector<std::vector<double>>& action_probs) {
  std::vector<double> next(static_cast<std::size_t>(mdp.num_states_at(h + 1)), 0.0);
  for (int i = 0; i < mdp.num_states_at(h); ++i) {
    if (dist[i] == 0.0) continue;
    const StateId s = mdp.state_at(h, i);
    for (int a = 0; a < mdp.num_actions(); ++a) {
      const double w = dist[i] * action_probs[i][a];
      if (w == 0.0) continue;
      const auto& t = mdp.transition(s, a);
      for (std::size_t j = 0; j < t.size(); ++j) next[j] += w * t[j];
    }
  }
  return next;
}

std::vector<double> exact_visitation(const LatentBlockMDP& mdp, const NonstationaryPolicy& policy) {
  const int len = std::min(policy.length(), mdp.horizon() - 1);
  if (!marginalizable(mdp, policy, len))
    throw UnsupportedOperation("exact visitation unavailable for observation policies on procedural emissions");
  const auto tables = action_tables(mdp, policy, len);
  std::vector<double> out(static_cast<std::size_t>(mdp.num_states()), 0.0);
  std::vector<double> dist = mdp.start();
  for (int h = 1;; ++h) {
    for (int i = 0; i < mdp.num_states_at(h); ++i) out[mdp.state_at(h, i)] = dist[i];
    if (h > len) break;
    dist = propagate(mdp, h, dist, tables[h - 1]);
  }
  return out;
}

EtaResult eta_exact(const LatentBlockMDP& mdp) {
  const int H = mdp.horizon();
  const int K = mdp.num_actions();
  EtaResult res;
  res.eta.assign(static_cast<std::size_t>(mdp.num_states()), 0.0);
  res.homing.resize(static_cast<std::size_t>(mdp.num_states()));
  res.reachable.assign(static_cast<std::size_t>(mdp.num_states()), false);
  for (StateId target = 0; target < mdp.num_states(); ++target) {
    const int ht = mdp.step_of(target);
    std::vector<double> V(static_cast<std::size_t>(mdp.num_states_at(ht)), 0.0);
    V[mdp.local_index(target)] = 1.0;
    std::vector<std::map<StateId, Action>> tables(static_cast<std::size_t>(ht - 1));
    for (int h = ht - 1; h >= 1; --h) {
      std::vector<double> W(static_cast<std::size_t>(mdp.num_states_at(h)), 0.0);
      for (int i = 0; i < mdp.num_states_at(h); ++i) {
        const StateId s = mdp.state_at(h, i);
        double best = -1.0;
        Action best_a = 0;
        for (Action a = 0; a < K; ++a) {
          const auto& t = mdp.transition(s, a);
          double v = 0.0;
          for (std::size_t j = 0; j < t.size(); ++j) v += t[j] * V[j];
          if (v > best) {
            best = v;
            best_a = a;
          }
        }
        W[i] = best;
        tables[h - 1][s] = best_a;
      }
      V = std::move(W);
    }
    double eta = 0.0;
    if (ht == 1) {
      eta = mdp.start()[mdp.local_index(target)];
    } else {
      for (int i = 0; i < mdp.num_states_at(1); ++i) eta += mdp.start()[i] * V[i];
    }
    res.eta[target] = eta;
    res.reachable[target] = eta > 0.0;
    res.homing[target] = latent_policy(K, tables);
  }
  (void)H;
  res.eta_min = 1.0;
  for (StateId s = 0; s < mdp.num_states(); ++s)
    if (res.reachable[s]) res.eta_min = std::min(res.eta_min, res.eta[s]);
  return res;
}

ValueEstimate value_of(const LatentBlockMDP& mdp, const NonstationaryPolicy& policy, const RewardSpec& reward,
                       const MonteCarloOptions& mc) {
  const int len = std::min(policy.length(), mdp.horizon());
  const bool obs_reward = std::holds_alternative<ObservationRewardFn>(reward);
  const bool exact = marginalizable(mdp, policy, len) && (!obs_reward || is_discrete(mdp.emission()));
  if (!exact) {
    std::vector<double> returns(static_cast<std::size_t>(mc.episodes), 0.0);
    parallel_for(returns.size(), [&](std::size_t i) {
      Rng rng = make_rng(mc.seed, {0x76616cULL, i});
      returns[i] = sampled_return(mdp, policy, len, reward, rng);
    });
    ValueEstimate est;
    double s = 0.0;
    for (double r : returns) s += r;
    est.value = returns.empty() ? 0.0 : s / static_cast<double>(returns.size());
    est.exact = false;
    est.episodes = mc.episodes;
    est.half_width = hoeffding_half_width(static_cast<double>(mc.episodes), mc.delta);
    return est;
  }

  const auto tables = action_tables(mdp, policy, len);
  std::vector<double> dist = mdp.start();
  double value = 0.0;
  for (int h = 1; h <= len; ++h) {
    for (int i = 0; i < mdp.num_states_at(h); ++i) {
      if (dist[i] == 0.0) continue;
      const StateId s = mdp.state_at(h, i);
      if (std::holds_alternative<ExternalReward>(reward)) {
        for (Action a = 0; a < mdp.num_actions(); ++a)
          value += dist[i] * tables[h - 1][i][a] * mdp.expected_reward(s, a);
      } else if (const auto* f = std::get_if<LatentRewardFn>(&reward)) {
        for (Action a = 0; a < mdp.num_actions(); ++a) {
          const double w = dist[i] * tables[h - 1][i][a];
          if (w == 0.0) continue;
          if (h == mdp.horizon()) {
            value += w * (*f)(s, a, kTerminalState);
          } else {
            const auto& t = mdp.transition(s, a);
            for (std::size_t j = 0; j < t.size(); ++j)
              if (t[j] > 0.0) value += w * t[j] * (*f)(s, a, mdp.state_at(h + 1, static_cast<int>(j)));
          }
        }
      } else {
        const auto& fn = std::get<ObservationRewardFn>(reward);
        const auto& em = std::get<DiscreteEmission>(mdp.emission());
        const StepDecider& d = policy.at(h);
        for (const auto& [o, q] : em.table[s]) {
          const Observation x = LatentAccess::make(h, o, s);
          const auto probs = d.distribution(x);
          for (Action a = 0; a < mdp.num_actions(); ++a) {
            const double w = dist[i] * q * probs[a];
            if (w == 0.0) continue;
            if (h == mdp.horizon()) {
              value += w * fn(x, a, Observation());
              continue;
            }
            const auto& t = mdp.transition(s, a);
            for (std::size_t j = 0; j < t.size(); ++j) {
              if (t[j] == 0.0) continue;
              const StateId ns = mdp.state_at(h + 1, static_cast<int>(j));
              for (const auto& [o2, q2] : em.table[ns])
                value += w * t[j] * q2 * fn(x, a, LatentAccess::make(h + 1, o2, ns));
            }
          }
        }
      }
    }
    if (h < len) dist = propagate(mdp, h, dist, tables[h - 1]);
  }
  return ValueEstimate{value, true, 0.0, 0};
}

}  // namespace kinlab
