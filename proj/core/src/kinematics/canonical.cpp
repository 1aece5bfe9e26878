#include "kinlab/kinematics/canonical.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "kinlab/common/errors.hpp"

namespace kinlab {

namespace {

double inflow_of(const LatentBlockMDP& mdp, StateId s) {
  const int h = mdp.step_of(s);
  if (h == 1) return mdp.start()[mdp.local_index(s)];
  double c = 0.0;
  for (StateId x : mdp.states_at(h - 1))
    for (Action a = 0; a < mdp.num_actions(); ++a) c += mdp.transition(x, a)[mdp.local_index(s)];
  return c;
}

std::map<ObsId, double> emission_map(const DiscreteEmission& em, StateId s) {
  std::map<ObsId, double> m;
  for (const auto& [o, p] : em.table[s]) m[o] += p;
  return m;
}

bool maps_close(const std::map<ObsId, double>& a, const std::map<ObsId, double>& b, double tol) {
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() || ib != b.end()) {
    if (ia != a.end() && ia->second == 0.0) { ++ia; continue; }
    if (ib != b.end() && ib->second == 0.0) { ++ib; continue; }
    if (ia == a.end() || ib == b.end() || ia->first != ib->first || std::abs(ia->second - ib->second) > tol)
      return false;
    ++ia;
    ++ib;
  }
  return true;
}

}  // namespace

nlohmann::json CanonicalForm::to_json(const LatentBlockMDP& original) const {
  nlohmann::json m = nlohmann::json::array();
  for (StateId s = 0; s < original.num_states(); ++s)
    m.push_back({{"state", original.name(s)}, {"canonical", mdp->name(mapping[s])}, {"weight", mixing_weight[s]}});
  return {{"mapping", m}, {"num_states", mdp->num_states()}};
}

CanonicalForm canonicalize(const LatentBlockMDP& mdp, double tol) {
  const auto* em = std::get_if<DiscreteEmission>(&mdp.emission());
  if (!em) throw UnsupportedOperation("canonicalize needs a discrete emission");
  const int H = mdp.horizon();
  const int K = mdp.num_actions();
  CanonicalForm out;
  out.mapping.assign(static_cast<std::size_t>(mdp.num_states()), kNoState);
  out.mixing_weight.assign(static_cast<std::size_t>(mdp.num_states()), 0.0);

  std::vector<KIPartition> parts;
  StateId next_id = 0;
  for (int h = 1; h <= H; ++h) {
    parts.push_back(ki_partition(mdp, h, tol));
    for (const auto& block : parts.back().blocks) {
      double z = 0.0;
      for (StateId s : block) z += inflow_of(mdp, s);
      for (StateId s : block) {
        out.mapping[s] = next_id;
        out.mixing_weight[s] = z > 0.0 ? inflow_of(mdp, s) / z : 1.0 / static_cast<double>(block.size());
      }
      ++next_id;
    }
  }

  BlockMdpParts p;
  p.horizon = H;
  p.num_actions = K;
  DiscreteEmission cem;
  for (int h = 1; h <= H; ++h) {
    const auto& blocks = parts[h - 1].blocks;
    p.states_per_step.push_back(static_cast<int>(blocks.size()));
    for (const auto& block : blocks) {
      std::string name;
      for (StateId s : block) name += (name.empty() ? "" : "+") + mdp.name(s);
      p.state_names.push_back(name);

      std::map<ObsId, double> mix;
      for (StateId s : block)
        for (const auto& [o, q] : em->table[s]) mix[o] += out.mixing_weight[s] * q;
      cem.table.emplace_back(mix.begin(), mix.end());

      std::vector<std::vector<double>> T(static_cast<std::size_t>(K));
      std::vector<std::vector<RewardDescriptor>> R(static_cast<std::size_t>(K));
      for (Action a = 0; a < K; ++a) {
        if (h == H) {
          double mean = 0.0;
          bool same = true;
          for (StateId s : block) {
            mean += out.mixing_weight[s] * mdp.reward(s, a, 0).mean();
            same = same && mdp.reward(s, a, 0) == mdp.reward(block.front(), a, 0);
          }
          R[a] = {same ? mdp.reward(block.front(), a, 0) : RewardDescriptor{mean, 1.0}};
          continue;
        }
        const auto& next_blocks = parts[h].blocks;
        T[a].assign(next_blocks.size(), 0.0);
        R[a].assign(next_blocks.size(), RewardDescriptor{});
        for (std::size_t c = 0; c < next_blocks.size(); ++c) {
          double mass = 0.0;
          double reward_mass = 0.0;
          bool same = true;
          const RewardDescriptor* first = nullptr;
          for (StateId s : block)
            for (StateId ns : next_blocks[c]) {
              const double t = mdp.transition(s, a)[mdp.local_index(ns)];
              const auto& r = mdp.reward(s, a, mdp.local_index(ns));
              mass += out.mixing_weight[s] * t;
              reward_mass += out.mixing_weight[s] * t * r.mean();
              if (t > 0.0) {
                if (!first) first = &r;
                else same = same && r == *first;
              }
            }
          T[a][c] = mass;
          if (mass > 0.0) R[a][c] = (same && first) ? *first : RewardDescriptor{reward_mass / mass, 1.0};
        }
        double z = 0.0;
        for (double t : T[a]) z += t;
        for (double& t : T[a]) t /= z;
      }
      p.transitions.push_back(std::move(T));
      p.rewards.push_back(std::move(R));
    }
  }
  for (const auto& block : parts[0].blocks) {
    double m = 0.0;
    for (StateId s : block) m += mdp.start()[mdp.local_index(s)];
    p.start.push_back(m);
  }
  p.emission = std::move(cem);
  out.mdp = std::make_shared<const LatentBlockMDP>(std::move(p));
  return out;
}

std::optional<std::vector<StateId>> find_isomorphism(const LatentBlockMDP& a, const LatentBlockMDP& b, double tol) {
  if (a.horizon() != b.horizon() || a.num_actions() != b.num_actions()) return std::nullopt;
  for (int h = 1; h <= a.horizon(); ++h)
    if (a.num_states_at(h) != b.num_states_at(h)) return std::nullopt;
  const auto* ea = std::get_if<DiscreteEmission>(&a.emission());
  const auto* eb = std::get_if<DiscreteEmission>(&b.emission());
  if (!ea || !eb) throw UnsupportedOperation("isomorphism check needs discrete emissions");
  const int H = a.horizon();
  const int K = a.num_actions();
  std::vector<std::vector<int>> perm(static_cast<std::size_t>(H));  // local a -> local b

  auto state_ok = [&](int h, int i) {
    const StateId sa = a.state_at(h, i), sb = b.state_at(h, perm[h - 1][i]);
    if (!maps_close(emission_map(*ea, sa), emission_map(*eb, sb), tol)) return false;
    if (h == 1 && std::abs(a.start()[i] - b.start()[perm[0][i]]) > tol) return false;
    for (Action act = 0; act < K; ++act)
      if (std::abs(a.expected_reward(sa, act) - b.expected_reward(sb, act)) > tol) return false;
    return true;
  };
  auto edges_ok = [&](int h) {  // transitions from step h-1 into step h
    for (int i = 0; i < a.num_states_at(h - 1); ++i)
      for (Action act = 0; act < K; ++act) {
        const auto& ta = a.transition(a.state_at(h - 1, i), act);
        const auto& tb = b.transition(b.state_at(h - 1, perm[h - 2][i]), act);
        for (int j = 0; j < a.num_states_at(h); ++j)
          if (std::abs(ta[j] - tb[perm[h - 1][j]]) > tol) return false;
      }
    return true;
  };
  std::function<bool(int)> search = [&](int h) -> bool {
    if (h > H) return true;
    std::vector<int> p(static_cast<std::size_t>(a.num_states_at(h)));
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = static_cast<int>(i);
    do {
      perm[h - 1] = p;
      bool ok = true;
      for (int i = 0; ok && i < a.num_states_at(h); ++i) ok = state_ok(h, i);
      if (ok && h > 1) ok = edges_ok(h);
      if (ok && search(h + 1)) return true;
    } while (std::next_permutation(p.begin(), p.end()));
    return false;
  };
  if (!search(1)) return std::nullopt;
  std::vector<StateId> mapping;
  for (int h = 1; h <= H; ++h)
    for (int i = 0; i < a.num_states_at(h); ++i) mapping.push_back(b.state_at(h, perm[h - 1][i]));
  return mapping;
}

std::map<std::vector<ObsId>, double> observation_process(const LatentBlockMDP& mdp,
                                                         const std::vector<std::map<ObsId, Action>>& policy) {
  const auto* em = std::get_if<DiscreteEmission>(&mdp.emission());
  if (!em) throw UnsupportedOperation("observation process enumeration needs a discrete emission");
  std::map<std::vector<ObsId>, double> out;
  std::vector<ObsId> seq;
  // alpha[j]: joint probability of the observed prefix and latent s_{h,j}
  // before the emission at step h is accounted for.
  std::function<void(int, const std::vector<double>&)> recurse = [&](int h, const std::vector<double>& prior) {
    std::map<ObsId, std::vector<double>> by_obs;
    for (int j = 0; j < mdp.num_states_at(h); ++j) {
      if (prior[j] == 0.0) continue;
      for (const auto& [o, q] : em->table[mdp.state_at(h, j)]) {
        auto& v = by_obs[o];
        if (v.empty()) v.assign(prior.size(), 0.0);
        v[j] += prior[j] * q;
      }
    }
    for (auto& [o, joint] : by_obs) {
      seq.push_back(o);
      if (h == mdp.horizon()) {
        double p = 0.0;
        for (double v : joint) p += v;
        out[seq] += p;
      } else {
        const auto& table = policy.at(h - 1);
        auto it = table.find(o);
        const Action act = it == table.end() ? 0 : it->second;
        std::vector<double> next(static_cast<std::size_t>(mdp.num_states_at(h + 1)), 0.0);
        for (int j = 0; j < mdp.num_states_at(h); ++j) {
          if (joint[j] == 0.0) continue;
          const auto& t = mdp.transition(mdp.state_at(h, j), act);
          for (std::size_t k = 0; k < t.size(); ++k) next[k] += joint[j] * t[k];
        }
        recurse(h + 1, next);
      }
      seq.pop_back();
    }
  };
  recurse(1, mdp.start());
  return out;
}

std::vector<std::vector<std::map<ObsId, Action>>> enumerate_observation_policies(const LatentBlockMDP& mdp,
                                                                                 double budget) {
  const auto* em = std::get_if<DiscreteEmission>(&mdp.emission());
  if (!em) throw UnsupportedOperation("observation policy enumeration needs a discrete emission");
  std::vector<std::vector<ObsId>> obs(static_cast<std::size_t>(mdp.horizon()));
  double count = 1.0;
  for (int h = 1; h < mdp.horizon(); ++h) {
    for (StateId s : mdp.states_at(h))
      for (const auto& [o, q] : em->table[s]) obs[h - 1].push_back(o);
    std::sort(obs[h - 1].begin(), obs[h - 1].end());
    obs[h - 1].erase(std::unique(obs[h - 1].begin(), obs[h - 1].end()), obs[h - 1].end());
    count *= std::pow(static_cast<double>(mdp.num_actions()), static_cast<double>(obs[h - 1].size()));
  }
  if (count > budget) throw EnumerationBudgetExceeded("observation policy enumeration", count, budget);
  std::vector<std::vector<std::map<ObsId, Action>>> out;
  std::vector<std::map<ObsId, Action>> cur(static_cast<std::size_t>(mdp.horizon()));
  std::function<void(int, std::size_t)> rec = [&](int h, std::size_t k) {
    if (h >= mdp.horizon()) {
      out.push_back(cur);
      return;
    }
    if (k == obs[h - 1].size()) {
      rec(h + 1, 0);
      return;
    }
    for (Action a = 0; a < mdp.num_actions(); ++a) {
      cur[h - 1][obs[h - 1][k]] = a;
      rec(h, k + 1);
    }
  };
  rec(1, 0);
  return out;
}

}  // namespace kinlab
