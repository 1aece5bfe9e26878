#include "kinlab/block_mdp/mdp.hpp"

#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include "kinlab/common/errors.hpp"

namespace kinlab {

namespace {

constexpr double kSumTol = 1e-12;

void check_distribution(const std::vector<double>& p, std::size_t size, const std::string& what) {
  if (p.size() != size)
    throw ConfigurationError(what + ": expected " + std::to_string(size) + " entries, got " +
                             std::to_string(p.size()));
  double s = 0.0;
  for (double v : p) {
    if (!(v >= 0.0)) throw ConfigurationError(what + ": negative or NaN probability");
    s += v;
  }
  if (std::abs(s - 1.0) > kSumTol) throw ConfigurationError(what + ": sums to " + std::to_string(s));
}

}  // namespace

double RewardDescriptor::sample(Rng& rng) const {
  if (scale == 0.0) return 0.0;
  if (prob >= 1.0) return scale;
  return uniform01(rng) < prob ? scale : 0.0;
}

LatentBlockMDP::LatentBlockMDP(BlockMdpParts parts) : parts_(std::move(parts)) {
  auto& P = parts_;
  if (P.horizon < 1) throw ConfigurationError("horizon must be >= 1");
  if (P.num_actions < 1) throw ConfigurationError("num_actions must be >= 1");
  if (static_cast<int>(P.states_per_step.size()) != P.horizon)
    throw ConfigurationError("states_per_step must have one entry per step");
  int total = 0;
  for (int h = 0; h < P.horizon; ++h) {
    if (P.states_per_step[h] < 1) throw ConfigurationError("every step needs at least one state");
    offset_.push_back(total);
    for (int j = 0; j < P.states_per_step[h]; ++j) step_of_.push_back(h + 1);
    total += P.states_per_step[h];
  }
  if (P.state_names.empty()) {
    for (int s = 0; s < total; ++s) P.state_names.push_back("s" + std::to_string(s + 1));
  } else if (static_cast<int>(P.state_names.size()) != total) {
    throw ConfigurationError("state_names must name every state");
  }
  check_distribution(P.start, static_cast<std::size_t>(P.states_per_step[0]), "start distribution");
  if (static_cast<int>(P.transitions.size()) != total) throw ConfigurationError("transitions must cover every state");
  if (P.rewards.empty()) {
    P.rewards.resize(total);
    for (int s = 0; s < total; ++s) {
      int next = step_of_[s] < P.horizon ? P.states_per_step[step_of_[s]] : 1;
      P.rewards[s].assign(P.num_actions, std::vector<RewardDescriptor>(next));
    }
  }
  if (static_cast<int>(P.rewards.size()) != total) throw ConfigurationError("rewards must cover every state");
  for (int s = 0; s < total; ++s) {
    const int h = step_of_[s];
    const std::string where = "state " + P.state_names[s];
    if (static_cast<int>(P.transitions[s].size()) != P.num_actions ||
        static_cast<int>(P.rewards[s].size()) != P.num_actions)
      throw ConfigurationError(where + ": one row per action required");
    for (int a = 0; a < P.num_actions; ++a) {
      if (h < P.horizon) {
        check_distribution(P.transitions[s][a], static_cast<std::size_t>(P.states_per_step[h]),
                           where + " action " + std::to_string(a));
        if (P.rewards[s][a].size() != static_cast<std::size_t>(P.states_per_step[h]))
          throw ConfigurationError(where + ": reward row has wrong length");
      } else {
        if (!P.transitions[s][a].empty()) throw ConfigurationError(where + ": last-step states have no transitions");
        if (P.rewards[s][a].size() != 1) throw ConfigurationError(where + ": last-step reward needs one entry");
      }
      for (const auto& r : P.rewards[s][a])
        if (r.prob < 0.0 || r.prob > 1.0) throw ConfigurationError(where + ": reward probability outside [0,1]");
    }
  }
  if (const auto* d = std::get_if<DiscreteEmission>(&P.emission)) {
    if (static_cast<int>(d->table.size()) != total) throw ConfigurationError("emission table must cover every state");
    std::map<ObsId, StateId> owner;
    for (int s = 0; s < total; ++s) {
      std::vector<double> probs;
      for (const auto& [id, p] : d->table[s]) {
        probs.push_back(p);
        auto [it, inserted] = owner.emplace(id, s);
        if (!inserted && it->second != s)
          throw ConfigurationError("observation " + std::to_string(id) + " emitted by both " +
                                   P.state_names[it->second] + " and " + P.state_names[s]);
      }
      check_distribution(probs, probs.size(), "emission of " + P.state_names[s]);
    }
  } else {
    const auto& g = std::get<RotatedGaussianEmission>(P.emission);
    if (static_cast<int>(g.slot.size()) != total) throw ConfigurationError("emission slots must cover every state");
    if (g.dim < g.horizon + 3 || g.rotation.rows() != g.dim || g.rotation.cols() != g.dim)
      throw ConfigurationError("rotation must be dim x dim with dim >= H+3");
  }
}

std::vector<StateId> LatentBlockMDP::states_at(int h) const {
  std::vector<StateId> out(static_cast<std::size_t>(num_states_at(h)));
  std::iota(out.begin(), out.end(), offset_[h - 1]);
  return out;
}

double LatentBlockMDP::transition(StateId s, Action a, StateId next) const {
  if (step_of_[s] >= horizon() || step_of_[next] != step_of_[s] + 1) return 0.0;
  return parts_.transitions[s][a][local_index(next)];
}

double LatentBlockMDP::expected_reward(StateId s, Action a) const {
  const auto& row = parts_.rewards[s][a];
  if (step_of_[s] == horizon()) return row[0].mean();
  double v = 0.0;
  const auto& t = parts_.transitions[s][a];
  for (std::size_t j = 0; j < t.size(); ++j) v += t[j] * row[j].mean();
  return v;
}

}  // namespace kinlab
