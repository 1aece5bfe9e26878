#include "kinlab/block_mdp/environment.hpp"

#include "kinlab/block_mdp/latent_access.hpp"
#include "kinlab/common/errors.hpp"

namespace kinlab {

namespace {

void check_compatible(const LatentBlockMDP& mdp, const NonstationaryPolicy& policy, int steps) {
  if (policy.length() < steps)
    throw ConfigurationError("policy covers " + std::to_string(policy.length()) + " steps, rollout needs " +
                             std::to_string(steps));
  const bool discrete = is_discrete(mdp.emission());
  for (int h = 1; h <= steps; ++h) {
    const StepDecider* d = &policy.at(h);
    if (!discrete && dynamic_cast<const ObservationTableDecider*>(d))
      throw ConfigurationError("observation-table decider at step " + std::to_string(h) +
                               " cannot act on vector observations");
    if (const auto* lin = dynamic_cast<const LinearArgmaxDecider*>(d)) {
      if (discrete != (lin->features().discrete_dim > 0))
        throw ConfigurationError("linear decider at step " + std::to_string(h) +
                                 " was built for a different observation kind");
    }
  }
}

}  // namespace

double Episode::total_reward() const {
  double s = 0.0;
  for (double r : rewards) s += r;
  return s;
}

double TrajectoryLog::total_reward() const {
  double s = 0.0;
  for (const auto& st : steps) s += st.reward;
  return s;
}

nlohmann::json TrajectoryLog::to_json() const {
  nlohmann::json steps_json = nlohmann::json::array();
  for (const auto& st : steps) {
    nlohmann::json obs;
    if (st.observation.is_discrete()) {
      obs = st.observation.id();
    } else if (st.observation.is_vector()) {
      const auto& v = st.observation.vec();
      obs = std::vector<double>(v.data(), v.data() + v.size());
    }
    steps_json.push_back({{"h", st.observation.timestep()},
                          {"latent", st.latent},
                          {"observation", obs},
                          {"action", st.action},
                          {"reward", st.reward}});
  }
  return {{"seed", seed}, {"steps", steps_json}};
}

Episode BlockMdpEnvironment::run(const NonstationaryPolicy& policy, int steps, Rng& rng) const {
  const auto& m = *mdp_;
  if (steps < 0 || steps > m.horizon()) throw ConfigurationError("rollout length outside [0, H]");
  check_compatible(m, policy, steps);
  count_episode();
  Episode ep;
  ep.observations.reserve(static_cast<std::size_t>(steps) + 1);
  ep.actions.reserve(static_cast<std::size_t>(steps));
  ep.rewards.reserve(static_cast<std::size_t>(steps));
  StateId s = m.state_at(1, sample_index(m.start(), rng));
  ep.observations.push_back(emit(m.emission(), s, 1, rng));
  for (int h = 1; h <= steps; ++h) {
    const Action a = policy.act(ep.observations.back(), rng);
    ep.actions.push_back(a);
    if (h == m.horizon()) {
      ep.rewards.push_back(m.reward(s, a, 0).sample(rng));
      break;
    }
    const int j = sample_index(m.transition(s, a), rng);
    ep.rewards.push_back(m.reward(s, a, j).sample(rng));
    s = m.state_at(h + 1, j);
    ep.observations.push_back(emit(m.emission(), s, h + 1, rng));
  }
  return ep;
}

TrajectoryLog sample_trajectory(const LatentBlockMDP& mdp, const NonstationaryPolicy& policy, Rng& rng) {
  check_compatible(mdp, policy, mdp.horizon());
  TrajectoryLog log;
  StateId s = mdp.state_at(1, sample_index(mdp.start(), rng));
  for (int h = 1; h <= mdp.horizon(); ++h) {
    TrajectoryStep st;
    st.latent = s;
    st.observation = emit(mdp.emission(), s, h, rng);
    st.action = policy.act(st.observation, rng);
    if (h == mdp.horizon()) {
      st.reward = mdp.reward(s, st.action, 0).sample(rng);
    } else {
      const int j = sample_index(mdp.transition(s, st.action), rng);
      st.reward = mdp.reward(s, st.action, j).sample(rng);
      s = mdp.state_at(h + 1, j);
    }
    log.steps.push_back(std::move(st));
  }
  return log;
}

}  // namespace kinlab
