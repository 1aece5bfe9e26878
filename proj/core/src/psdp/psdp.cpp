#include "kinlab/psdp/psdp.hpp"

#include <cmath>

#include "kinlab/common/errors.hpp"
#include "kinlab/common/parallel.hpp"
#include "kinlab/common/stats.hpp"

namespace kinlab {

namespace {

const NonstationaryPolicy kEmptyPolicy{};

const NonstationaryPolicy& pick_rollin(const PolicyCover& cover, Rng& rng) {
  if (cover.policies.empty()) return kEmptyPolicy;
  return cover.policies[static_cast<std::size_t>(uniform_int(rng, static_cast<int>(cover.policies.size())))];
}

PolicyClass reseed(const PolicyClass& cls, std::uint64_t seed) {
  if (const auto* lin = std::get_if<LinearClass>(&cls)) {
    LinearClass copy = *lin;
    copy.seed = seed;
    return copy;
  }
  return cls;
}

}  // namespace

nlohmann::json PolicyCover::to_json() const {
  nlohmann::json p = nlohmann::json::array();
  for (const auto& pol : policies) p.push_back(pol.to_json());
  return {{"timestep", timestep}, {"claimed_alpha", claimed_alpha}, {"policies", p}};
}

PolicyCover PolicyCover::from_json(const nlohmann::json& j) {
  PolicyCover c;
  c.timestep = j.at("timestep").get<int>();
  c.claimed_alpha = j.value("claimed_alpha", 0.0);
  for (const auto& p : j.at("policies")) c.policies.push_back(NonstationaryPolicy::from_json(p));
  return c;
}

double PsdpReward::tail_sum(const Episode& ep, int t, int h) const {
  double s = 0.0;
  for (int k = t; k <= h; ++k) {
    if (external) {
      s += ep.rewards[k - 1];
    } else {
      static const Observation none;
      const Observation& next = static_cast<std::size_t>(k) < ep.observations.size() ? ep.observations[k] : none;
      s += fn(ep.observations[k - 1], ep.actions[k - 1], next);
    }
  }
  return s;
}

nlohmann::json PsdpLevelRecord::to_json() const {
  return {{"t", t}, {"dataset_size", dataset_size}, {"cb_objective", cb_objective}, {"mean_reward", mean_reward}};
}

std::vector<CBExample> psdp_dataset(const Environment& env, const PolicyCover& cover, const PsdpReward& reward, int t,
                                    int h, const NonstationaryPolicy& continuation, std::size_t n, std::uint64_t seed) {
  const int K = env.num_actions();
  const auto uniform = std::make_shared<UniformDecider>(K);
  std::vector<CBExample> data(n);
  parallel_for(n, [&](std::size_t i) {
    Rng rng = make_rng(seed, {static_cast<std::uint64_t>(t), i});
    const NonstationaryPolicy& rollin = pick_rollin(cover, rng);
    const NonstationaryPolicy pol = rollin.prefix(t - 1).then(uniform).then(continuation);
    const Episode ep = env.run(pol, h, rng);
    data[i] = CBExample{ep.observations[t - 1], ep.actions[t - 1], 1.0 / K, reward.tail_sum(ep, t, h)};
  });
  return data;
}

PsdpResult psdp(const Environment& env, const std::vector<PolicyCover>& covers, const PsdpReward& reward, int h,
                const PsdpConfig& cfg) {
  if (h < 1 || h > env.horizon()) throw ConfigurationError("PSDP horizon outside [1, H]");
  if (static_cast<int>(covers.size()) < h) throw ConfigurationError("PSDP needs a cover for every step up to h");
  for (int t = 2; t <= h; ++t)
    if (covers[t - 1].policies.empty())
      throw ConfigurationError("empty policy cover at step " + std::to_string(t));
  PsdpResult res;
  std::vector<DeciderPtr> learned(static_cast<std::size_t>(h));
  for (int t = h; t >= 1; --t) {
    const NonstationaryPolicy continuation(std::vector<DeciderPtr>(learned.begin() + t, learned.end()));
    const auto data = psdp_dataset(env, covers[t - 1], reward, t, h, continuation, cfg.n,
                                   derive_seed(cfg.seed, {0x70736470ULL, static_cast<std::uint64_t>(h)}));
    res.episodes += data.size();
    CbResult cb;
    try {
      cb = cb_optimize(data, env.num_actions(), reseed(cfg.policy_class, derive_seed(cfg.seed, {0xcbULL, static_cast<std::uint64_t>(t)})));
    } catch (const Error& e) {
      throw Error("PSDP level " + std::to_string(t) + ": " + e.what());
    }
    learned[t - 1] = cb.policy;
    PsdpLevelRecord rec;
    rec.t = t;
    rec.dataset_size = data.size();
    rec.cb_objective = cb.objective;
    for (const auto& e : data) rec.mean_reward += e.r;
    rec.mean_reward /= static_cast<double>(data.size());
    res.levels.push_back(rec);
  }
  res.policy = NonstationaryPolicy(std::move(learned));
  return res;
}

double estimate_value(const Environment& env, const NonstationaryPolicy& policy, const PsdpReward& reward, int h,
                      std::size_t episodes, std::uint64_t seed) {
  std::vector<double> v(episodes, 0.0);
  parallel_for(episodes, [&](std::size_t i) {
    Rng rng = make_rng(seed, {0x6576616cULL, i});
    v[i] = reward.tail_sum(env.run(policy, h, rng), 1, h);
  });
  double s = 0.0;
  for (double x : v) s += x;
  return episodes ? s / static_cast<double>(episodes) : 0.0;
}

GpsResult gps_try(const Environment& env, const std::vector<PolicyCover>& covers, const PsdpReward& reward, int h,
                  const PsdpConfig& cfg, const GpsConfig& gps, const std::vector<CBExample>* reuse) {
  if (h < 1 || static_cast<int>(covers.size()) < h) throw ConfigurationError("GPS needs a cover for step h");
  GpsResult res;
  std::vector<CBExample> fresh;
  if (!reuse) {
    fresh = psdp_dataset(env, covers[h - 1], reward, h, h, NonstationaryPolicy{}, cfg.n,
                         derive_seed(cfg.seed, {0x677073ULL, static_cast<std::uint64_t>(h)}));
    res.episodes += fresh.size();
  }
  const auto& data = reuse ? *reuse : fresh;
  const CbResult cb = cb_optimize(data, env.num_actions(), reseed(cfg.policy_class, derive_seed(cfg.seed, {0xcbULL, 0x677073ULL})));

  const auto& cover = covers[h - 1];
  const std::size_t prefixes = cover.policies.empty() ? 1 : cover.policies.size();
  for (std::size_t k = 0; k < prefixes; ++k) {
    const NonstationaryPolicy prefix = cover.policies.empty() ? NonstationaryPolicy{} : cover.policies[k].prefix(h - 1);
    const NonstationaryPolicy pol = prefix.then(cb.policy);
    const double v = estimate_value(env, pol, reward, h, gps.mc_episodes, derive_seed(cfg.seed, {0x6d63ULL, k}));
    res.episodes += gps.mc_episodes;
    res.prefix_values.push_back(v);
    if (k == 0 || v > res.value) {
      res.value = v;
      res.best_prefix = k;
      res.policy = pol;
    }
  }
  res.half_width = hoeffding_half_width(static_cast<double>(gps.mc_episodes), gps.delta);
  res.accepted = res.value >= 1.0 - gps.epsilon;
  return res;
}

nlohmann::json TheorySizes::to_json() const { return {{"n_psdp", n_psdp}, {"n_reg", n_reg}, {"n_eval", n_eval}}; }

TheorySizes theory_sample_sizes(double N, double H, double A, double eta, double epsilon, double delta, double pi_size,
                                double phi_size) {
  if (N <= 0 || H <= 0 || A <= 0 || eta <= 0 || epsilon <= 0 || delta <= 0 || pi_size <= 0 || phi_size <= 0)
    throw ConfigurationError("theory sample sizes need positive arguments");
  TheorySizes t;
  t.n_psdp = 32.0 * 32.0 * std::pow(N, 4) * H * H * A * std::log(4.0 * N * H * H * pi_size / delta) / (eta * eta);
  t.n_eval = 64.0 * N * N * H * H * A * std::log(3.0 * H * pi_size / delta) / (epsilon * epsilon);
  const double a = 512.0 * 512.0 * std::pow(N, 6) * std::pow(A, 3) / std::pow(eta, 3);
  t.n_reg = a * (N * N * A * std::log(512.0 * 512.0 * std::pow(N, 8) * std::pow(A, 4) / std::pow(eta, 3)) +
                 std::log(phi_size) + std::log(6.0 * H / delta));
  return t;
}

}  // namespace kinlab
