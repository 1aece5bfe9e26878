#include <doctest.h>

#include <cmath>

#include "kinlab/common/errors.hpp"
#include "kinlab/envs/combolock.hpp"
#include "kinlab/explorers/abstraction.hpp"
#include "kinlab/block_mdp/latent_access.hpp"
#include "kinlab/psdp/psdp.hpp"

using namespace kinlab;

namespace {

std::shared_ptr<const LatentBlockMDP> discrete_lock(int H, int K, std::uint64_t seed) {
  ComboLockOptions o;
  o.discrete_emission = true;
  return make_combolock(H, K, seed, o);
}

// Psi_h holds the homing policy of every state of step h.
std::vector<PolicyCover> exact_covers(const LatentBlockMDP& mdp) {
  auto eta = eta_exact(mdp);
  std::vector<PolicyCover> covers;
  for (int h = 1; h <= mdp.horizon(); ++h) {
    PolicyCover c;
    c.timestep = h;
    c.claimed_alpha = 1.0;
    if (h > 1)
      for (StateId s : mdp.states_at(h)) c.policies.push_back(eta.homing[s]);
    covers.push_back(std::move(c));
  }
  return covers;
}

int block_of_state(const Abstraction& phi, const LatentBlockMDP& m, StateId s) {
  const ObsId id = std::get<DiscreteEmission>(m.emission()).table[s].front().first;
  return phi.at(m.step_of(s)).decode(LatentAccess::make(m.step_of(s), id, s));
}

// A seed whose good actions differ at step 3, so a and b are forward separable there.
std::uint64_t split_seed() {
  std::uint64_t seed = 0;
  while (true) {
    auto spec = combolock_spec(4, 2, seed);
    if (spec.u[2] != spec.v[2]) return seed;
    ++seed;
  }
}

PsdpConfig tabular(std::size_t n, std::uint64_t seed) {
  PsdpConfig c;
  c.n = n;
  c.policy_class = TabularClass{};
  c.seed = seed;
  return c;
}

}  // namespace

TEST_SUITE("psdp") {
  TEST_CASE("one-step PSDP is a single bandit call") {
    auto m = discrete_lock(1, 3, 2);
    BlockMdpEnvironment env(m);
    auto res = psdp(env, exact_covers(*m), PsdpReward::environment(), 1, tabular(3000, 1));
    CHECK(res.levels.size() == 1);
    CHECK(value_of(*m, res.policy, ExternalReward{}).value == doctest::Approx(1.0));
    CHECK(res.episodes == 3000);
  }

  TEST_CASE("PSDP with exact covers solves a small lock") {
    auto m = discrete_lock(3, 2, 5);
    BlockMdpEnvironment env(m);
    auto res = psdp(env, exact_covers(*m), PsdpReward::environment(), 3, tabular(4000, 3));
    REQUIRE(res.policy.length() == 3);
    CHECK(res.levels.front().t == 3);
    CHECK(res.levels.back().t == 1);
    CHECK(value_of(*m, res.policy, ExternalReward{}).value >= 0.95);
  }

  TEST_CASE("internal rewards reach their blocks") {
    auto m = discrete_lock(4, 2, split_seed());
    BlockMdpEnvironment env(m);
    auto phi = oracle_abstraction(*m, KIKind::Full);
    const auto covers = exact_covers(*m);
    const int c_block = block_of_state(phi, *m, m->state_at(3, 2));
    const int a_block = block_of_state(phi, *m, m->state_at(3, 0));
    CHECK(c_block != a_block);
    const auto to_c = PsdpReward::observation(make_internal_reward(phi, c_block, 3));
    const auto to_a = PsdpReward::observation(make_internal_reward(phi, a_block, 3));
    auto bad = psdp(env, covers, to_c, 2, tabular(3000, 7));
    CHECK(estimate_value(env, bad.policy, to_c, 2, 4000, 1) >= 0.9);
    auto good = psdp(env, covers, to_a, 2, tabular(3000, 8));
    CHECK(estimate_value(env, good.policy, to_a, 2, 4000, 2) == doctest::Approx(0.5).epsilon(0.1));
  }

  TEST_CASE("PSDP is deterministic given the seed") {
    auto m = discrete_lock(3, 2, 5);
    BlockMdpEnvironment env(m);
    auto a = psdp(env, exact_covers(*m), PsdpReward::environment(), 3, tabular(500, 11));
    auto b = psdp(env, exact_covers(*m), PsdpReward::environment(), 3, tabular(500, 11));
    CHECK(a.policy.to_json() == b.policy.to_json());
    CHECK(a.levels[0].cb_objective == b.levels[0].cb_objective);
  }

  TEST_CASE("PSDP rejects empty covers past the first step") {
    auto m = discrete_lock(3, 2, 5);
    BlockMdpEnvironment env(m);
    auto covers = exact_covers(*m);
    covers[1].policies.clear();
    CHECK_THROWS_AS(psdp(env, covers, PsdpReward::environment(), 3, tabular(100, 1)), ConfigurationError);
    covers.resize(1);
    CHECK_THROWS_AS(psdp(env, covers, PsdpReward::environment(), 3, tabular(100, 1)), ConfigurationError);
  }

  TEST_CASE("GPS rejects a composition below 1 - epsilon") {
    auto m = discrete_lock(4, 2, split_seed());
    BlockMdpEnvironment env(m);
    auto phi = oracle_abstraction(*m, KIKind::Full);
    const int c_block = block_of_state(phi, *m, m->state_at(3, 2));
    const int a_block = block_of_state(phi, *m, m->state_at(3, 0));
    GpsConfig gps;
    auto r = gps_try(env, exact_covers(*m), PsdpReward::observation(make_internal_reward(phi, a_block, 3)), 2,
                     tabular(2000, 4), gps);
    CHECK_FALSE(r.accepted);
    CHECK(r.value < 0.9);
    CHECK(r.prefix_values.size() == 3);
    auto ok = gps_try(env, exact_covers(*m), PsdpReward::observation(make_internal_reward(phi, c_block, 3)), 2,
                      tabular(2000, 4), gps);
    CHECK(ok.accepted);
  }

  TEST_CASE("level datasets use uniform logging") {
    auto m = discrete_lock(2, 4, 1);
    BlockMdpEnvironment env(m);
    auto covers = exact_covers(*m);
    auto data = psdp_dataset(env, covers[1], PsdpReward::environment(), 2, 2, NonstationaryPolicy{}, 200, 5);
    REQUIRE(data.size() == 200);
    for (const auto& e : data) {
      CHECK(e.p == doctest::Approx(0.25));
      CHECK(e.x.timestep() == 2);
    }
  }

  TEST_CASE("theory sizes scale as stated") {
    const double N = 3, H = 10, A = 4, eta = 0.2, eps = 0.1, delta = 0.05, pi = 1e6, phi = 1e4;
    auto t = theory_sample_sizes(N, H, A, eta, eps, delta, pi, phi);
    auto t2 = theory_sample_sizes(N, 2 * H, A, eta, eps, delta, pi, phi);
    CHECK(t2.n_eval / t.n_eval ==
          doctest::Approx(4.0 * std::log(6.0 * H * pi / delta) / std::log(3.0 * H * pi / delta)));
    auto e2 = theory_sample_sizes(N, H, A, eta, eps / 2, delta, pi, phi);
    CHECK(e2.n_eval / t.n_eval == doctest::Approx(4.0));
    CHECK(t.n_psdp > 0);
    CHECK(t.n_reg > t.n_psdp);
    CHECK_THROWS_AS(theory_sample_sizes(0, H, A, eta, eps, delta, pi, phi), ConfigurationError);
  }

  TEST_CASE("policy covers serialize") {
    auto m = discrete_lock(3, 2, 5);
    auto covers = exact_covers(*m);
    auto back = PolicyCover::from_json(covers[2].to_json());
    CHECK(back.timestep == 3);
    CHECK(back.policies.size() == covers[2].policies.size());
    CHECK(back.to_json() == covers[2].to_json());
  }
}
