#include <doctest.h>

#include <cmath>

#include "kinlab/block_mdp/dynamics.hpp"
#include "kinlab/block_mdp/environment.hpp"
#include "kinlab/block_mdp/io.hpp"
#include "kinlab/block_mdp/latent_access.hpp"
#include "kinlab/common/errors.hpp"
#include "kinlab/envs/combolock.hpp"
#include "kinlab/envs/figures.hpp"

using namespace kinlab;

namespace {

BlockMdpParts two_step() {
  BlockMdpParts p;
  p.horizon = 2;
  p.num_actions = 2;
  p.states_per_step = {1, 2};
  p.start = {1.0};
  p.transitions = {{{0.3, 0.7}, {1.0, 0.0}}, {{}, {}}, {{}, {}}};
  p.rewards = {{{RewardDescriptor{}, RewardDescriptor{}}, {RewardDescriptor{}, RewardDescriptor{}}},
               {{RewardDescriptor{1.0, 1.0}}, {RewardDescriptor{0.0, 1.0}}},
               {{RewardDescriptor{0.0, 1.0}}, {RewardDescriptor{2.0, 0.5}}}};
  p.emission = DiscreteEmission{{{{0, 1.0}}, {{1, 0.5}, {2, 0.5}}, {{3, 1.0}}}};
  return p;
}

}  // namespace

TEST_SUITE("block_mdp") {
  TEST_CASE("valid parts build a step-major layout") {
    LatentBlockMDP m(two_step());
    CHECK(m.num_states() == 3);
    CHECK(m.state_at(2, 1) == 2);
    CHECK(m.step_of(2) == 2);
    CHECK(m.local_index(2) == 1);
    CHECK(m.name(0) == "s1");
    CHECK(m.transition(0, 0, 2) == doctest::Approx(0.7));
    CHECK(m.expected_reward(2, 1) == doctest::Approx(1.0));
  }

  TEST_CASE("validation rejects malformed parts") {
    auto p = two_step();
    p.transitions[0][0] = {0.3, 0.6};
    CHECK_THROWS_AS(LatentBlockMDP{p}, ConfigurationError);

    p = two_step();
    p.start = {0.9};
    CHECK_THROWS_AS(LatentBlockMDP{p}, ConfigurationError);

    p = two_step();
    std::get<DiscreteEmission>(p.emission).table[2] = {{1, 1.0}};
    CHECK_THROWS_AS(LatentBlockMDP{p}, ConfigurationError);

    p = two_step();
    p.states_per_step = {1, 3};
    CHECK_THROWS_AS(LatentBlockMDP{p}, ConfigurationError);
  }

  TEST_CASE("json round trip preserves the model") {
    LatentBlockMDP m(two_step());
    auto j = mdp_to_json(m);
    LatentBlockMDP back = mdp_from_json(j);
    CHECK(mdp_to_json(back) == j);
    CHECK(back.transition(0, 0, 1) == doctest::Approx(0.3));
    CHECK(back.reward(2, 1, 0).prob == doctest::Approx(0.5));
  }

  TEST_CASE("exact value agrees with Monte Carlo") {
    auto m = std::make_shared<const LatentBlockMDP>(two_step());
    auto pol = latent_policy(2, {{{0, 0}}, {{1, 0}, {2, 1}}});
    auto exact = value_of(*m, pol, ExternalReward{});
    CHECK(exact.exact);
    CHECK(exact.value == doctest::Approx(0.3 * 1.0 + 0.7 * 1.0));

    BlockMdpEnvironment env(m);
    auto rng = make_rng(5, {});
    double total = 0.0;
    const int n = 40000;
    for (int i = 0; i < n; ++i) total += env.run(pol, 2, rng).total_reward();
    CHECK(total / n == doctest::Approx(exact.value).epsilon(0.02));
    CHECK(env.episodes_used() == static_cast<std::uint64_t>(n));
  }

  TEST_CASE("exact visitation of the uniform policy") {
    LatentBlockMDP m(two_step());
    auto v = exact_visitation(m, uniform_policy(2, 1));
    REQUIRE(v.size() == 3);
    CHECK(v[0] == doctest::Approx(1.0));
    CHECK(v[1] == doctest::Approx(0.65));
    CHECK(v[2] == doctest::Approx(0.35));
  }

  TEST_CASE("eta and homing policies on the combination lock") {
    ComboLockOptions o;
    o.discrete_emission = true;
    auto m = make_combolock(4, 3, 11, o);
    auto r = eta_exact(*m);
    CHECK(r.eta_min == doctest::Approx(0.5));
    for (StateId s = 0; s < m->num_states(); ++s) {
      if (m->step_of(s) == 1) continue;
      CHECK(r.eta[s] == doctest::Approx(m->local_index(s) == 2 ? 1.0 : 0.5));
    }
  }

  TEST_CASE("optimal combination-lock value is one") {
    auto spec = combolock_spec(5, 4, 3);
    auto m = make_combolock(spec);
    std::vector<std::map<StateId, Action>> tables;
    for (int h = 1; h <= 5; ++h)
      tables.push_back({{m->state_at(h, 0), spec.u[h - 1]}, {m->state_at(h, 1), spec.v[h - 1]}});
    auto v = value_of(*m, latent_policy(4, tables), ExternalReward{});
    CHECK(v.exact);
    CHECK(v.value == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("policy json round trip and prefixes") {
    auto pol = latent_policy(3, {{{0, 2}}, {{1, 1}, {2, 0}}});
    auto back = NonstationaryPolicy::from_json(pol.to_json());
    CHECK(back.to_json() == pol.to_json());
    CHECK(pol.prefix(1).length() == 1);
    CHECK(pol.then(std::make_shared<UniformDecider>(3)).length() == 3);
  }

  TEST_CASE("trajectories expose latent states through the back door") {
    auto m = make_fig1(Fig1Variant::Right);
    auto rng = make_rng(2, {});
    auto log = sample_trajectory(*m, uniform_policy(1, 3), rng);
    REQUIRE(log.steps.size() == 3);
    CHECK(log.steps[0].latent == 0);
    const StateId mid = log.steps[1].latent;
    CHECK((mid == 1 || mid == 2));
    CHECK(LatentAccess::latent(log.steps[1].observation) == mid);
    CHECK(log.steps[1].observation.id() == (mid == 1 ? 2 : 3));
    CHECK_THROWS_AS(sample_trajectory(*m, uniform_policy(1, 2), rng), ConfigurationError);
  }
}
