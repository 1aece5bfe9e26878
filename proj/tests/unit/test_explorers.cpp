#include <doctest.h>

#include "kinlab/block_mdp/latent_access.hpp"
#include "kinlab/envs/combolock.hpp"
#include "kinlab/envs/figures.hpp"
#include "kinlab/explorers/diagnostics.hpp"
#include "kinlab/explorers/explorers.hpp"
#include "kinlab/explorers/recovery.hpp"

using namespace kinlab;

namespace {

std::shared_ptr<const LatentBlockMDP> discrete_lock(int H, int K, std::uint64_t seed) {
  ComboLockOptions o;
  o.discrete_emission = true;
  return make_combolock(H, K, seed, o);
}

Observation obs_of(const LatentBlockMDP& m, StateId s, std::size_t k = 0) {
  const auto& table = std::get<DiscreteEmission>(m.emission()).table[s];
  return LatentAccess::make(m.step_of(s), table.at(k).first, s);
}

std::vector<PolicyCover> exact_covers(const LatentBlockMDP& mdp) {
  auto eta = eta_exact(mdp);
  std::vector<PolicyCover> covers;
  for (int h = 1; h <= mdp.horizon(); ++h) {
    PolicyCover c;
    c.timestep = h;
    if (h > 1)
      for (StateId s : mdp.states_at(h)) c.policies.push_back(eta.homing[s]);
    covers.push_back(std::move(c));
  }
  return covers;
}

}  // namespace

TEST_SUITE("explorers") {
  TEST_CASE("internal rewards form a partition of unity") {
    auto m = discrete_lock(3, 2, 1);
    auto phi = oracle_abstraction(*m, KIKind::Backward);
    const Observation x = obs_of(*m, m->state_at(2, 0));
    for (StateId s : m->states_at(3)) {
      for (std::size_t k = 0; k < 2; ++k) {
        double total = 0.0;
        for (int i = 0; i < phi.capacity(3); ++i) total += make_internal_reward(phi, i, 3)(x, 0, obs_of(*m, s, k));
        CHECK(total == 1.0);
      }
    }
    CHECK(make_internal_reward(phi, 0, 3)(x, 0, Observation{}) == 0.0);
    CHECK(make_internal_reward(phi, 0, 3)(x, 0, obs_of(*m, m->state_at(2, 0))) == 0.0);
  }

  TEST_CASE("abstractions serialize") {
    auto m = discrete_lock(3, 2, 1);
    auto phi = oracle_abstraction(*m, KIKind::Backward);
    auto back = abstraction_from_json(phi.to_json());
    CHECK(back.provenance == Provenance::Oracle);
    for (StateId s = 0; s < m->num_states(); ++s) CHECK(back.decode(obs_of(*m, s)) == phi.decode(obs_of(*m, s)));
    auto c = constant_abstraction(3);
    CHECK(c.capacity(2) == 1);
    CHECK(combined_capacity(phi, c, 2) == 2);
    CHECK(combined_capacity(c, phi, 2) == 2);
  }

  TEST_CASE("match_partition finds the best one-to-one assignment") {
    auto r = match_partition({{0, 5, 1}, {7, 0, 0}});
    CHECK(r.assignment == std::vector<int>{1, 0});
    CHECK(r.accuracy == doctest::Approx(12.0 / 13.0));
    CHECK(r.total == 13);
    auto one = match_partition({{4, 4}});
    CHECK(one.accuracy == doctest::Approx(0.5));
  }

  TEST_CASE("oracle decoders match the truth exactly") {
    auto m = discrete_lock(4, 3, 2);
    auto phi = oracle_abstraction(*m, KIKind::Backward);
    for (int h = 1; h <= 4; ++h) {
      auto r = decode_match(*m, phi.at(h), backward_ki_partition(*m, h), 300, 7);
      CHECK(r.accuracy == 1.0);
    }
  }

  TEST_CASE("recovered dynamics of a deterministic chain are exact") {
    auto m = make_fig1(Fig1Variant::Left);
    BlockMdpEnvironment env(m);
    auto c = constant_abstraction(3);
    auto dyn = recover_dynamics(env, exact_covers(*m), c, c, 500, 3);
    REQUIRE(dyn.steps.size() == 2);
    for (const auto& t : dyn.steps) {
      CHECK(t.row_count(0, 0) == 500);
      CHECK(t.row(0, 0) == std::vector<double>{1.0});
    }
  }

  TEST_CASE("recovered rows sum to one and empty rows are empty") {
    auto m = discrete_lock(3, 2, 4);
    BlockMdpEnvironment env(m);
    auto b = oracle_abstraction(*m, KIKind::Backward);
    auto f = oracle_abstraction(*m, KIKind::Forward);
    auto dyn = recover_dynamics(env, exact_covers(*m), f, b, 3000, 5);
    for (const auto& t : dyn.steps)
      for (int i = 0; i < t.from_codes; ++i)
        for (Action a = 0; a < t.num_actions; ++a) {
          auto row = t.row(i, a);
          if (t.row_count(i, a) == 0) {
            CHECK(row.empty());
            continue;
          }
          double s = 0.0;
          for (double p : row) s += p;
          CHECK(s == doctest::Approx(1.0));
        }
    auto canon = canonicalize(*m);
    auto rep = canonical_dynamics_tv(dyn, f, b, *m, canon, 200, 500, 6);
    CHECK(rep.rows_checked > 0);
    CHECK(rep.max_tv < 0.1);
  }

  TEST_CASE("roll-in marginal and cover certificate") {
    auto m = discrete_lock(3, 2, 8);
    auto covers = exact_covers(*m);
    auto rho = rollin_marginal(*m, covers[0], 2);
    REQUIRE(rho.size() == 3);
    CHECK(rho[0] == doctest::Approx(0.25));
    CHECK(rho[1] == doctest::Approx(0.25));
    CHECK(rho[2] == doctest::Approx(0.5));
    for (int h = 2; h <= 3; ++h) CHECK(cover_certificate(*m, covers[h - 1]).alpha == doctest::Approx(1.0));
    auto mc = cover_visitation_mc(*m, covers[2], 2000, 9);
    for (double v : mc) CHECK(v >= 0.4);
  }

  TEST_CASE("visitation traces count one state per step") {
    auto m = discrete_lock(3, 2, 8);
    auto zero = visitation_trace(*m, {uniform_policy(2, 1)}, 0, 1);
    for (const auto& row : zero.weights())
      for (double w : row) CHECK(w == 0.0);
    auto t = visitation_trace(*m, {uniform_policy(2, 1)}, 400, 2);
    for (const auto& row : t.counts) {
      std::uint64_t s = 0;
      for (auto c : row) s += c;
      CHECK(s == 400);
    }
    CHECK(t.to_json(*m).dump().find("weight") != std::string::npos);
  }

  TEST_CASE("contrastive data are balanced") {
    auto m = discrete_lock(3, 2, 8);
    BlockMdpEnvironment env(m);
    auto covers = exact_covers(*m);
    auto data = collect_contrastive(env, covers[0], 2, 500, true, false, 3);
    std::size_t real = 0;
    for (const auto& e : data) {
      real += e.y == 1.0;
      CHECK(e.x.timestep() == 1);
      CHECK(e.next.timestep() == 2);
    }
    CHECK(data.size() == 1000);
    CHECK(real == 500);
  }

  TEST_CASE("ExpOracle with oracle decoders covers a small lock") {
    auto m = discrete_lock(4, 2, 3);
    BlockMdpEnvironment env(m);
    ExpOracleConfig cfg;
    cfg.psdp.n = 2000;
    cfg.psdp.policy_class = TabularClass{};
    auto res = exp_oracle(env, oracle_abstraction(*m, KIKind::Backward), cfg);
    CHECK(value_of(*m, res.policy, ExternalReward{}).value >= 0.95);
    for (int h = 2; h <= 4; ++h) CHECK(cover_certificate(*m, res.covers[h - 1]).alpha >= 0.9);
  }

  TEST_CASE("HOMER with exact oracles solves a discrete lock") {
    auto m = discrete_lock(3, 2, 5);
    BlockMdpEnvironment env(m);
    HomerConfig cfg;
    cfg.n_reg = 1500;
    cfg.reg = ExactRegConfig{};
    cfg.psdp.n = 1500;
    cfg.psdp.policy_class = TabularClass{};
    cfg.seed = 2;
    std::size_t events = 0;
    cfg.on_metrics = [&](const nlohmann::json&) { ++events; };
    auto res = homer(env, cfg);
    CHECK(events > 0);
    CHECK_FALSE(res.degenerate);
    CHECK(value_of(*m, res.policy, ExternalReward{}).value >= 0.9);
    for (int h = 2; h <= 3; ++h)
      CHECK(decode_match(*m, res.backward.at(h), backward_ki_partition(*m, h), 600, 4).accuracy == 1.0);
    CHECK(res.to_json().contains("iterations"));
  }
}
