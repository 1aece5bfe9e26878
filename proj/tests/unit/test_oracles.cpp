#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "kinlab/common/errors.hpp"
#include "kinlab/envs/combolock.hpp"
#include "kinlab/explorers/diagnostics.hpp"
#include "kinlab/oracles/cb.hpp"
#include "kinlab/oracles/gumbel_net.hpp"
#include "kinlab/oracles/reg.hpp"

using namespace kinlab;

namespace {

// Two contexts, three actions; action (id + 1) % 3 pays 1, the rest 0.
std::vector<CBExample> bandit_data(int n, Rng& rng, bool vectors) {
  std::vector<CBExample> d;
  for (int i = 0; i < n; ++i) {
    const int id = uniform_int(rng, 2);
    const Action a = uniform_int(rng, 3);
    Observation x = vectors ? Observation(1, Eigen::VectorXd::Unit(2, id)) : Observation(1, ObsId{id});
    d.push_back({x, a, 1.0 / 3.0, a == (id + 1) % 3 ? 1.0 : 0.0});
  }
  return d;
}

std::vector<ContrastiveExample> contrastive_vectors(int n, Rng& rng) {
  std::vector<ContrastiveExample> d;
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd x(4), nx(5);
    for (auto& v : x) v = 2.0 * uniform01(rng) - 1.0;
    for (auto& v : nx) v = 2.0 * uniform01(rng) - 1.0;
    d.push_back({Observation(1, x), uniform_int(rng, 3), Observation(2, nx), static_cast<double>(i % 2), 1.0});
  }
  return d;
}

}  // namespace

TEST_SUITE("oracles") {
  TEST_CASE("tabular CB recovers the best action per id") {
    auto rng = make_rng(1, {});
    auto data = bandit_data(3000, rng, false);
    auto res = cb_optimize(data, 3, TabularClass{});
    for (int id = 0; id < 2; ++id) CHECK(res.policy->act(Observation(1, ObsId{id}), rng) == (id + 1) % 3);
    CHECK(res.objective == doctest::Approx(iw_objective(data, *res.policy)));
    CHECK(res.objective == doctest::Approx(1.0).epsilon(0.1));
  }

  TEST_CASE("enumerated CB picks the member with the largest objective") {
    auto rng = make_rng(2, {});
    auto data = bandit_data(2000, rng, false);
    EnumeratedClass cls;
    for (Action a = 0; a < 3; ++a)
      cls.members.push_back(std::make_shared<ObservationTableDecider>(3, std::map<ObsId, Action>{}, a));
    cls.members.push_back(std::make_shared<ObservationTableDecider>(3, std::map<ObsId, Action>{{0, 1}, {1, 2}}));
    auto res = cb_optimize(data, 3, cls);
    CHECK(res.member_index == 3);
    cls.budget = 2;
    CHECK_THROWS_AS(cb_optimize(data, 3, cls), EnumerationBudgetExceeded);
  }

  TEST_CASE("linear CB learns a separable vector bandit") {
    auto rng = make_rng(3, {});
    auto data = bandit_data(4000, rng, true);
    LinearClass cls;
    cls.optimizer.kind = OptimizerKind::Adam;
    cls.optimizer.lr = 0.01;
    auto res = cb_optimize(data, 3, cls);
    for (int id = 0; id < 2; ++id)
      CHECK(res.policy->act(Observation(1, Eigen::VectorXd::Unit(2, id)), rng) == (id + 1) % 3);
    CHECK_THROWS_AS(cb_optimize(data, 3, TabularClass{}), UnsupportedOperation);
  }

  TEST_CASE("CB input validation") {
    CHECK_THROWS_AS(cb_optimize({}, 3, TabularClass{}), ConfigurationError);
    std::vector<CBExample> bad{{Observation(1, ObsId{0}), 0, 0.0, 1.0}};
    CHECK_THROWS_AS(cb_optimize(bad, 3, TabularClass{}), ConfigurationError);
    CHECK(delta_csc(100, 2, 10, 0.1) == doctest::Approx(4.0 * std::sqrt(2.0 / 100.0 * std::log(200.0))));
  }

  TEST_CASE("exact ERM on the population recovers the Bayes regressor") {
    ComboLockOptions o;
    o.discrete_emission = true;
    auto m = make_combolock(2, 2, 4, o);
    PolicyCover start;
    auto pop = population_contrastive(*m, start, 2);
    std::vector<ObsId> xs, nexts;
    for (const auto& [k, v] : pop.f_star) {
      xs.push_back(std::get<0>(k));
      nexts.push_back(std::get<2>(k));
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    std::sort(nexts.begin(), nexts.end());
    nexts.erase(std::unique(nexts.begin(), nexts.end()), nexts.end());
    ExactRegConfig cfg;
    cfg.forward = all_maps(xs, 2);
    cfg.backward = all_maps(nexts, 3);
    auto fit = reg_fit(pop.examples, 3, 2, cfg);
    double worst = 0.0;
    for (const auto& [k, f] : pop.f_star) {
      const auto& [x, a, nx] = k;
      const double p = fit.model->predict(Observation(1, x), a, Observation(2, nx));
      worst = std::max(worst, std::abs(p - f));
    }
    CHECK(worst <= 1e-9);

    auto back = regressor_from_json(fit.model->to_json());
    for (const auto& [k, f] : pop.f_star) {
      const auto& [x, a, nx] = k;
      CHECK(back->predict(Observation(1, x), a, Observation(2, nx)) ==
            fit.model->predict(Observation(1, x), a, Observation(2, nx)));
    }
  }

  TEST_CASE("all_maps enumerates capacity^ids maps and honours its budget") {
    auto cls = all_maps({0, 3, 5}, 2);
    CHECK(cls.maps.size() == 8);
    CHECK(cls.maps[0].size() == 6);
    CHECK_THROWS_AS(all_maps({0, 1, 2, 3}, 3, 10), EnumerationBudgetExceeded);
  }

  TEST_CASE("gumbel network gradients match finite differences") {
    auto rng = make_rng(9, {});
    auto data = contrastive_vectors(8, rng);
    for (auto mode : {BottleneckMode::Backward, BottleneckMode::Forward, BottleneckMode::Joint}) {
      for (auto loss : {RegLoss::CrossEntropy, RegLoss::Square}) {
        GumbelNetConfig cfg;
        cfg.mode = mode;
        cfg.loss = loss;
        cfg.hidden = 7;
        auto net = make_gumbel_net(data, 3, 2, cfg, rng);
        auto noise = net->sample_noise(1, rng);
        auto r = grad_check(*net, data[1], noise, 1e-5);
        CHECK(r.max_relative_error <= 1e-4);
      }
    }
  }

  TEST_CASE("linear pretraining pass has exact gradients") {
    auto rng = make_rng(11, {});
    auto data = contrastive_vectors(6, rng);
    std::vector<const ContrastiveExample*> ptrs;
    for (const auto& e : data) ptrs.push_back(&e);
    for (auto mode : {BottleneckMode::Backward, BottleneckMode::Forward, BottleneckMode::Joint}) {
      GumbelNetConfig cfg;
      cfg.mode = mode;
      cfg.hidden = 5;
      auto net = make_gumbel_net(data, 3, 2, cfg, rng);
      const auto batch = net->make_batch(ptrs);
      Eigen::VectorXd g;
      net->loss_and_grad(batch, GumbelBottleneckNet::Pass::Linear, nullptr, &g);
      double worst = 0.0;
      for (Eigen::Index k = 0; k < net->num_params(); ++k) {
        GumbelBottleneckNet probe = *net;
        probe.params()[k] += 1e-5;
        const double up = probe.loss_and_grad(batch, GumbelBottleneckNet::Pass::Linear, nullptr, nullptr);
        probe.params()[k] -= 2e-5;
        const double down = probe.loss_and_grad(batch, GumbelBottleneckNet::Pass::Linear, nullptr, nullptr);
        const double fd = (up - down) / 2e-5;
        worst = std::max(worst, std::abs(g[k] - fd) / std::max({std::abs(g[k]), std::abs(fd), 1e-6}));
      }
      CHECK(worst <= 1e-4);
    }
  }

  TEST_CASE("head-only mask freezes the bottleneck") {
    auto rng = make_rng(10, {});
    auto data = contrastive_vectors(4, rng);
    GumbelNetConfig cfg;
    cfg.mode = BottleneckMode::Joint;
    auto net = make_gumbel_net(data, 2, 2, cfg, rng);
    auto mask = net->head_only_mask();
    CHECK(mask.size() == net->num_params());
    CHECK(mask.sum() < net->num_params());
    CHECK(mask.sum() > 0);
  }

  TEST_CASE("optimizers respect the freeze mask") {
    for (auto kind : {OptimizerKind::SgdMomentum, OptimizerKind::Adam}) {
      OptimizerConfig c;
      c.kind = kind;
      Optimizer opt(c, 3);
      Eigen::VectorXd p = Eigen::VectorXd::Ones(3);
      Eigen::VectorXd g = Eigen::VectorXd::Ones(3);
      Eigen::VectorXd mask(3);
      mask << 1, 0, 1;
      opt.step(p, g, &mask);
      CHECK(p[1] == 1.0);
      CHECK(p[0] < 1.0);
    }
    CHECK(parse_optimizer("adam") == OptimizerKind::Adam);
    CHECK(to_string(OptimizerKind::SgdMomentum) == "sgd_momentum");
  }

  TEST_CASE("gumbel fit separates a simple contrastive problem") {
    // Real transitions keep the id, imposters flip it.
    std::vector<ContrastiveExample> data;
    auto rng = make_rng(12, {});
    for (int i = 0; i < 1200; ++i) {
      const int s = uniform_int(rng, 2);
      const bool real = (i % 2) == 0;
      const int t = real ? s : 1 - s;
      data.push_back({Observation(1, ObsId{s}), 0, Observation(2, ObsId{t}), real ? 1.0 : 0.0, 1.0});
    }
    GumbelNetConfig cfg;
    cfg.optimizer.kind = OptimizerKind::Adam;
    cfg.max_epochs = 60;
    cfg.restarts = 2;
    auto fit = reg_fit(data, 2, 1, cfg);
    CHECK(fit.report.best_validation_loss < fit.report.baseline_loss);
    CHECK(fit.report.restart_losses.size() == 2);
    CHECK(fit.model->phi_backward(Observation(2, ObsId{0})) != fit.model->phi_backward(Observation(2, ObsId{1})));
    auto back = regressor_from_json(fit.model->to_json());
    CHECK(back->predict(Observation(1, ObsId{0}), 0, Observation(2, ObsId{0})) ==
          doctest::Approx(fit.model->predict(Observation(1, ObsId{0}), 0, Observation(2, ObsId{0}))));
  }

  TEST_CASE("delta_reg formula") {
    const double n = 8000, lp = std::log(729.0);
    CHECK(delta_reg(n, lp, 3, 2, 0.1) ==
          doctest::Approx(16.0 * (lp + 9.0 * 2.0 * std::log(n) + std::log(20.0)) / n));
  }
}
