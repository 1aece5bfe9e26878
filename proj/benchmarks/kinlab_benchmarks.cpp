#include <benchmark/benchmark.h>

#include "kinlab/block_mdp/environment.hpp"
#include "kinlab/envs/combolock.hpp"
#include "kinlab/envs/random_mdp.hpp"
#include "kinlab/explorers/diagnostics.hpp"
#include "kinlab/explorers/explorers.hpp"
#include "kinlab/kinematics/policy_ratio.hpp"
#include "kinlab/oracles/cb.hpp"
#include "kinlab/oracles/gumbel_net.hpp"

using namespace kinlab;

static void BM_ComboLockEpisode(benchmark::State& state) {
  const int H = static_cast<int>(state.range(0));
  BlockMdpEnvironment env(make_combolock(H, 4, 1));
  const auto pol = uniform_policy(4, H);
  auto rng = make_rng(1, {});
  for (auto _ : state) benchmark::DoNotOptimize(env.run(pol, H, rng));
  state.SetItemsProcessed(state.iterations() * H);
}
BENCHMARK(BM_ComboLockEpisode)->Arg(10)->Arg(100);

static void BM_KiPartitions(benchmark::State& state) {
  RandomMdpOptions opts;
  auto rng = make_rng(2, {});
  std::vector<LatentBlockMDP> mdps;
  for (int i = 0; i < 32; ++i) mdps.push_back(random_block_mdp(opts, rng));
  for (auto _ : state)
    for (const auto& m : mdps)
      for (int h = 1; h <= m.horizon(); ++h) benchmark::DoNotOptimize(ki_partition(m, h));
}
BENCHMARK(BM_KiPartitions);

static void BM_PolicyRatio(benchmark::State& state) {
  RandomMdpOptions opts;
  opts.min_horizon = opts.max_horizon = 3;
  auto rng = make_rng(3, {});
  const LatentBlockMDP m = random_block_mdp(opts, rng);
  const auto part = backward_ki_partition(m, 3);
  for (auto _ : state) benchmark::DoNotOptimize(check_policy_ratio(m, part));
}
BENCHMARK(BM_PolicyRatio);

static void BM_GumbelLossAndGrad(benchmark::State& state) {
  BlockMdpEnvironment env(make_combolock(10, 4, 1));
  const auto data = collect_contrastive(env, PolicyCover{}, 2, static_cast<std::size_t>(state.range(0)), true, false, 4);
  GumbelNetConfig cfg;
  auto rng = make_rng(4, {});
  auto net = make_gumbel_net(data, 2, 3, cfg, rng);
  std::vector<const ContrastiveExample*> ptrs;
  for (const auto& e : data) ptrs.push_back(&e);
  const auto batch = net->make_batch(ptrs);
  const auto noise = net->sample_noise(static_cast<int>(data.size()), rng);
  Eigen::VectorXd grad;
  for (auto _ : state)
    benchmark::DoNotOptimize(net->loss_and_grad(batch, GumbelBottleneckNet::Pass::Gumbel, &noise, &grad));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(data.size()));
}
BENCHMARK(BM_GumbelLossAndGrad)->Arg(16)->Arg(32);

static void BM_LinearCb(benchmark::State& state) {
  BlockMdpEnvironment env(make_combolock(6, 4, 1));
  auto rng = make_rng(5, {});
  std::vector<CBExample> data;
  for (int i = 0; i < 2000; ++i) {
    const auto ep = env.run(uniform_policy(4, 1), 1, rng);
    data.push_back({ep.observations[0], ep.actions[0], 0.25, ep.rewards[0]});
  }
  LinearClass cls;
  cls.epochs = 5;
  for (auto _ : state) benchmark::DoNotOptimize(cb_optimize(data, 4, cls));
}
BENCHMARK(BM_LinearCb);

static void BM_ExactVisitation(benchmark::State& state) {
  ComboLockOptions o;
  o.discrete_emission = true;
  const int H = static_cast<int>(state.range(0));
  const auto m = make_combolock(H, 4, 1, o);
  const auto pol = uniform_policy(4, H);
  for (auto _ : state) benchmark::DoNotOptimize(exact_visitation(*m, pol));
}
BENCHMARK(BM_ExactVisitation)->Arg(10)->Arg(100);

BENCHMARK_MAIN();
