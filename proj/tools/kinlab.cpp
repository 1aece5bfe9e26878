#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "kinlab/block_mdp/io.hpp"
#include "kinlab/common/errors.hpp"
#include "kinlab/common/parallel.hpp"
#include "kinlab/common/stats.hpp"
#include "kinlab/envs/combolock.hpp"
#include "kinlab/explorers/diagnostics.hpp"
#include "kinlab/harness/run.hpp"
#include "kinlab/kinematics/canonical.hpp"
#include "kinlab/psdp/psdp.hpp"

namespace fs = std::filesystem;
using namespace kinlab;

namespace {

void add_env_options(CLI::App* app, EnvironmentConfig& env) {
  app->add_option("--env", env.kind, "combolock | fig1 | counterexample | random | file")
      ->check(CLI::IsMember({"combolock", "fig1", "counterexample", "random", "file"}));
  app->add_option("--horizon", env.horizon, "combolock horizon");
  app->add_option("--actions", env.actions, "combolock actions");
  app->add_option("--env-seed", env.seed, "combolock / random MDP seed");
  app->add_flag("--discrete", env.discrete, "combolock with discrete emissions");
  app->add_option("--variant", env.variant, "fig1 variant (left | right)");
  app->add_option("--counterexample", env.counterexample, "fig4a | fig4b_chain:L | noisy_bits:d:p");
  app->add_option("--path", env.path, "MDP document for --env file");
}

nlohmann::json read_json(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw ConfigurationError("cannot open " + p.string());
  nlohmann::json j;
  in >> j;
  return j;
}

struct StoredRun {
  ExperimentConfig cfg;
  std::shared_ptr<const LatentBlockMDP> mdp;
  nlohmann::json result;
};

StoredRun load_run(const fs::path& dir, std::uint64_t seed) {
  StoredRun r;
  r.cfg = ExperimentConfig::from_json(read_json(dir / "config.json"));
  EnvironmentConfig e = r.cfg.environment;
  e.seed += seed;
  r.mdp = make_environment(e);
  r.result = read_json(dir / "artifacts" / ("seed-" + std::to_string(seed)) / "result.json");
  return r;
}

std::vector<PolicyCover> covers_of(const nlohmann::json& result) {
  std::vector<PolicyCover> covers;
  for (const auto& c : result.at("covers")) covers.push_back(PolicyCover::from_json(c));
  return covers;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kinlab: kinematic inseparability, policy covers and HOMER"};
  app.require_subcommand(1);
  int workers = 0;
  std::uint64_t seed = 0;
  app.add_option("--workers", workers, "cap on worker threads (0 = all cores)");
  app.add_option("--seed", seed, "random seed");

  std::string config_path, output;
  auto* run = app.add_subcommand("run", "run an experiment config into a run directory");
  run->add_option("config", config_path, "experiment config (JSON)")->required();
  run->add_option("--output", output, "output root (default $KINLAB_OUTPUT_ROOT or ./runs)");

  auto* restart = app.add_subcommand("restart-loop", "homer with doubling N and halving eta until plateau");
  restart->add_option("config", config_path, "experiment config (JSON)")->required();
  int rounds = 4;
  restart->add_option("--rounds", rounds, "maximum rounds");

  EnvironmentConfig env;
  auto* ki = app.add_subcommand("ki-analyze", "kinematic inseparability report");
  add_env_options(ki, env);
  auto* canon = app.add_subcommand("canonicalize", "canonical form of a discrete Block MDP");
  add_env_options(canon, env);
  auto* cex = app.add_subcommand("counterexample-report", "collapse and KI partitions, autoencoder losses");
  add_env_options(cex, env);

  std::string policy_path;
  std::size_t episodes = 20000;
  auto* eval = app.add_subcommand("eval-policy", "Monte-Carlo value of a stored policy with its Hoeffding band");
  add_env_options(eval, env);
  eval->add_option("policy", policy_path, "policy JSON or a result.json")->required();
  eval->add_option("--episodes", episodes, "Monte-Carlo episodes");

  std::string run_dir;
  std::uint64_t run_seed = 0;
  auto* trace = app.add_subcommand("visitation-trace", "per-state visitation counts and ln(count+1) weights");
  trace->add_option("run", run_dir, "run directory")->required();
  trace->add_option("--run-seed", run_seed, "which seed of the run");
  trace->add_option("--episodes", episodes, "episodes");

  std::size_t per_step = 20000;
  auto* rec = app.add_subcommand("recover-dynamics", "empirical abstract transition tensors of a stored run");
  rec->add_option("run", run_dir, "run directory")->required();
  rec->add_option("--run-seed", run_seed, "which seed of the run");
  rec->add_option("--samples", per_step, "transitions per step");

  double N = 2, H = 10, A = 4, eta = 0.5, eps = 0.1, delta = 0.1, pi = 1e6, phi = 1e6;
  auto* theory = app.add_subcommand("theory-sizes", "n_psdp, n_reg and n_eval from the analysis");
  theory->add_option("--N", N);
  theory->add_option("--H", H);
  theory->add_option("--A", A);
  theory->add_option("--eta", eta);
  theory->add_option("--epsilon", eps);
  theory->add_option("--delta", delta);
  theory->add_option("--policies", pi, "|Pi|");
  theory->add_option("--abstractions", phi, "|Phi_N|");

  auto* info = app.add_subcommand("combolock-info", "dimension, good actions and Hadamard checksum");
  info->add_option("--horizon", env.horizon);
  info->add_option("--actions", env.actions);

  CLI11_PARSE(app, argc, argv);
  if (workers > 0) set_default_workers(workers);

  try {
    if (*run) {
      auto cfg = ExperimentConfig::load(config_path);
      if (workers > 0) cfg.workers = workers;
      const auto out = run_experiment(cfg, output);
      std::cout << out.directory.string() << "\n";
      std::ifstream txt(out.directory / "summary.txt");
      std::cout << txt.rdbuf();
      return out.ok ? 0 : 1;
    }
    if (*restart) {
      std::cout << restart_loop(ExperimentConfig::load(config_path), rounds).dump(2) << "\n";
      return 0;
    }
    if (*ki) {
      std::cout << ki_report(*make_environment(env)).dump(2) << "\n";
      return 0;
    }
    if (*canon) {
      const auto mdp = make_environment(env);
      const auto c = canonicalize(*mdp);
      std::cout << nlohmann::json{{"canonical", c.to_json(*mdp)}, {"mdp", mdp_to_json(*c.mdp)}}.dump(2) << "\n";
      return 0;
    }
    if (*cex) {
      ExperimentConfig cfg;
      cfg.name = "counterexample-report";
      cfg.algorithm = Algorithm::CounterexampleReport;
      cfg.environment = env;
      cfg.seeds = {0};
      const auto out = run_experiment(cfg, fs::temp_directory_path() / "kinlab-cex");
      std::cout << out.summary.dump(2) << "\n";
      return out.ok ? 0 : 1;
    }
    if (*eval) {
      const auto mdp = make_environment(env);
      auto j = read_json(policy_path);
      if (j.contains("policy")) j = j["policy"];
      const auto pol = NonstationaryPolicy::from_json(j);
      const BlockMdpEnvironment e(mdp);
      const double v = estimate_value(e, pol, PsdpReward::environment(), mdp->horizon(), episodes, seed);
      nlohmann::json out{{"monte_carlo", v},
                         {"episodes", episodes},
                         {"hoeffding_half_width", hoeffding_half_width(static_cast<double>(episodes), 1e-3)}};
      try {
        const ValueEstimate ex = value_of(*mdp, pol, ExternalReward{}, {episodes, seed, 1e-3});
        if (ex.exact) out["exact"] = ex.value;
      } catch (const UnsupportedOperation&) {
      }
      std::cout << out.dump(2) << "\n";
      return 0;
    }
    if (*trace) {
      const auto r = load_run(run_dir, run_seed);
      std::vector<NonstationaryPolicy> pols;
      for (const auto& c : covers_of(r.result))
        for (const auto& p : c.policies) pols.push_back(p);
      pols.push_back(NonstationaryPolicy::from_json(r.result.at("policy")));
      const auto tr = visitation_trace(*r.mdp, pols, episodes, seed);
      const auto w = tr.weights();
      std::cout << "h,state,count,weight\n";
      for (std::size_t h = 0; h < tr.counts.size(); ++h)
        for (std::size_t s = 0; s < tr.counts[h].size(); ++s)
          std::cout << h + 1 << "," << r.mdp->name(r.mdp->state_at(static_cast<int>(h) + 1, static_cast<int>(s)))
                    << "," << tr.counts[h][s] << "," << w[h][s] << "\n";
      return 0;
    }
    if (*rec) {
      const auto r = load_run(run_dir, run_seed);
      const BlockMdpEnvironment e(r.mdp);
      const auto fwd = abstraction_from_json(r.result.at("forward"));
      const auto bwd = abstraction_from_json(r.result.at("backward"));
      std::cout << recover_dynamics(e, covers_of(r.result), fwd, bwd, per_step, seed).to_json().dump(2) << "\n";
      return 0;
    }
    if (*theory) {
      std::cout << theory_sample_sizes(N, H, A, eta, eps, delta, pi, phi).to_json().dump(2) << "\n";
      return 0;
    }
    if (*info) {
      const auto spec = combolock_spec(env.horizon, env.actions, seed);
      std::cout << spec.to_json().dump(2) << "\n";
      return 0;
    }
  } catch (const SchemaError& e) {
    std::cerr << "config error " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
