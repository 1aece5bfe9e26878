#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "kinlab/block_mdp/mdp.hpp"
#include "kinlab/explorers/explorers.hpp"

namespace kinlab {

enum class Algorithm { Homer, ExpOracle, Psdp, KiAnalyze, Canonicalize, CounterexampleReport };

std::string to_string(Algorithm a);
Algorithm parse_algorithm(const std::string& s);

// Environment selector.  kind is one of combolock, fig1, counterexample,
// random, file; the remaining fields are read according to kind.
struct EnvironmentConfig {
  std::string kind = "combolock";
  int horizon = 6;
  int actions = 3;
  std::uint64_t seed = 0;        // combolock vectors / random MDP draw
  bool discrete = false;         // combolock discrete-emission twin
  std::string variant = "right"; // fig1
  std::string counterexample = "fig4a";
  std::string path;              // file
};

// Defaults follow the HOMER hyperparameter table.
struct Hyperparameters {
  int N = 2;
  int M = 3;
  std::size_t n_reg = 10000;
  std::size_t n_psdp = 20000;
  double learning_rate = 1e-3;
  int batch = 32;
  int hidden = 56;
  double temperature = 1.0;
  int reg_epochs = 200;
  int cb_epochs = 50;
  double validation_fraction = 0.2;
  int patience = 20;
  int pretrain_epochs = 10;
  int restarts = 1;
  std::string optimizer = "sgd_momentum";
  std::string reg_backend = "sgd_gumbel";  // or exact_erm
  std::string cb_class = "linear";         // or tabular
  bool gps = true;
  double gps_epsilon = 0.1;
  std::size_t gps_episodes = 2000;
  bool resample_imposters = true;
  bool recycle = false;
  bool learn_forward = true;
  double eta = 0.5;
  double epsilon = 0.1;
  double delta = 0.1;
};

struct EvaluationConfig {
  std::size_t episodes = 20000;
  std::size_t decode_samples = 1000;
  bool recover_dynamics = false;
  std::size_t dynamics_samples = 20000;
  std::uint64_t dynamics_min_count = 200;
  std::size_t trace_episodes = 0;
};

struct ExperimentConfig {
  std::string name = "experiment";
  Algorithm algorithm = Algorithm::Homer;
  EnvironmentConfig environment;
  Hyperparameters hyper;
  EvaluationConfig evaluation;
  std::vector<std::uint64_t> seeds{0};
  std::string output_dir;  // empty: $KINLAB_OUTPUT_ROOT or ./runs
  int workers = 0;         // 0: hardware concurrency

  nlohmann::json to_json() const;
  // Unknown keys and type mismatches raise SchemaError with the field path.
  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig load(const std::string& path);
};

std::shared_ptr<const LatentBlockMDP> make_environment(const EnvironmentConfig& env);

HomerConfig homer_config(const Hyperparameters& hp, std::uint64_t seed);
PsdpConfig psdp_config(const Hyperparameters& hp, std::uint64_t seed);

std::filesystem::path default_output_root();

}  // namespace kinlab
