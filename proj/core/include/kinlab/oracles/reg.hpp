#pragma once

#include <cstdint>
#include <memory>
#include <nlohmann/json.hpp>
#include <variant>
#include <vector>

#include "kinlab/block_mdp/observation.hpp"
#include "kinlab/oracles/optim.hpp"

namespace kinlab {

// A labeled (x, a, x') triple; y = 1 for a real transition, 0 for an
// imposter.  `weight` lets a dataset carry exact population masses.
struct ContrastiveExample {
  Observation x;
  Action a = 0;
  Observation next;
  double y = 0.0;
  double weight = 1.0;
};

enum class RegBackend { ExactErm, SgdGumbel };
enum class RegLoss { Square, CrossEntropy };

// Which inputs pass through a categorical bottleneck.  Backward models
// quantize x', forward models quantize x, joint models quantize both.
enum class BottleneckMode { Backward, Forward, Joint };

std::string to_string(RegLoss loss);
std::string to_string(BottleneckMode mode);
RegLoss parse_reg_loss(const std::string& s);
BottleneckMode parse_bottleneck_mode(const std::string& s);

// f(x, a, x') = w(phi_F(x), a, phi_B(x')) when both sides are quantized.
class BottleneckRegressor {
 public:
  virtual ~BottleneckRegressor() = default;
  virtual RegBackend backend() const = 0;
  virtual int forward_capacity() const = 0;   // M, or 0 when x is not quantized
  virtual int backward_capacity() const = 0;  // N, or 0 when x' is not quantized
  virtual int phi_forward(const Observation& x) const = 0;
  virtual int phi_backward(const Observation& next) const = 0;
  virtual double predict(const Observation& x, Action a, const Observation& next) const = 0;
  virtual nlohmann::json to_json() const = 0;
};

// Finite abstraction class over discrete observation ids; maps[k][id].
struct PhiClass {
  int capacity = 1;
  std::vector<std::vector<int>> maps;
};

// Every map from `ids` into [capacity] (other ids map to 0).  Refuses past
// `budget` maps.
PhiClass all_maps(const std::vector<ObsId>& ids, int capacity, double budget = 1e6);

struct ExactRegConfig {
  PhiClass forward;
  PhiClass backward;
};

struct GumbelNetConfig {
  BottleneckMode mode = BottleneckMode::Backward;
  int hidden = 56;
  double temperature = 1.0;
  double leaky_slope = 0.01;
  RegLoss loss = RegLoss::CrossEntropy;
  OptimizerConfig optimizer{};
  int batch = 32;
  int max_epochs = 200;
  int patience = 20;
  double validation_fraction = 0.2;
  int pretrain_epochs = 10;  // epochs on the linear logits, no discretization; 0 disables
  int restarts = 1;          // independent initializations; the best validation loss wins
  std::uint64_t seed = 0;
};

using RegConfig = std::variant<ExactRegConfig, GumbelNetConfig>;

struct TrainReport {
  std::vector<double> train_loss;
  std::vector<double> validation_loss;
  int chosen_epoch = -1;
  int chosen_restart = 0;
  std::vector<double> restart_losses;
  std::size_t n_train = 0;
  std::size_t n_validation = 0;
  double best_validation_loss = 0.0;
  double baseline_loss = 0.0;  // loss of the constant label-mean predictor
  double delta_reg = 0.0;
  std::string loss_name;

  nlohmann::json to_json() const;
};

struct RegFit {
  std::shared_ptr<const BottleneckRegressor> model;
  TrainReport report;
};

// N: backward capacity, M: forward capacity.  The exact backend needs
// discrete observations; the gradient backend takes either kind.
RegFit reg_fit(const std::vector<ContrastiveExample>& data, int N, int M, const RegConfig& config);

// Rebuilds a model from its to_json() document.
std::shared_ptr<const BottleneckRegressor> regressor_from_json(const nlohmann::json& j);

// 16 (ln|Phi_N| + N^2 |A| ln n + ln(2/delta)) / n
double delta_reg(double n, double log_phi_size, int N, int num_actions, double delta);

}  // namespace kinlab
