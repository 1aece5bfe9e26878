#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "kinlab/block_mdp/policy.hpp"
#include "kinlab/oracles/optim.hpp"

namespace kinlab {

// Logged bandit interaction: context, action, logging probability, reward.
struct CBExample {
  Observation x;
  Action a = 0;
  double p = 1.0;
  double r = 0.0;
};

// Every map from discrete observation ids to actions.  The importance
// weighted objective decomposes over ids, so the argmax is exact.
struct TabularClass {};

// An explicit list of candidate deciders.
struct EnumeratedClass {
  std::vector<DeciderPtr> members;
  double budget = 1e5;
};

// Greedy policies of a linear reward model Q(x, .) = W x + b fitted by
// square loss on the logged action.
struct LinearClass {
  int epochs = 50;
  int batch = 32;
  OptimizerConfig optimizer{};
  double init_scale = 0.01;
  std::uint64_t seed = 0;
};

using PolicyClass = std::variant<TabularClass, EnumeratedClass, LinearClass>;

struct CbResult {
  DeciderPtr policy;
  double objective = 0.0;  // importance-weighted value on the dataset
  long member_index = -1;  // EnumeratedClass only
};

// (1/n) sum_i r_i pi(a_i | x_i) / p_i
double iw_objective(const std::vector<CBExample>& data, const StepDecider& pi);

// Throws ConfigurationError on an empty dataset or a non-positive logging
// probability; EnumerationBudgetExceeded for oversized explicit classes;
// UnsupportedOperation for a tabular class over vector observations.
CbResult cb_optimize(const std::vector<CBExample>& data, int num_actions, const PolicyClass& cls);

// Uniform-deviation width for the importance-weighted estimator under
// uniform logging: 4 sqrt(|A| ln(2 |Pi| / delta) / n).
double delta_csc(double n, int num_actions, double class_size, double delta);

}  // namespace kinlab
