#pragma once

#include <functional>
#include <nlohmann/json.hpp>
#include <vector>

#include "kinlab/explorers/abstraction.hpp"
#include "kinlab/psdp/psdp.hpp"

namespace kinlab {

using MetricsSink = std::function<void(const nlohmann::json&)>;

struct InternalOptRecord {
  int block = 0;
  bool gps_tried = false;
  bool gps_accepted = false;
  double gps_value = 0.0;
  bool psdp_run = false;
  std::uint64_t episodes = 0;

  nlohmann::json to_json() const;
};

struct IterationRecord {
  int h = 0;
  std::size_t reg_examples = 0;
  nlohmann::json backward_report;
  nlohmann::json forward_report;
  bool degenerate = false;  // learned phi_B constant on the real transitions
  std::vector<InternalOptRecord> optimizations;
  std::uint64_t episodes_total = 0;  // cumulative after this iteration

  nlohmann::json to_json() const;
};

struct ExplorationResult {
  std::vector<PolicyCover> covers;  // covers[h-1] = Psi_h
  NonstationaryPolicy policy;
  Abstraction backward;
  Abstraction forward;
  std::vector<IterationRecord> iterations;
  std::vector<PsdpLevelRecord> final_levels;
  std::uint64_t episodes = 0;
  bool degenerate = false;

  nlohmann::json to_json() const;
};

struct ExpOracleConfig {
  PsdpConfig psdp{};
  double eta = 0.5;
  double epsilon = 0.1;
  double delta = 0.1;
  std::uint64_t seed = 0;
  MetricsSink on_metrics;
};

// Policy covers from oracle access to a backward abstraction, then reward
// sensitive PSDP.
ExplorationResult exp_oracle(const Environment& env, const Abstraction& phi, const ExpOracleConfig& cfg);

struct HomerConfig {
  int N = 2;
  int M = 3;
  std::size_t n_reg = 10000;  // real transitions per step
  PsdpConfig psdp{};
  RegConfig reg = GumbelNetConfig{};
  bool learn_forward = true;
  bool use_gps = true;
  GpsConfig gps{};
  bool resample_imposters = true;  // false: two independent rollouts and a fair coin per example
  bool recycle_second = false;     // literal mode only: keep (x2, a2, x2') as an extra real example
  double eta = 0.5;
  double epsilon = 0.1;
  double delta = 0.1;
  std::uint64_t seed = 0;
  MetricsSink on_metrics;
};

// Contrastive dataset of step h (h >= 2) under roll-in Unf(Psi_{h-1}) and a
// uniform action at h-1.
std::vector<ContrastiveExample> collect_contrastive(const Environment& env, const PolicyCover& rollin, int h,
                                                    std::size_t n, bool resample, bool recycle,
                                                    std::uint64_t seed);

ExplorationResult homer(const Environment& env, const HomerConfig& cfg);

}  // namespace kinlab
