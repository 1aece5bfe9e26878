#pragma once

#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "kinlab/block_mdp/mdp.hpp"

namespace kinlab {

enum class KIKind { Forward, Backward, Full };

std::string to_string(KIKind kind);

// Blocks of one timestep, each sorted, ordered by smallest member.
struct KIPartition {
  int timestep = 1;
  KIKind kind = KIKind::Full;
  double tolerance = 1e-9;
  std::vector<std::vector<StateId>> blocks;
  std::vector<StateId> unreachable;  // zero-inflow states, kept as singletons

  std::size_t size() const { return blocks.size(); }
  // Block index of s, or -1 when s is not at this step.
  int block_of(StateId s) const;
  nlohmann::json to_json(const LatentBlockMDP& mdp) const;
};

inline constexpr double kDefaultKITolerance = 1e-9;

// Forward: equal transition rows for every action.  The last step is one
// block.
KIPartition forward_ki_partition(const LatentBlockMDP& mdp, int h, double tol = kDefaultKITolerance);
// Backward: proportional inflow vectors over (previous state, action).  The
// first step is one block (states with zero start mass excepted).
KIPartition backward_ki_partition(const LatentBlockMDP& mdp, int h, double tol = kDefaultKITolerance);
// Common refinement of the two.
KIPartition ki_partition(const LatentBlockMDP& mdp, int h, double tol = kDefaultKITolerance);

KIPartition partition_of_kind(const LatentBlockMDP& mdp, int h, KIKind kind, double tol = kDefaultKITolerance);

// Per-step N_FD, N_BD, N_KD and full blocks with state names.
nlohmann::json ki_report(const LatentBlockMDP& mdp, double tol = kDefaultKITolerance);

}  // namespace kinlab
