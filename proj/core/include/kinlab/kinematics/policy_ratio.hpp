#pragma once

#include <vector>

#include "kinlab/kinematics/partition.hpp"

namespace kinlab {

inline constexpr double kDefaultPolicyBudget = 1e6;

// Distinct visitation vectors over S_h (local indices) induced by the
// deterministic latent policies acting on steps 1..h-1.  The policy count is
// |A|^(|S_1| + ... + |S_{h-1}|); past `budget` this throws
// EnumerationBudgetExceeded carrying the count.
struct VisitationSet {
  std::vector<std::vector<double>> vectors;
  double policy_count = 1.0;
};

VisitationSet enumerate_visitations(const LatentBlockMDP& mdp, int h, double budget = kDefaultPolicyBudget);

struct PolicyRatioReport {
  double max_deviation = 0.0;
  double policy_count = 0.0;
  std::size_t distinct_visitations = 0;
  std::size_t pairs_checked = 0;
};

// max |P1(s1) P2(s2) - P1(s2) P2(s1)| over same-block pairs (s1, s2) and all
// pairs of enumerated policies.
PolicyRatioReport check_policy_ratio(const LatentBlockMDP& mdp, const KIPartition& partition,
                                     double budget = kDefaultPolicyBudget);

// max |u x v| over a finite point set, via its convex hull.
double max_abs_cross(std::vector<std::pair<double, double>> points);

}  // namespace kinlab
