#pragma once

// Evaluation helpers that look at latent states.  None of these are used by
// the learners themselves.

#include <functional>
#include <map>
#include <nlohmann/json.hpp>
#include <tuple>
#include <vector>

#include "kinlab/explorers/recovery.hpp"
#include "kinlab/kinematics/canonical.hpp"

namespace kinlab {

// confusion[code][block]
struct PartitionMatch {
  double accuracy = 0.0;
  std::vector<int> assignment;  // code -> block, -1 when unmatched
  std::vector<std::vector<std::size_t>> confusion;
  std::size_t total = 0;

  nlohmann::json to_json() const;
};

// Maximum-weight one-to-one matching of codes to blocks by exhaustive search.
PartitionMatch match_partition(const std::vector<std::vector<std::size_t>>& confusion);

// Observations of step h drawn by picking a reachable state uniformly and
// following its homing policy.
std::vector<Observation> sample_step_observations(const LatentBlockMDP& mdp, int h, std::size_t n,
                                                  std::uint64_t seed);

StateId latent_of(const Observation& x);

PartitionMatch decode_match(const LatentBlockMDP& mdp, const Decoder& decoder, const KIPartition& truth,
                            std::size_t n, std::uint64_t seed);

// Majority block per code; -1 for codes never seen.
std::vector<int> majority_blocks(const std::vector<Observation>& xs, const std::function<int(const Observation&)>& code,
                                 int num_codes, const std::function<int(StateId)>& block_of);

struct DynamicsTvReport {
  double max_tv = 0.0;
  std::size_t rows_checked = 0;
  std::uint64_t min_count = 0;
  nlohmann::json rows = nlohmann::json::array();

  nlohmann::json to_json() const;
};

// Compares populated rows of recovered dynamics with the canonical latent
// dynamics after mapping each code to its majority canonical state.
// `sampler` supplies the observations used for the mapping.
DynamicsTvReport canonical_dynamics_tv(const AbstractDynamics& dyn, const Abstraction& forward,
                                       const Abstraction& backward, const LatentBlockMDP& sampler,
                                       const CanonicalForm& canonical, std::uint64_t min_count,
                                       std::size_t samples_per_step, std::uint64_t seed);

// Exact roll-in marginal rho_h over the local states of step h (h >= 2):
// Unf(Psi_{h-1}), then a uniform action.
std::vector<double> rollin_marginal(const LatentBlockMDP& mdp, const PolicyCover& cover_prev, int h);

struct CoverCertificate {
  int h = 1;
  std::vector<double> best_visit;  // max over the cover, per local state
  std::vector<double> eta;
  double alpha = 1.0;              // min ratio over reachable states

  nlohmann::json to_json() const;
};

CoverCertificate cover_certificate(const LatentBlockMDP& mdp, const PolicyCover& cover);

// Monte-Carlo analogue: per local state of the cover's step, the best
// frequency over members.
std::vector<double> cover_visitation_mc(const LatentBlockMDP& mdp, const PolicyCover& cover, std::size_t episodes,
                                        std::uint64_t seed);

// Exact population of the step-h contrastive problem on a discrete
// emission: real triples carry mass P(x, a, x') / 2 and imposters
// P(x, a) rho(x') / 2.
struct PopulationContrastive {
  std::vector<ContrastiveExample> examples;
  std::map<std::tuple<ObsId, Action, ObsId>, double> f_star;  // T / (T + rho)
  std::map<std::tuple<ObsId, Action, ObsId>, double> mass;    // P(x, a) (T + rho) / 2
};

PopulationContrastive population_contrastive(const LatentBlockMDP& mdp, const PolicyCover& cover_prev, int h);

struct VisitationTrace {
  std::vector<std::vector<std::uint64_t>> counts;  // [h-1][local state]
  std::size_t episodes = 0;

  std::vector<std::vector<double>> weights() const;  // ln(count + 1)
  nlohmann::json to_json(const LatentBlockMDP& mdp) const;
};

// Each episode follows a uniformly chosen policy from `policies`, padded with
// uniform actions to the full horizon.
VisitationTrace visitation_trace(const LatentBlockMDP& mdp, const std::vector<NonstationaryPolicy>& policies,
                                 std::size_t n, std::uint64_t seed);

}  // namespace kinlab
