#include "kinlab/kinematics/policy_ratio.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "kinlab/block_mdp/dynamics.hpp"
#include "kinlab/common/errors.hpp"
#include "kinlab/common/parallel.hpp"

namespace kinlab {

namespace {

double cross(const std::pair<double, double>& o, const std::pair<double, double>& a,
             const std::pair<double, double>& b) {
  return (a.first - o.first) * (b.second - o.second) - (a.second - o.second) * (b.first - o.first);
}

}  // namespace

VisitationSet enumerate_visitations(const LatentBlockMDP& mdp, int h, double budget) {
  if (h < 1 || h > mdp.horizon()) throw ConfigurationError("timestep out of range");
  const int K = mdp.num_actions();
  VisitationSet out;
  for (int t = 1; t < h; ++t) out.policy_count *= std::pow(static_cast<double>(K), mdp.num_states_at(t));
  if (out.policy_count > budget)
    throw EnumerationBudgetExceeded("deterministic latent policy enumeration", out.policy_count, budget);

  std::vector<std::vector<double>> level{mdp.start()};
  for (int t = 1; t < h; ++t) {
    const int n = mdp.num_states_at(t);
    std::vector<std::vector<std::vector<double>>> expanded(level.size());
    parallel_for(level.size(), [&](std::size_t i) {
      const auto& dist = level[i];
      // Only states with mass influence the next distribution.
      std::vector<int> live;
      for (int j = 0; j < n; ++j)
        if (dist[j] > 0.0) live.push_back(j);
      std::vector<int> choice(live.size(), 0);
      std::set<std::vector<double>> seen;
      for (;;) {
        std::vector<std::vector<double>> probs(static_cast<std::size_t>(n), std::vector<double>(K, 0.0));
        for (int j = 0; j < n; ++j) probs[j][0] = 1.0;
        for (std::size_t k = 0; k < live.size(); ++k) {
          probs[live[k]][0] = 0.0;
          probs[live[k]][choice[k]] = 1.0;
        }
        seen.insert(propagate(mdp, t, dist, probs));
        std::size_t k = 0;
        for (; k < choice.size(); ++k) {
          if (++choice[k] < K) break;
          choice[k] = 0;
        }
        if (k == choice.size()) break;
      }
      expanded[i].assign(seen.begin(), seen.end());
    });
    std::set<std::vector<double>> merged;
    for (auto& e : expanded) merged.insert(e.begin(), e.end());
    level.assign(merged.begin(), merged.end());
  }
  out.vectors = std::move(level);
  return out;
}

double max_abs_cross(std::vector<std::pair<double, double>> pts) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  std::vector<std::pair<double, double>> hull;
  if (pts.size() <= 2) {
    hull = pts;
  } else {
    std::vector<std::pair<double, double>> h(2 * pts.size());
    std::size_t k = 0;
    for (const auto& p : pts) {
      while (k >= 2 && cross(h[k - 2], h[k - 1], p) <= 0) --k;
      h[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, lo = k + 1; i-- > 0;) {
      while (k >= lo && cross(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
      h[k++] = pts[i];
    }
    h.resize(k - 1);
    hull = std::move(h);
  }
  double best = 0.0;
  for (const auto& u : hull)
    for (const auto& v : hull) best = std::max(best, std::abs(u.first * v.second - u.second * v.first));
  return best;
}

PolicyRatioReport check_policy_ratio(const LatentBlockMDP& mdp, const KIPartition& partition, double budget) {
  PolicyRatioReport rep;
  const int h = partition.timestep;
  const auto vs = enumerate_visitations(mdp, h, budget);
  rep.policy_count = vs.policy_count;
  rep.distinct_visitations = vs.vectors.size();
  for (const auto& block : partition.blocks)
    for (std::size_t i = 0; i < block.size(); ++i)
      for (std::size_t j = i + 1; j < block.size(); ++j) {
        const int li = mdp.local_index(block[i]), lj = mdp.local_index(block[j]);
        std::vector<std::pair<double, double>> pts;
        pts.reserve(vs.vectors.size());
        for (const auto& v : vs.vectors) pts.emplace_back(v[li], v[lj]);
        rep.max_deviation = std::max(rep.max_deviation, max_abs_cross(std::move(pts)));
        ++rep.pairs_checked;
      }
  return rep;
}

}  // namespace kinlab
