#include "kinlab/kinematics/partition.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "kinlab/common/errors.hpp"

namespace kinlab {

namespace {

class UnionFind {
 public:
  explicit UnionFind(int n) : parent_(static_cast<std::size_t>(n)) { std::iota(parent_.begin(), parent_.end(), 0); }
  int find(int x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<int> parent_;
};

KIPartition from_union_find(const LatentBlockMDP& mdp, int h, KIKind kind, double tol, UnionFind& uf,
                            std::vector<StateId> unreachable) {
  KIPartition p;
  p.timestep = h;
  p.kind = kind;
  p.tolerance = tol;
  p.unreachable = std::move(unreachable);
  std::map<int, std::vector<StateId>> groups;
  for (int j = 0; j < mdp.num_states_at(h); ++j) groups[uf.find(j)].push_back(mdp.state_at(h, j));
  for (auto& [root, members] : groups) p.blocks.push_back(std::move(members));
  std::sort(p.blocks.begin(), p.blocks.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return p;
}

void check_step(const LatentBlockMDP& mdp, int h) {
  if (h < 1 || h > mdp.horizon()) throw ConfigurationError("timestep " + std::to_string(h) + " out of range");
}

}  // namespace

std::string to_string(KIKind kind) {
  switch (kind) {
    case KIKind::Forward:
      return "forward";
    case KIKind::Backward:
      return "backward";
    case KIKind::Full:
      return "full";
  }
  return "?";
}

int KIPartition::block_of(StateId s) const {
  for (std::size_t b = 0; b < blocks.size(); ++b)
    if (std::find(blocks[b].begin(), blocks[b].end(), s) != blocks[b].end()) return static_cast<int>(b);
  return -1;
}

nlohmann::json KIPartition::to_json(const LatentBlockMDP& mdp) const {
  nlohmann::json b = nlohmann::json::array();
  for (const auto& block : blocks) {
    nlohmann::json names = nlohmann::json::array();
    for (StateId s : block) names.push_back(mdp.name(s));
    b.push_back(names);
  }
  nlohmann::json u = nlohmann::json::array();
  for (StateId s : unreachable) u.push_back(mdp.name(s));
  return {{"timestep", timestep}, {"kind", to_string(kind)}, {"tolerance", tolerance}, {"blocks", b}, {"unreachable", u}};
}

KIPartition forward_ki_partition(const LatentBlockMDP& mdp, int h, double tol) {
  check_step(mdp, h);
  const int n = mdp.num_states_at(h);
  UnionFind uf(n);
  if (h == mdp.horizon()) {
    for (int j = 1; j < n; ++j) uf.unite(0, j);
    return from_union_find(mdp, h, KIKind::Forward, tol, uf, {});
  }
  auto same_rows = [&](StateId s1, StateId s2) {
    for (Action a = 0; a < mdp.num_actions(); ++a) {
      const auto& r1 = mdp.transition(s1, a);
      const auto& r2 = mdp.transition(s2, a);
      for (std::size_t k = 0; k < r1.size(); ++k)
        if (std::abs(r1[k] - r2[k]) > tol) return false;
    }
    return true;
  };
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (same_rows(mdp.state_at(h, i), mdp.state_at(h, j))) uf.unite(i, j);
  return from_union_find(mdp, h, KIKind::Forward, tol, uf, {});
}

KIPartition backward_ki_partition(const LatentBlockMDP& mdp, int h, double tol) {
  check_step(mdp, h);
  const int n = mdp.num_states_at(h);
  UnionFind uf(n);
  std::vector<StateId> unreachable;
  if (h == 1) {
    int first = -1;
    for (int j = 0; j < n; ++j) {
      if (mdp.start()[j] <= 0.0) {
        unreachable.push_back(mdp.state_at(1, j));
        continue;
      }
      if (first < 0) first = j;
      else uf.unite(first, j);
    }
    return from_union_find(mdp, h, KIKind::Backward, tol, uf, unreachable);
  }
  // inflow[j] over (previous state, action) pairs.
  const auto prev = mdp.states_at(h - 1);
  const int K = mdp.num_actions();
  std::vector<std::vector<double>> inflow(static_cast<std::size_t>(n));
  std::vector<double> total(static_cast<std::size_t>(n), 0.0);
  for (int j = 0; j < n; ++j) {
    for (StateId x : prev)
      for (Action a = 0; a < K; ++a) {
        const double t = mdp.transition(x, a)[j];
        inflow[j].push_back(t);
        total[j] += t;
      }
    if (total[j] <= 0.0) unreachable.push_back(mdp.state_at(h, j));
  }
  auto proportional = [&](int i, int j) {
    const double ci = total[i], cj = total[j];
    const double scale = std::max(ci, cj);
    for (std::size_t k = 0; k < inflow[i].size(); ++k)
      if (std::abs(inflow[i][k] * cj - inflow[j][k] * ci) > tol * scale) return false;
    return true;
  };
  for (int i = 0; i < n; ++i) {
    if (total[i] <= 0.0) continue;
    for (int j = i + 1; j < n; ++j)
      if (total[j] > 0.0 && proportional(i, j)) uf.unite(i, j);
  }
  return from_union_find(mdp, h, KIKind::Backward, tol, uf, unreachable);
}

KIPartition ki_partition(const LatentBlockMDP& mdp, int h, double tol) {
  const auto f = forward_ki_partition(mdp, h, tol);
  const auto b = backward_ki_partition(mdp, h, tol);
  const int n = mdp.num_states_at(h);
  UnionFind uf(n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const StateId si = mdp.state_at(h, i), sj = mdp.state_at(h, j);
      if (f.block_of(si) == f.block_of(sj) && b.block_of(si) == b.block_of(sj)) uf.unite(i, j);
    }
  return from_union_find(mdp, h, KIKind::Full, tol, uf, b.unreachable);
}

KIPartition partition_of_kind(const LatentBlockMDP& mdp, int h, KIKind kind, double tol) {
  switch (kind) {
    case KIKind::Forward:
      return forward_ki_partition(mdp, h, tol);
    case KIKind::Backward:
      return backward_ki_partition(mdp, h, tol);
    case KIKind::Full:
      return ki_partition(mdp, h, tol);
  }
  throw ConfigurationError("unknown partition kind");
}

nlohmann::json ki_report(const LatentBlockMDP& mdp, double tol) {
  nlohmann::json steps = nlohmann::json::array();
  for (int h = 1; h <= mdp.horizon(); ++h) {
    const auto f = forward_ki_partition(mdp, h, tol);
    const auto b = backward_ki_partition(mdp, h, tol);
    const auto k = ki_partition(mdp, h, tol);
    steps.push_back({{"timestep", h},
                     {"num_states", mdp.num_states_at(h)},
                     {"N_FD", f.size()},
                     {"N_BD", b.size()},
                     {"N_KD", k.size()},
                     {"forward", f.to_json(mdp)["blocks"]},
                     {"backward", b.to_json(mdp)["blocks"]},
                     {"full", k.to_json(mdp)["blocks"]},
                     {"unreachable", b.to_json(mdp)["unreachable"]}});
  }
  return {{"tolerance", tol}, {"steps", steps}};
}

}  // namespace kinlab
