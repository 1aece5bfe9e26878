#include "kinlab/explorers/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "kinlab/block_mdp/latent_access.hpp"
#include "kinlab/common/errors.hpp"
#include "kinlab/common/parallel.hpp"

namespace kinlab {

namespace {

std::shared_ptr<const LatentBlockMDP> borrow(const LatentBlockMDP& mdp) {
  return {&mdp, [](const LatentBlockMDP*) {}};
}

NonstationaryPolicy pad_uniform(const NonstationaryPolicy& p, int K, int length) {
  NonstationaryPolicy out = p.prefix(std::min(p.length(), length));
  const auto u = std::make_shared<UniformDecider>(K);
  while (out.length() < length) out = out.then(u);
  return out;
}

// Distribution over the local states of step t under Unf(cover).
std::vector<double> cover_distribution(const LatentBlockMDP& mdp, const PolicyCover& cover, int t) {
  std::vector<double> d(static_cast<std::size_t>(mdp.num_states_at(t)), 0.0);
  if (cover.policies.empty()) {
    if (t != 1) throw ConfigurationError("empty cover beyond the first step");
    return mdp.start();
  }
  for (const auto& p : cover.policies) {
    const auto v = exact_visitation(mdp, p.prefix(std::min(p.length(), t - 1)));
    for (int j = 0; j < mdp.num_states_at(t); ++j) d[j] += v[mdp.state_at(t, j)];
  }
  for (double& x : d) x /= static_cast<double>(cover.policies.size());
  return d;
}

struct MatchSearch {
  const std::vector<std::vector<std::size_t>>& conf;
  std::size_t blocks;
  std::vector<int> cur, best;
  std::size_t best_score = 0;
  bool found = false;

  void run(std::size_t code, std::vector<bool>& used, std::size_t score) {
    if (code == conf.size()) {
      if (!found || score > best_score) {
        found = true;
        best_score = score;
        best = cur;
      }
      return;
    }
    cur[code] = -1;
    run(code + 1, used, score);
    for (std::size_t b = 0; b < blocks; ++b) {
      if (used[b]) continue;
      used[b] = true;
      cur[code] = static_cast<int>(b);
      run(code + 1, used, score + conf[code][b]);
      used[b] = false;
    }
    cur[code] = -1;
  }
};

}  // namespace

StateId latent_of(const Observation& x) { return LatentAccess::latent(x); }

nlohmann::json PartitionMatch::to_json() const {
  return {{"accuracy", accuracy}, {"assignment", assignment}, {"confusion", confusion}, {"total", total}};
}

PartitionMatch match_partition(const std::vector<std::vector<std::size_t>>& confusion) {
  PartitionMatch m;
  m.confusion = confusion;
  std::size_t blocks = 0;
  for (const auto& row : confusion) {
    blocks = std::max(blocks, row.size());
    for (auto c : row) m.total += c;
  }
  if (confusion.size() > 12 || blocks > 12) throw UnsupportedOperation("partition matching is limited to 12 labels");
  std::vector<std::vector<std::size_t>> padded = confusion;
  for (auto& row : padded) row.resize(blocks, 0);
  MatchSearch s{padded, blocks, std::vector<int>(padded.size(), -1), {}, 0, false};
  std::vector<bool> used(blocks, false);
  s.run(0, used, 0);
  m.assignment = s.best;
  m.accuracy = m.total ? static_cast<double>(s.best_score) / static_cast<double>(m.total) : 1.0;
  return m;
}

std::vector<Observation> sample_step_observations(const LatentBlockMDP& mdp, int h, std::size_t n,
                                                  std::uint64_t seed) {
  const EtaResult eta = eta_exact(mdp);
  std::vector<StateId> reach;
  for (StateId s : mdp.states_at(h))
    if (eta.reachable[s]) reach.push_back(s);
  if (reach.empty()) throw ConfigurationError("no reachable state at the requested step");
  const BlockMdpEnvironment env(borrow(mdp));
  std::vector<Observation> out(n);
  parallel_for(n, [&](std::size_t k) {
    Rng rng = make_rng(seed, {static_cast<std::uint64_t>(h), k});
    const StateId s = reach[static_cast<std::size_t>(uniform_int(rng, static_cast<int>(reach.size())))];
    Episode ep = env.run(eta.homing[s], h - 1, rng);
    out[k] = std::move(ep.observations[h - 1]);
  });
  return out;
}

PartitionMatch decode_match(const LatentBlockMDP& mdp, const Decoder& decoder, const KIPartition& truth,
                            std::size_t n, std::uint64_t seed) {
  const auto xs = sample_step_observations(mdp, truth.timestep, n, seed);
  std::vector<std::vector<std::size_t>> conf(static_cast<std::size_t>(decoder.capacity()),
                                             std::vector<std::size_t>(truth.size(), 0));
  for (const auto& x : xs) ++conf[decoder.decode(x)][truth.block_of(latent_of(x))];
  return match_partition(conf);
}

std::vector<int> majority_blocks(const std::vector<Observation>& xs, const std::function<int(const Observation&)>& code,
                                 int num_codes, const std::function<int(StateId)>& block_of) {
  std::vector<std::map<int, std::size_t>> votes(static_cast<std::size_t>(num_codes));
  for (const auto& x : xs) ++votes[code(x)][block_of(latent_of(x))];
  std::vector<int> out(static_cast<std::size_t>(num_codes), -1);
  for (int c = 0; c < num_codes; ++c) {
    std::size_t best = 0;
    for (const auto& [b, v] : votes[c])
      if (v > best) {
        best = v;
        out[c] = b;
      }
  }
  return out;
}

nlohmann::json DynamicsTvReport::to_json() const {
  return {{"max_tv", max_tv}, {"rows_checked", rows_checked}, {"min_count", min_count}, {"rows", rows}};
}

DynamicsTvReport canonical_dynamics_tv(const AbstractDynamics& dyn, const Abstraction& forward,
                                       const Abstraction& backward, const LatentBlockMDP& sampler,
                                       const CanonicalForm& canonical, std::uint64_t min_count,
                                       std::size_t samples_per_step, std::uint64_t seed) {
  const LatentBlockMDP& cm = *canonical.mdp;
  auto block_of = [&](StateId s) { return cm.local_index(canonical.mapping[s]); };
  auto code = [&](const Observation& x) { return combined_code(forward, backward, x); };
  const int H = sampler.horizon();
  std::vector<std::vector<int>> maps(static_cast<std::size_t>(H) + 1);
  for (int h = 1; h <= H; ++h)
    maps[h] = majority_blocks(sample_step_observations(sampler, h, samples_per_step, derive_seed(seed, {static_cast<std::uint64_t>(h)})),
                              code, combined_capacity(forward, backward, h), block_of);

  DynamicsTvReport rep;
  rep.min_count = min_count;
  for (const auto& t : dyn.steps) {
    const auto& from = maps[t.h];
    const auto& to = maps[t.h + 1];
    for (int i = 0; i < t.from_codes; ++i) {
      if (from[i] < 0) continue;
      for (Action a = 0; a < t.num_actions; ++a) {
        const auto n = t.row_count(i, a);
        if (n < min_count) continue;
        const auto r = t.row(i, a);
        std::vector<double> est(static_cast<std::size_t>(cm.num_states_at(t.h + 1)), 0.0);
        double unmapped = 0.0;
        for (int j = 0; j < t.to_codes; ++j) {
          if (to[j] < 0) unmapped += r[j];
          else est[to[j]] += r[j];
        }
        const auto& truth = cm.transition(cm.state_at(t.h, from[i]), a);
        double tv = 0.5 * unmapped;
        for (std::size_t b = 0; b < est.size(); ++b) tv += 0.5 * std::abs(est[b] - truth[b]);
        rep.max_tv = std::max(rep.max_tv, tv);
        ++rep.rows_checked;
        rep.rows.push_back({{"h", t.h}, {"code", i}, {"block", from[i]}, {"a", a}, {"count", n}, {"tv", tv}});
      }
    }
  }
  return rep;
}

std::vector<double> rollin_marginal(const LatentBlockMDP& mdp, const PolicyCover& cover_prev, int h) {
  if (h < 2 || h > mdp.horizon()) throw ConfigurationError("roll-in marginal needs 2 <= h <= H");
  const auto d = cover_distribution(mdp, cover_prev, h - 1);
  const int K = mdp.num_actions();
  std::vector<double> rho(static_cast<std::size_t>(mdp.num_states_at(h)), 0.0);
  for (int j = 0; j < mdp.num_states_at(h - 1); ++j) {
    if (d[j] == 0.0) continue;
    const StateId s = mdp.state_at(h - 1, j);
    for (Action a = 0; a < K; ++a) {
      const auto& row = mdp.transition(s, a);
      for (std::size_t k = 0; k < row.size(); ++k) rho[k] += d[j] * row[k] / K;
    }
  }
  return rho;
}

nlohmann::json CoverCertificate::to_json() const {
  return {{"h", h}, {"best_visit", best_visit}, {"eta", eta}, {"alpha", alpha}};
}

CoverCertificate cover_certificate(const LatentBlockMDP& mdp, const PolicyCover& cover) {
  CoverCertificate c;
  c.h = cover.timestep;
  const int h = c.h;
  const EtaResult eta = eta_exact(mdp);
  const int S = mdp.num_states_at(h);
  c.best_visit.assign(static_cast<std::size_t>(S), 0.0);
  c.eta.assign(static_cast<std::size_t>(S), 0.0);
  if (cover.policies.empty()) {
    if (h != 1) throw ConfigurationError("empty cover beyond the first step");
    c.best_visit = mdp.start();
  }
  for (const auto& p : cover.policies) {
    const auto v = exact_visitation(mdp, p.prefix(std::min(p.length(), h - 1)));
    for (int j = 0; j < S; ++j) c.best_visit[j] = std::max(c.best_visit[j], v[mdp.state_at(h, j)]);
  }
  for (int j = 0; j < S; ++j) {
    c.eta[j] = eta.eta[mdp.state_at(h, j)];
    if (c.eta[j] > 0.0) c.alpha = std::min(c.alpha, c.best_visit[j] / c.eta[j]);
  }
  return c;
}

std::vector<double> cover_visitation_mc(const LatentBlockMDP& mdp, const PolicyCover& cover, std::size_t episodes,
                                        std::uint64_t seed) {
  const int h = cover.timestep;
  const BlockMdpEnvironment env(borrow(mdp));
  std::vector<double> best(static_cast<std::size_t>(mdp.num_states_at(h)), 0.0);
  const std::size_t members = std::max<std::size_t>(1, cover.policies.size());
  for (std::size_t m = 0; m < members; ++m) {
    const NonstationaryPolicy pol = cover.policies.empty() ? NonstationaryPolicy{} : cover.policies[m].prefix(h - 1);
    std::vector<int> hit(episodes);
    parallel_for(episodes, [&](std::size_t k) {
      Rng rng = make_rng(seed, {m, k});
      hit[k] = mdp.local_index(latent_of(env.run(pol, h - 1, rng).observations[h - 1]));
    });
    std::vector<double> freq(best.size(), 0.0);
    for (int j : hit) freq[j] += 1.0;
    for (std::size_t j = 0; j < best.size(); ++j)
      best[j] = std::max(best[j], episodes ? freq[j] / static_cast<double>(episodes) : 0.0);
  }
  return best;
}

PopulationContrastive population_contrastive(const LatentBlockMDP& mdp, const PolicyCover& cover_prev, int h) {
  const auto* em = std::get_if<DiscreteEmission>(&mdp.emission());
  if (!em) throw UnsupportedOperation("population contrastive data needs a discrete emission");
  if (h < 2 || h > mdp.horizon()) throw ConfigurationError("population contrastive data needs 2 <= h <= H");
  const auto d = cover_distribution(mdp, cover_prev, h - 1);
  const auto rho_state = rollin_marginal(mdp, cover_prev, h);
  const int K = mdp.num_actions();
  PopulationContrastive out;
  for (int j = 0; j < mdp.num_states_at(h - 1); ++j) {
    const StateId s = mdp.state_at(h - 1, j);
    if (d[j] == 0.0) continue;
    for (const auto& [xid, qx] : em->table[s]) {
      const Observation x = LatentAccess::make(h - 1, xid, s);
      for (Action a = 0; a < K; ++a) {
        const double pxa = d[j] * qx / K;
        const auto& row = mdp.transition(s, a);
        for (int k = 0; k < mdp.num_states_at(h); ++k) {
          const StateId s2 = mdp.state_at(h, k);
          if (rho_state[k] == 0.0) continue;
          for (const auto& [nid, qn] : em->table[s2]) {
            const double T = row[k] * qn;
            const double rho = rho_state[k] * qn;
            const Observation next = LatentAccess::make(h, nid, s2);
            if (T > 0.0) out.examples.push_back({x, a, next, 1.0, 0.5 * pxa * T});
            out.examples.push_back({x, a, next, 0.0, 0.5 * pxa * rho});
            out.f_star[{xid, a, nid}] = T / (T + rho);
            out.mass[{xid, a, nid}] = 0.5 * pxa * (T + rho);
          }
        }
      }
    }
  }
  return out;
}

std::vector<std::vector<double>> VisitationTrace::weights() const {
  std::vector<std::vector<double>> w;
  for (const auto& row : counts) {
    std::vector<double> r;
    for (auto c : row) r.push_back(std::log(static_cast<double>(c) + 1.0));
    w.push_back(std::move(r));
  }
  return w;
}

nlohmann::json VisitationTrace::to_json(const LatentBlockMDP& mdp) const {
  const auto w = weights();
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t h = 0; h < counts.size(); ++h)
    for (std::size_t j = 0; j < counts[h].size(); ++j)
      rows.push_back({{"h", h + 1},
                      {"state", mdp.name(mdp.state_at(static_cast<int>(h) + 1, static_cast<int>(j)))},
                      {"count", counts[h][j]},
                      {"weight", w[h][j]}});
  return {{"episodes", episodes}, {"rows", rows}};
}

VisitationTrace visitation_trace(const LatentBlockMDP& mdp, const std::vector<NonstationaryPolicy>& policies,
                                 std::size_t n, std::uint64_t seed) {
  const int H = mdp.horizon();
  const int K = mdp.num_actions();
  VisitationTrace tr;
  tr.episodes = n;
  for (int h = 1; h <= H; ++h) tr.counts.emplace_back(static_cast<std::size_t>(mdp.num_states_at(h)), 0);
  std::vector<NonstationaryPolicy> padded;
  for (const auto& p : policies) padded.push_back(pad_uniform(p, K, H));
  if (padded.empty()) padded.push_back(pad_uniform({}, K, H));
  std::vector<std::vector<StateId>> paths(n);
  parallel_for(n, [&](std::size_t k) {
    Rng rng = make_rng(seed, {k});
    const auto& pol = padded[static_cast<std::size_t>(uniform_int(rng, static_cast<int>(padded.size())))];
    const TrajectoryLog log = sample_trajectory(mdp, pol, rng);
    for (const auto& st : log.steps) paths[k].push_back(st.latent);
  });
  for (const auto& path : paths)
    for (StateId s : path) ++tr.counts[mdp.step_of(s) - 1][mdp.local_index(s)];
  return tr;
}

}  // namespace kinlab
