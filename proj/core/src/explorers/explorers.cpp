#include "kinlab/explorers/explorers.hpp"

#include <algorithm>
#include <set>

#include "kinlab/common/errors.hpp"
#include "kinlab/common/parallel.hpp"

namespace kinlab {

namespace {

const NonstationaryPolicy kEmpty{};

const NonstationaryPolicy& pick(const PolicyCover& cover, Rng& rng) {
  if (cover.policies.empty()) return kEmpty;
  return cover.policies[static_cast<std::size_t>(uniform_int(rng, static_cast<int>(cover.policies.size())))];
}

std::vector<PolicyCover> covers_upto(const std::vector<PolicyCover>& covers, int t) {
  return {covers.begin(), covers.begin() + t};
}

void emit(const MetricsSink& sink, const nlohmann::json& j) {
  if (sink) sink(j);
}

PsdpConfig with_seed(PsdpConfig cfg, std::uint64_t seed) {
  cfg.seed = seed;
  return cfg;
}

std::vector<ObsId> distinct_ids(const std::vector<ContrastiveExample>& data, bool next) {
  std::set<ObsId> ids;
  for (const auto& e : data) {
    const Observation& o = next ? e.next : e.x;
    if (!o.is_discrete()) throw UnsupportedOperation("exact regression needs discrete observations");
    ids.insert(o.id());
  }
  return {ids.begin(), ids.end()};
}

// Backward and forward fits for one step.  The exact backend gets its
// finite classes from the ids present in the data when none were supplied.
std::pair<RegFit, std::optional<RegFit>> fit_step(const std::vector<ContrastiveExample>& data, const HomerConfig& cfg,
                                                  int h) {
  if (const auto* g = std::get_if<GumbelNetConfig>(&cfg.reg)) {
    GumbelNetConfig b = *g;
    b.mode = BottleneckMode::Backward;
    b.seed = derive_seed(cfg.seed, {0x72656762ULL, static_cast<std::uint64_t>(h)});
    RegFit back = reg_fit(data, cfg.N, cfg.M, b);
    std::optional<RegFit> fwd;
    if (cfg.learn_forward) {
      GumbelNetConfig f = *g;
      f.mode = BottleneckMode::Forward;
      f.seed = derive_seed(cfg.seed, {0x72656766ULL, static_cast<std::uint64_t>(h)});
      fwd = reg_fit(data, cfg.N, cfg.M, f);
    }
    return {std::move(back), std::move(fwd)};
  }
  const auto& e = std::get<ExactRegConfig>(cfg.reg);
  // The unquantized side of each fit is the identity over the ids seen.
  auto identity = [](const std::vector<ObsId>& ids) {
    PhiClass c;
    c.capacity = std::max<int>(1, static_cast<int>(ids.size()));
    std::vector<int> map(static_cast<std::size_t>(ids.empty() ? 0 : ids.back()) + 1, 0);
    for (std::size_t k = 0; k < ids.size(); ++k) map[static_cast<std::size_t>(ids[k])] = static_cast<int>(k);
    c.maps.push_back(std::move(map));
    return c;
  };
  const auto x_ids = distinct_ids(data, false);
  const auto next_ids = distinct_ids(data, true);
  ExactRegConfig b;
  b.backward = e.backward.maps.empty() ? all_maps(next_ids, cfg.N) : e.backward;
  b.forward = identity(x_ids);
  RegFit back = reg_fit(data, cfg.N, b.forward.capacity, b);
  std::optional<RegFit> fwd;
  if (cfg.learn_forward) {
    ExactRegConfig f;
    f.forward = e.forward.maps.empty() ? all_maps(x_ids, cfg.M) : e.forward;
    f.backward = identity(next_ids);
    fwd = reg_fit(data, f.backward.capacity, cfg.M, f);
  }
  return {std::move(back), std::move(fwd)};
}

}  // namespace

nlohmann::json InternalOptRecord::to_json() const {
  return {{"block", block},       {"gps_tried", gps_tried}, {"gps_accepted", gps_accepted},
          {"gps_value", gps_value}, {"psdp_run", psdp_run}, {"episodes", episodes}};
}

nlohmann::json IterationRecord::to_json() const {
  nlohmann::json o = nlohmann::json::array();
  for (const auto& r : optimizations) o.push_back(r.to_json());
  return {{"h", h},
          {"reg_examples", reg_examples},
          {"backward_report", backward_report},
          {"forward_report", forward_report},
          {"degenerate", degenerate},
          {"optimizations", o},
          {"episodes_total", episodes_total}};
}

nlohmann::json ExplorationResult::to_json() const {
  nlohmann::json c = nlohmann::json::array();
  for (const auto& cv : covers) c.push_back(cv.to_json());
  nlohmann::json it = nlohmann::json::array();
  for (const auto& r : iterations) it.push_back(r.to_json());
  nlohmann::json lv = nlohmann::json::array();
  for (const auto& r : final_levels) lv.push_back(r.to_json());
  return {{"covers", c},           {"policy", policy.to_json()}, {"iterations", it},
          {"final_levels", lv},    {"episodes", episodes},       {"degenerate", degenerate},
          {"backward", backward.to_json()}, {"forward", forward.to_json()}};
}

ExplorationResult exp_oracle(const Environment& env, const Abstraction& phi, const ExpOracleConfig& cfg) {
  const int H = env.horizon();
  if (phi.horizon() != H) throw ConfigurationError("abstraction horizon differs from the environment");
  const std::uint64_t start = env.episodes_used();
  ExplorationResult res;
  res.backward = phi;
  res.forward = constant_abstraction(H);
  res.covers.resize(static_cast<std::size_t>(H));
  for (int h = 1; h <= H; ++h) res.covers[h - 1].timestep = h;

  for (int h = 2; h <= H; ++h) {
    IterationRecord rec;
    rec.h = h;
    auto& cover = res.covers[h - 1];
    cover.claimed_alpha = 0.5;
    const auto prev = covers_upto(res.covers, h - 1);
    for (int i = 0; i < phi.capacity(h); ++i) {
      InternalOptRecord op;
      op.block = i;
      op.psdp_run = true;
      PsdpResult r;
      try {
        r = psdp(env, prev, PsdpReward::observation(make_internal_reward(phi, i, h)), h - 1,
                 with_seed(cfg.psdp, derive_seed(cfg.seed, {static_cast<std::uint64_t>(h), static_cast<std::uint64_t>(i)})));
      } catch (const Error& e) {
        throw Error("exp_oracle step " + std::to_string(h) + " block " + std::to_string(i) + ": " + e.what());
      }
      op.episodes = r.episodes;
      cover.policies.push_back(std::move(r.policy));
      rec.optimizations.push_back(op);
    }
    rec.episodes_total = env.episodes_used() - start;
    emit(cfg.on_metrics, {{"event", "iteration"}, {"record", rec.to_json()}});
    res.iterations.push_back(std::move(rec));
  }
  PsdpResult fin = psdp(env, res.covers, PsdpReward::environment(), H,
                        with_seed(cfg.psdp, derive_seed(cfg.seed, {0x66696eULL})));
  res.policy = std::move(fin.policy);
  res.final_levels = std::move(fin.levels);
  res.episodes = env.episodes_used() - start;
  emit(cfg.on_metrics, {{"event", "final"}, {"episodes", res.episodes}});
  return res;
}

std::vector<ContrastiveExample> collect_contrastive(const Environment& env, const PolicyCover& rollin, int h,
                                                    std::size_t n, bool resample, bool recycle,
                                                    std::uint64_t seed) {
  if (h < 2 || h > env.horizon()) throw ConfigurationError("contrastive data needs 2 <= h <= H");
  const auto uniform = std::make_shared<UniformDecider>(env.num_actions());
  auto transition = [&](Rng& rng) {
    const NonstationaryPolicy pol = pick(rollin, rng).prefix(h - 2).then(uniform);
    Episode ep = env.run(pol, h - 1, rng);
    return ContrastiveExample{std::move(ep.observations[h - 2]), ep.actions[h - 2], std::move(ep.observations[h - 1]),
                              1.0, 1.0};
  };

  if (resample) {
    std::vector<ContrastiveExample> real(n);
    parallel_for(n, [&](std::size_t j) {
      Rng rng = make_rng(seed, {j});
      real[j] = transition(rng);
    });
    std::vector<ContrastiveExample> out;
    out.reserve(2 * n);
    Rng pick_rng = make_rng(seed, {0x696d70ULL});
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t k = static_cast<std::size_t>(uniform_int(pick_rng, static_cast<int>(n)));
      out.push_back(real[j]);
      out.push_back(ContrastiveExample{real[j].x, real[j].a, real[k].next, 0.0, 1.0});
    }
    return out;
  }

  std::vector<std::vector<ContrastiveExample>> parts(n);
  parallel_for(n, [&](std::size_t j) {
    Rng rng = make_rng(seed, {j});
    ContrastiveExample first = transition(rng);
    ContrastiveExample second = transition(rng);
    const bool real = uniform01(rng) < 0.5;
    if (!real) {
      first.next = second.next;
      first.y = 0.0;
    }
    parts[j].push_back(std::move(first));
    if (recycle) parts[j].push_back(std::move(second));
  });
  std::vector<ContrastiveExample> out;
  for (auto& p : parts)
    for (auto& e : p) out.push_back(std::move(e));
  return out;
}

ExplorationResult homer(const Environment& env, const HomerConfig& cfg) {
  const int H = env.horizon();
  const int K = env.num_actions();
  if (cfg.N < 1 || cfg.M < 1) throw ConfigurationError("HOMER needs N >= 1 and M >= 1");
  const std::uint64_t start = env.episodes_used();
  ExplorationResult res;
  res.covers.resize(static_cast<std::size_t>(H));
  for (int h = 1; h <= H; ++h) res.covers[h - 1].timestep = h;
  res.backward = constant_abstraction(H);
  res.forward = constant_abstraction(H);

  for (int h = 2; h <= H; ++h) {
    IterationRecord rec;
    rec.h = h;
    const auto data = collect_contrastive(env, res.covers[h - 2], h, cfg.n_reg, cfg.resample_imposters,
                                          cfg.recycle_second, derive_seed(cfg.seed, {0x64617461ULL, static_cast<std::uint64_t>(h)}));
    rec.reg_examples = data.size();
    auto [back, fwd] = fit_step(data, cfg, h);
    rec.backward_report = back.report.to_json();
    res.backward.decoders[h - 1] = std::make_shared<LearnedDecoder>(back.model, DecoderSide::Backward);
    if (fwd) {
      rec.forward_report = fwd->report.to_json();
      res.forward.decoders[h - 2] = std::make_shared<LearnedDecoder>(fwd->model, DecoderSide::Forward);
    }

    std::set<int> used;
    std::vector<CBExample> reuse;
    for (const auto& e : data) {
      if (e.y != 1.0) continue;
      used.insert(res.backward.at(h).decode(e.next));
      reuse.push_back(CBExample{e.x, e.a, 1.0 / K, 0.0});
    }
    rec.degenerate = used.size() <= 1;
    res.degenerate = res.degenerate || rec.degenerate;

    auto& cover = res.covers[h - 1];
    cover.claimed_alpha = 0.5;
    const auto prev = covers_upto(res.covers, h - 1);
    for (int i = 0; i < cfg.N; ++i) {
      InternalOptRecord op;
      op.block = i;
      const auto R = make_internal_reward(res.backward, i, h);
      const PsdpReward reward = PsdpReward::observation(R);
      const PsdpConfig pc = with_seed(cfg.psdp, derive_seed(cfg.seed, {static_cast<std::uint64_t>(h), static_cast<std::uint64_t>(i)}));
      std::optional<NonstationaryPolicy> chosen;
      if (cfg.use_gps) {
        std::size_t r = 0;
        for (const auto& e : data) {
          if (e.y != 1.0) continue;
          reuse[r++].r = R(e.x, e.a, e.next);
        }
        const GpsResult g = gps_try(env, prev, reward, h - 1, pc, cfg.gps, &reuse);
        op.gps_tried = true;
        op.gps_accepted = g.accepted;
        op.gps_value = g.value;
        op.episodes += g.episodes;
        if (g.accepted) chosen = g.policy;
      }
      if (!chosen) {
        PsdpResult p;
        try {
          p = psdp(env, prev, reward, h - 1, pc);
        } catch (const Error& e) {
          throw Error("homer step " + std::to_string(h) + " block " + std::to_string(i) + ": " + e.what());
        }
        op.psdp_run = true;
        op.episodes += p.episodes;
        chosen = std::move(p.policy);
      }
      cover.policies.push_back(std::move(*chosen));
      rec.optimizations.push_back(op);
    }
    rec.episodes_total = env.episodes_used() - start;
    emit(cfg.on_metrics, {{"event", "iteration"}, {"record", rec.to_json()}});
    res.iterations.push_back(std::move(rec));
  }

  PsdpResult fin = psdp(env, res.covers, PsdpReward::environment(), H,
                        with_seed(cfg.psdp, derive_seed(cfg.seed, {0x66696eULL})));
  res.policy = std::move(fin.policy);
  res.final_levels = std::move(fin.levels);
  res.episodes = env.episodes_used() - start;
  emit(cfg.on_metrics, {{"event", "final"}, {"episodes", res.episodes}});
  return res;
}

}  // namespace kinlab
