#include "kinlab/harness/run.hpp"

#include <sstream>

#include "kinlab/block_mdp/io.hpp"
#include "kinlab/common/errors.hpp"
#include "kinlab/common/parallel.hpp"
#include "kinlab/envs/analysis.hpp"
#include "kinlab/envs/combolock.hpp"
#include "kinlab/explorers/diagnostics.hpp"
#include "kinlab/kinematics/canonical.hpp"

namespace kinlab {

namespace fs = std::filesystem;

namespace {

void write_json(const fs::path& p, const nlohmann::json& j) {
  std::ofstream out(p);
  out << j.dump(2) << "\n";
}

EnvironmentConfig env_for_seed(EnvironmentConfig e, std::uint64_t seed) {
  e.seed += seed;
  return e;
}

std::shared_ptr<const LatentBlockMDP> reference_for_dynamics(const EnvironmentConfig& e,
                                                             const LatentBlockMDP& mdp) {
  if (std::holds_alternative<DiscreteEmission>(mdp.emission())) return {&mdp, [](const LatentBlockMDP*) {}};
  if (e.kind == "combolock") {
    EnvironmentConfig twin = e;
    twin.discrete = true;
    return make_environment(twin);
  }
  return nullptr;
}

nlohmann::json evaluate_exploration(const ExperimentConfig& cfg, const EnvironmentConfig& envc,
                                    const std::shared_ptr<const LatentBlockMDP>& mdp, const BlockMdpEnvironment& env,
                                    const ExplorationResult& res, std::uint64_t seed, const fs::path& art) {
  const auto& ev = cfg.evaluation;
  nlohmann::json s;
  const ValueEstimate v =
      value_of(*mdp, res.policy, ExternalReward{}, {ev.episodes, derive_seed(seed, {0x6576ULL}), 1e-3});
  s["value"] = v.value;
  s["value_exact"] = v.exact;
  s["value_half_width"] = v.half_width;
  s["episodes"] = res.episodes;
  s["degenerate"] = res.degenerate;

  nlohmann::json dec = nlohmann::json::array();
  for (int h = 1; h <= mdp->horizon(); ++h) {
    const auto truth = backward_ki_partition(*mdp, h);
    const auto m = decode_match(*mdp, res.backward.at(h), truth, ev.decode_samples, derive_seed(seed, {0x6463ULL}));
    dec.push_back(m.accuracy);
  }
  s["backward_decode_accuracy"] = dec;

  if (cfg.algorithm == Algorithm::ExpOracle) {
    const EtaResult eta = eta_exact(*mdp);
    double worst = 1.0;
    for (int h = 2; h <= mdp->horizon(); ++h) {
      const auto visit = cover_visitation_mc(*mdp, res.covers[h - 1], 4000, derive_seed(seed, {0x6376ULL}));
      for (int j = 0; j < mdp->num_states_at(h); ++j)
        if (eta.reachable[mdp->state_at(h, j)]) worst = std::min(worst, visit[j]);
    }
    s["min_cover_visitation"] = worst;
  }

  if (ev.recover_dynamics && mdp->horizon() > 1) {
    const auto dyn = recover_dynamics(env, res.covers, res.forward, res.backward, ev.dynamics_samples,
                                      derive_seed(seed, {0x64796eULL}));
    write_json(art / "dynamics.json", dyn.to_json());
    if (auto ref = reference_for_dynamics(envc, *mdp)) {
      const CanonicalForm canon = canonicalize(*ref);
      const auto rep = canonical_dynamics_tv(dyn, res.forward, res.backward, *mdp, canon, ev.dynamics_min_count, 2000,
                                             derive_seed(seed, {0x6d6170ULL}));
      write_json(art / "dynamics_tv.json", rep.to_json());
      s["dynamics_max_tv"] = rep.max_tv;
      s["dynamics_rows_checked"] = rep.rows_checked;
    }
  }

  if (ev.trace_episodes > 0) {
    std::vector<NonstationaryPolicy> pols;
    for (const auto& c : res.covers)
      for (const auto& p : c.policies) pols.push_back(p);
    pols.push_back(res.policy);
    const auto tr = visitation_trace(*mdp, pols, ev.trace_episodes, derive_seed(seed, {0x7472ULL}));
    const auto w = tr.weights();
    std::ofstream csv(art / "visitation_trace.csv");
    csv << "h,state,count,weight\n";
    for (std::size_t h = 0; h < tr.counts.size(); ++h)
      for (std::size_t j = 0; j < tr.counts[h].size(); ++j)
        csv << h + 1 << "," << mdp->name(mdp->state_at(static_cast<int>(h) + 1, static_cast<int>(j))) << ","
            << tr.counts[h][j] << "," << w[h][j] << "\n";
  }
  return s;
}

nlohmann::json run_seed(const ExperimentConfig& cfg, std::uint64_t seed, const fs::path& dir, MetricsWriter& metrics) {
  const fs::path art = dir / "artifacts" / ("seed-" + std::to_string(seed));
  fs::create_directories(art);
  const EnvironmentConfig envc = env_for_seed(cfg.environment, seed);
  const auto mdp = make_environment(envc);
  const BlockMdpEnvironment env(mdp);
  nlohmann::json s{{"seed", seed}, {"environment_seed", envc.seed}};

  auto sink = [&](const nlohmann::json& j) {
    nlohmann::json m = j;
    m["seed"] = seed;
    metrics.write(env.episodes_used(), m);
  };

  switch (cfg.algorithm) {
    case Algorithm::Homer: {
      HomerConfig hc = homer_config(cfg.hyper, seed);
      hc.on_metrics = sink;
      const auto res = homer(env, hc);
      write_json(art / "result.json", res.to_json());
      s.update(evaluate_exploration(cfg, envc, mdp, env, res, seed, art));
      break;
    }
    case Algorithm::ExpOracle: {
      ExpOracleConfig ec;
      ec.psdp = psdp_config(cfg.hyper, seed);
      ec.eta = cfg.hyper.eta;
      ec.epsilon = cfg.hyper.epsilon;
      ec.delta = cfg.hyper.delta;
      ec.seed = seed;
      ec.on_metrics = sink;
      const auto res = exp_oracle(env, oracle_abstraction(*mdp, KIKind::Backward), ec);
      write_json(art / "result.json", res.to_json());
      s.update(evaluate_exploration(cfg, envc, mdp, env, res, seed, art));
      break;
    }
    case Algorithm::Psdp: {
      const EtaResult eta = eta_exact(*mdp);
      std::vector<PolicyCover> covers(static_cast<std::size_t>(mdp->horizon()));
      for (int h = 1; h <= mdp->horizon(); ++h) {
        covers[h - 1].timestep = h;
        covers[h - 1].claimed_alpha = 1.0;
        if (h == 1) continue;
        for (StateId st : mdp->states_at(h))
          if (eta.reachable[st]) covers[h - 1].policies.push_back(eta.homing[st]);
      }
      const auto res = psdp(env, covers, PsdpReward::environment(), mdp->horizon(), psdp_config(cfg.hyper, seed));
      nlohmann::json lv = nlohmann::json::array();
      for (const auto& l : res.levels) {
        lv.push_back(l.to_json());
        metrics.write(env.episodes_used(), {{"event", "level"}, {"seed", seed}, {"record", l.to_json()}});
      }
      write_json(art / "policy.json", res.policy.to_json());
      const ValueEstimate v = value_of(*mdp, res.policy, ExternalReward{},
                                       {cfg.evaluation.episodes, derive_seed(seed, {0x6576ULL}), 1e-3});
      s["value"] = v.value;
      s["value_exact"] = v.exact;
      s["episodes"] = res.episodes;
      break;
    }
    case Algorithm::KiAnalyze: {
      const auto rep = ki_report(*mdp);
      write_json(art / "ki_report.json", rep);
      s["report"] = rep;
      break;
    }
    case Algorithm::Canonicalize: {
      const CanonicalForm c = canonicalize(*mdp);
      write_json(art / "canonical.json", c.to_json(*mdp));
      write_json(art / "canonical_mdp.json", mdp_to_json(*c.mdp));
      s["states_before"] = mdp->num_states();
      s["states_after"] = c.mdp->num_states();
      break;
    }
    case Algorithm::CounterexampleReport: {
      nlohmann::json steps = nlohmann::json::array();
      for (int h = 1; h <= mdp->horizon(); ++h) {
        auto names = [&](const std::vector<std::vector<StateId>>& blocks) {
          nlohmann::json out = nlohmann::json::array();
          for (const auto& b : blocks) {
            nlohmann::json nb = nlohmann::json::array();
            for (StateId st : b) nb.push_back(mdp->name(st));
            out.push_back(nb);
          }
          return out;
        };
        steps.push_back({{"h", h},
                         {"collapse", names(bayes_prev_action_collapse(*mdp, h))},
                         {"ki", names(ki_partition(*mdp, h).blocks)}});
      }
      nlohmann::json ae = nlohmann::json::array();
      for (double p : {0.5, 0.6, 0.8, 0.9}) {
        const auto [keep_state, keep_noise] = autoencoder_loss_compare(16, p);
        ae.push_back({{"bits", 16}, {"p", p}, {"keep_state_bit", keep_state}, {"keep_noise_bit", keep_noise}});
      }
      s["partitions"] = steps;
      s["autoencoder"] = ae;
      write_json(art / "counterexample.json", s);
      break;
    }
  }
  metrics.write(env.episodes_used(), {{"event", "seed_done"}, {"seed", seed}});
  return s;
}

std::string summary_text(const ExperimentConfig& cfg, const nlohmann::json& runs) {
  std::ostringstream o;
  o << "experiment: " << cfg.name << "\nalgorithm: " << to_string(cfg.algorithm) << "\n";
  for (const auto& r : runs) {
    o << "seed " << r.value("seed", 0ULL) << ":";
    for (const char* k : {"value", "episodes", "min_cover_visitation", "dynamics_max_tv", "states_before", "states_after"})
      if (r.contains(k)) o << " " << k << "=" << r[k].dump();
    if (r.contains("backward_decode_accuracy")) o << " decode=" << r["backward_decode_accuracy"].dump();
    if (r.contains("partitions")) o << " partition_reports=" << r["partitions"].size();
    if (r.contains("autoencoder")) o << " autoencoder_settings=" << r["autoencoder"].size();
    if (r.contains("error")) o << " error=" << r["error"].dump();
    o << "\n";
  }
  return o.str();
}

}  // namespace

MetricsWriter::MetricsWriter(const fs::path& file) : out_(file) {
  if (!out_) throw ConfigurationError("cannot write metrics to " + file.string());
}

void MetricsWriter::write(std::uint64_t episodes, nlohmann::json metrics) {
  metrics["ordinal"] = ordinal_++;
  metrics["episodes"] = episodes;
  out_ << metrics.dump() << "\n";
  out_.flush();
}

RunOutcome run_experiment(const ExperimentConfig& cfg, const fs::path& root_in) {
  const fs::path root = !root_in.empty() ? root_in : (!cfg.output_dir.empty() ? fs::path(cfg.output_dir) : default_output_root());
  RunOutcome out;
  out.directory = root / cfg.name;
  fs::create_directories(out.directory / "artifacts");
  write_json(out.directory / "config.json", cfg.to_json());
  if (cfg.workers > 0) set_default_workers(cfg.workers);
  MetricsWriter metrics(out.directory / "metrics.jsonl");

  nlohmann::json runs = nlohmann::json::array();
  for (std::uint64_t seed : cfg.seeds) {
    try {
      runs.push_back(run_seed(cfg, seed, out.directory, metrics));
    } catch (const std::exception& e) {
      out.ok = false;
      nlohmann::json err{{"seed", seed}, {"error", e.what()}};
      if (const auto* se = dynamic_cast<const SchemaError*>(&e)) err["path"] = se->path();
      runs.push_back(err);
      write_json(out.directory / "error.json", err);
      break;
    }
  }
  out.summary = {{"name", cfg.name}, {"algorithm", to_string(cfg.algorithm)}, {"ok", out.ok}, {"runs", runs}};
  write_json(out.directory / "summary.json", out.summary);
  std::ofstream(out.directory / "summary.txt") << summary_text(cfg, runs);
  return out;
}

nlohmann::json restart_loop(const ExperimentConfig& base, int max_rounds, double rel_tol) {
  if (base.algorithm != Algorithm::Homer) throw ConfigurationError("the restart loop wraps homer only");
  nlohmann::json rounds = nlohmann::json::array();
  ExperimentConfig cfg = base;
  double prev = std::numeric_limits<double>::infinity();
  for (int r = 0; r < max_rounds; ++r) {
    const std::uint64_t seed = cfg.seeds.front();
    const auto mdp = make_environment(env_for_seed(cfg.environment, seed));
    const BlockMdpEnvironment env(mdp);
    const auto res = homer(env, homer_config(cfg.hyper, seed));
    double loss = 0.0;
    for (const auto& it : res.iterations) loss += it.backward_report.value("best_validation_loss", 0.0);
    if (!res.iterations.empty()) loss /= static_cast<double>(res.iterations.size());
    const ValueEstimate v = value_of(*mdp, res.policy, ExternalReward{}, {cfg.evaluation.episodes, seed, 1e-3});
    rounds.push_back({{"round", r}, {"N", cfg.hyper.N}, {"eta", cfg.hyper.eta}, {"validation_loss", loss},
                      {"value", v.value}, {"episodes", res.episodes}});
    const bool plateau = std::isfinite(prev) && prev - loss <= rel_tol * std::abs(prev);
    prev = std::min(prev, loss);
    if (plateau) break;
    cfg.hyper.N *= 2;
    cfg.hyper.eta /= 2.0;
  }
  return {{"rounds", rounds}};
}

}  // namespace kinlab
