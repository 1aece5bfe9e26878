#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "kinlab/common/errors.hpp"
#include "kinlab/common/stats.hpp"
#include "kinlab/envs/analysis.hpp"
#include "kinlab/envs/combolock.hpp"
#include "kinlab/envs/figures.hpp"
#include "kinlab/envs/random_mdp.hpp"
#include "kinlab/explorers/diagnostics.hpp"
#include "kinlab/explorers/recovery.hpp"
#include "kinlab/harness/run.hpp"
#include "kinlab/kinematics/canonical.hpp"
#include "kinlab/kinematics/policy_ratio.hpp"
#include "kinlab/oracles/gumbel_net.hpp"

using namespace kinlab;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace tol {
// Criterion 1
constexpr int kRandomMdps = 200;
constexpr double kPolicyRatio = 1e-9;
constexpr double kSuiteSeconds = 120.0;
// Criterion 2
constexpr double kProcessGap = 1e-12;
constexpr int kRandomCanonical = 30;
// Criterion 3
constexpr double kBayesCell = 1e-9;
constexpr std::size_t kFiniteN = 8000;
constexpr int kFiniteRepeats = 20;
constexpr double kRegDelta = 0.05;
// Criterion 4
constexpr int kGradInits = 10;
constexpr double kGradStep = 1e-5;
constexpr double kGradRelErr = 1e-4;
// Criterion 5
constexpr int kPsdpSeeds = 20;
constexpr std::size_t kPsdpN = 4000;
constexpr double kPsdpGap = 0.05;
constexpr double kCscDelta = 0.05;
// Criterion 6
constexpr double kCoverVisit = 0.25;
constexpr double kValue = 0.5;
constexpr int kExpOracleNeeded = 9;
// Criterion 7
constexpr std::uint64_t kEpisodeBudget = 500000;
constexpr int kHomerNeeded = 7;
constexpr double kPartitionMatch = 0.9;
constexpr int kStepsNeeded = 9;
// Criterion 8
constexpr double kDynamicsTv = 0.1;
constexpr std::uint64_t kPopulatedRow = 200;
constexpr std::size_t kDynamicsSamples = 20000;
// Criterion 9
constexpr int kChainDepth = 6;
// Criterion 10
constexpr int kCoverInstances = 50;
constexpr double kSlack = 1e-12;
}  // namespace tol

struct Verdict {
  bool pass = false;
  std::string summary;
  nlohmann::json detail = nlohmann::json::object();
};

const char* const kNames[] = {"",
                              "KI lemma suite",
                              "canonical form",
                              "Bayes-optimal regressor",
                              "gradient check",
                              "PSDP optimality",
                              "ExpOracle cover",
                              "HOMER end-to-end",
                              "dynamics recovery",
                              "counterexample suite",
                              "roll-in lower bound"};

std::string fmt(double x, int prec = 4) {
  std::ostringstream o;
  o << std::setprecision(prec) << x;
  return o.str();
}

fs::path source_dir() {
#ifdef KINLAB_SOURCE_DIR
  return KINLAB_SOURCE_DIR;
#else
  return fs::current_path();
#endif
}

double elapsed(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

Verdict criterion1() {
  const auto t0 = Clock::now();
  RandomMdpOptions opts;
  opts.max_states = 4;
  opts.max_actions = 3;
  opts.max_horizon = 4;
  double worst = 0.0;
  std::size_t blocks = 0, dim_violations = 0, pairs = 0;
  for (int i = 0; i < tol::kRandomMdps; ++i) {
    auto rng = make_rng(0xC1, {static_cast<std::uint64_t>(i)});
    const LatentBlockMDP m = random_block_mdp(opts, rng);
    for (int h = 1; h <= m.horizon(); ++h) {
      const auto b = backward_ki_partition(m, h);
      const auto f = forward_ki_partition(m, h);
      const auto k = ki_partition(m, h);
      if (std::max(f.size(), b.size()) > k.size() || k.size() > static_cast<std::size_t>(m.num_states_at(h)))
        ++dim_violations;
      const auto rep = check_policy_ratio(m, b);
      worst = std::max(worst, rep.max_deviation);
      pairs += rep.pairs_checked;
      blocks += b.size();
    }
  }
  const double secs = elapsed(t0);
  Verdict v;
  v.pass = worst <= tol::kPolicyRatio && dim_violations == 0 && secs <= tol::kSuiteSeconds;
  v.summary = "max deviation " + fmt(worst) + " (<= " + fmt(tol::kPolicyRatio) + "), dimension violations " +
              std::to_string(dim_violations) + ", " + fmt(secs, 3) + " s";
  v.detail = {{"instances", tol::kRandomMdps}, {"max_deviation", worst}, {"blocks", blocks},
              {"pairs_checked", pairs},        {"dimension_violations", dim_violations}, {"seconds", secs}};
  return v;
}

double process_gap(const std::map<std::vector<ObsId>, double>& a, const std::map<std::vector<ObsId>, double>& b) {
  double gap = 0.0;
  for (const auto& [k, p] : a) gap = std::max(gap, std::abs(p - (b.count(k) ? b.at(k) : 0.0)));
  for (const auto& [k, p] : b) gap = std::max(gap, std::abs(p - (a.count(k) ? a.at(k) : 0.0)));
  return gap;
}

Verdict criterion2() {
  const auto right = make_fig1(Fig1Variant::Right);
  const auto left = make_fig1(Fig1Variant::Left);
  const CanonicalForm c = canonicalize(*right);
  const bool iso = find_isomorphism(*c.mdp, *left).has_value();
  double worst = 0.0;
  std::size_t policies = 0;
  for (const auto& pol : enumerate_observation_policies(*right)) {
    worst = std::max(worst, process_gap(observation_process(*right, pol), observation_process(*c.mdp, pol)));
    worst = std::max(worst, process_gap(observation_process(*right, pol), observation_process(*left, pol)));
    ++policies;
  }
  // Planted-split two-step instances with several actions.
  RandomMdpOptions opts;
  opts.min_horizon = opts.max_horizon = 2;
  opts.min_actions = 2;
  opts.max_actions = 2;
  opts.max_states = 4;
  opts.split_prob = 0.8;
  std::size_t merged = 0;
  for (int i = 0; i < tol::kRandomCanonical; ++i) {
    auto rng = make_rng(0xC2, {static_cast<std::uint64_t>(i)});
    const LatentBlockMDP m = random_block_mdp(opts, rng);
    const CanonicalForm cm = canonicalize(m);
    merged += static_cast<std::size_t>(m.num_states() - cm.mdp->num_states());
    for (const auto& pol : enumerate_observation_policies(m)) {
      worst = std::max(worst, process_gap(observation_process(m, pol), observation_process(*cm.mdp, pol)));
      ++policies;
    }
  }
  Verdict v;
  v.pass = iso && worst <= tol::kProcessGap;
  v.summary = std::string("fig1 isomorphic: ") + (iso ? "yes" : "no") + ", max process gap " + fmt(worst) +
              " over " + std::to_string(policies) + " policies (<= " + fmt(tol::kProcessGap) + ")";
  v.detail = {{"isomorphic", iso},
              {"max_gap", worst},
              {"policies", policies},
              {"random_instances", tol::kRandomCanonical},
              {"states_merged", merged},
              {"canonical", c.to_json(*right)}};
  return v;
}

std::vector<ObsId> sorted_unique(std::vector<ObsId> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

Verdict criterion3() {
  ComboLockOptions o;
  o.discrete_emission = true;
  const auto m = make_combolock(2, 2, 4, o);
  const PolicyCover start;
  const auto pop = population_contrastive(*m, start, 2);
  std::vector<ObsId> xs, nexts;
  for (const auto& [k, f] : pop.f_star) {
    xs.push_back(std::get<0>(k));
    nexts.push_back(std::get<2>(k));
  }
  xs = sorted_unique(xs);
  nexts = sorted_unique(nexts);
  ExactRegConfig cfg;
  cfg.forward = all_maps(xs, 2);
  cfg.backward = all_maps(nexts, m->num_states_at(2));
  const int N = cfg.backward.capacity, M = cfg.forward.capacity;

  auto sq_error = [&](const BottleneckRegressor& model) {
    double err = 0.0, mass = 0.0;
    for (const auto& [k, f] : pop.f_star) {
      const auto& [x, a, nx] = k;
      const double p = model.predict(Observation(1, x), a, Observation(2, nx));
      err += pop.mass.at(k) * (p - f) * (p - f);
      mass += pop.mass.at(k);
    }
    return err / mass;
  };

  const RegFit exact = reg_fit(pop.examples, N, M, cfg);
  double worst_cell = 0.0;
  for (const auto& [k, f] : pop.f_star) {
    const auto& [x, a, nx] = k;
    worst_cell = std::max(worst_cell, std::abs(exact.model->predict(Observation(1, x), a, Observation(2, nx)) - f));
  }

  std::vector<double> weights;
  for (const auto& e : pop.examples) weights.push_back(e.weight);
  std::discrete_distribution<std::size_t> draw(weights.begin(), weights.end());
  double total = 0.0, worst_rep = 0.0;
  for (int r = 0; r < tol::kFiniteRepeats; ++r) {
    auto rng = make_rng(0xC3, {static_cast<std::uint64_t>(r)});
    std::vector<ContrastiveExample> sample;
    for (std::size_t i = 0; i < tol::kFiniteN; ++i) {
      ContrastiveExample e = pop.examples[draw(rng)];
      e.weight = 1.0;
      sample.push_back(e);
    }
    const double err = sq_error(*reg_fit(sample, N, M, cfg).model);
    total += err;
    worst_rep = std::max(worst_rep, err);
  }
  const double mean = total / tol::kFiniteRepeats;
  const double log_phi = std::log(static_cast<double>(cfg.forward.maps.size())) +
                         std::log(static_cast<double>(cfg.backward.maps.size()));
  const double bound = delta_reg(static_cast<double>(tol::kFiniteN), log_phi, N, m->num_actions(), tol::kRegDelta);

  Verdict v;
  v.pass = worst_cell <= tol::kBayesCell && mean <= bound;
  v.summary = "population max cell error " + fmt(worst_cell) + " (<= " + fmt(tol::kBayesCell) +
              "), n=8000 mean squared error " + fmt(mean) + " (worst " + fmt(worst_rep) + ") vs bound " + fmt(bound);
  v.detail = {{"max_cell_error", worst_cell}, {"cells", pop.f_star.size()}, {"finite_mean", mean},
              {"finite_worst", worst_rep},     {"bound", bound},            {"log_phi", log_phi},
              {"repeats", tol::kFiniteRepeats}};
  return v;
}

Verdict criterion4() {
  const auto m = make_combolock(4, 3, 1);
  BlockMdpEnvironment env(m);
  const PolicyCover start;
  const auto data = collect_contrastive(env, start, 2, 64, true, false, 0xC4);
  double worst = 0.0;
  nlohmann::json runs = nlohmann::json::array();
  for (int i = 0; i < tol::kGradInits; ++i) {
    auto rng = make_rng(0xC4, {static_cast<std::uint64_t>(i)});
    GumbelNetConfig cfg;
    cfg.mode = BottleneckMode::Joint;
    cfg.temperature = 1.0;
    cfg.loss = i % 2 == 0 ? RegLoss::CrossEntropy : RegLoss::Square;
    auto net = make_gumbel_net(data, 2, 3, cfg, rng);
    const auto noise = net->sample_noise(1, rng);
    const auto& sample = data[static_cast<std::size_t>(uniform_int(rng, static_cast<int>(data.size())))];
    const GradCheckResult r = grad_check(*net, sample, noise, tol::kGradStep);
    worst = std::max(worst, r.max_relative_error);
    runs.push_back({{"init", i}, {"loss", to_string(cfg.loss)}, {"max_relative_error", r.max_relative_error},
                    {"worst_index", r.worst_index}, {"params", net->num_params()}});
  }
  Verdict v;
  v.pass = worst <= tol::kGradRelErr;
  v.summary = "max relative error " + fmt(worst) + " over " + std::to_string(tol::kGradInits) + " inits (<= " +
              fmt(tol::kGradRelErr) + ")";
  v.detail = {{"runs", runs}, {"max_relative_error", worst}};
  return v;
}

// Every deterministic observation-level policy of a short MDP, by brute force.
double enumerated_optimum(const LatentBlockMDP& m, double& count) {
  const auto& em = std::get<DiscreteEmission>(m.emission());
  const int K = m.num_actions();
  std::vector<std::vector<ObsId>> ids(static_cast<std::size_t>(m.horizon()));
  for (StateId s = 0; s < m.num_states(); ++s)
    for (const auto& [id, p] : em.table[s]) ids[m.step_of(s) - 1].push_back(id);
  std::vector<ObsId> flat;
  std::vector<int> step_of_slot;
  for (int h = 0; h < m.horizon(); ++h)
    for (ObsId id : ids[h]) {
      flat.push_back(id);
      step_of_slot.push_back(h);
    }
  std::vector<int> digits(flat.size(), 0);
  double best = -1.0;
  count = 0.0;
  for (;;) {
    std::vector<std::map<ObsId, Action>> tables(static_cast<std::size_t>(m.horizon()));
    for (std::size_t k = 0; k < flat.size(); ++k) tables[step_of_slot[k]][flat[k]] = digits[k];
    std::vector<DeciderPtr> ds;
    for (auto& t : tables) ds.push_back(std::make_shared<ObservationTableDecider>(K, t));
    best = std::max(best, value_of(m, NonstationaryPolicy(ds), ExternalReward{}).value);
    count += 1.0;
    std::size_t k = 0;
    for (; k < digits.size(); ++k) {
      if (++digits[k] < K) break;
      digits[k] = 0;
    }
    if (k == digits.size()) break;
  }
  return best;
}

Verdict criterion5() {
  RandomMdpOptions opts;
  opts.min_horizon = opts.max_horizon = 2;
  opts.max_states = 3;
  opts.min_actions = 2;
  opts.max_actions = 3;
  opts.max_obs_per_state = 2;
  double worst_gap = 0.0, min_slack = std::numeric_limits<double>::infinity();
  int within = 0, violations = 0;
  nlohmann::json runs = nlohmann::json::array();
  for (int seed = 0; seed < tol::kPsdpSeeds; ++seed) {
    auto rng = make_rng(0xC5, {static_cast<std::uint64_t>(seed)});
    const auto m = std::make_shared<const LatentBlockMDP>(random_block_mdp(opts, rng));
    double count = 0.0;
    const double opt = enumerated_optimum(*m, count);

    const EtaResult eta = eta_exact(*m);
    std::vector<PolicyCover> covers(2);
    covers[0].timestep = 1;
    covers[1].timestep = 2;
    for (StateId s : m->states_at(2))
      if (eta.reachable[s]) covers[1].policies.push_back(eta.homing[s]);
    const double alpha = cover_certificate(*m, covers[1]).alpha;

    BlockMdpEnvironment env(m);
    PsdpConfig pc;
    pc.n = tol::kPsdpN;
    pc.policy_class = TabularClass{};
    pc.seed = static_cast<std::uint64_t>(seed);
    const PsdpResult res = psdp(env, covers, PsdpReward::environment(), 2, pc);
    const double value = value_of(*m, res.policy, ExternalReward{}).value;
    const double gap = opt - value;

    int ids_max = 0, states_max = 0;
    for (int h = 1; h <= 2; ++h) {
      int ids = 0;
      for (StateId s : m->states_at(h)) ids += static_cast<int>(std::get<DiscreteEmission>(m->emission()).table[s].size());
      ids_max = std::max(ids_max, ids);
      states_max = std::max(states_max, m->num_states_at(h));
    }
    const double class_size = std::pow(static_cast<double>(m->num_actions()), ids_max);
    const double dcsc = delta_csc(static_cast<double>(tol::kPsdpN), m->num_actions(), class_size, tol::kCscDelta);
    const double bound = states_max * 2.0 * dcsc / alpha;
    within += gap <= tol::kPsdpGap;
    violations += gap > bound;
    worst_gap = std::max(worst_gap, gap);
    min_slack = std::min(min_slack, bound - gap);
    runs.push_back({{"seed", seed},       {"optimum", opt},   {"psdp_value", value}, {"gap", gap},
                    {"policies", count},  {"alpha", alpha},   {"delta_csc", dcsc},   {"bound", bound},
                    {"actions", m->num_actions()}});
  }
  Verdict v;
  v.pass = within == tol::kPsdpSeeds && violations == 0;
  v.summary = std::to_string(within) + "/" + std::to_string(tol::kPsdpSeeds) + " seeds within " +
              fmt(tol::kPsdpGap) + " (worst gap " + fmt(worst_gap) + "), N*h*dcsc/alpha bound violated " +
              std::to_string(violations) + " times";
  v.detail = {{"runs", runs}, {"worst_gap", worst_gap}, {"bound_violations", violations}, {"min_slack", min_slack}};
  return v;
}

ExperimentConfig load_config(const std::string& file) {
  return ExperimentConfig::load((source_dir() / "configs" / file).string());
}

Verdict criterion6(const fs::path& artifacts) {
  const auto cfg = load_config("criterion6_exp_oracle.json");
  const RunOutcome out = run_experiment(cfg, artifacts);
  int good = 0;
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& r : out.summary["runs"]) {
    if (r.contains("error")) {
      runs.push_back(r);
      continue;
    }
    const double visit = r["min_cover_visitation"].get<double>();
    const double value = r["value"].get<double>();
    const bool ok = visit >= tol::kCoverVisit && value >= tol::kValue;
    good += ok;
    runs.push_back({{"seed", r["seed"]}, {"min_visitation", visit}, {"value", value}, {"ok", ok},
                    {"episodes", r["episodes"]}});
  }
  Verdict v;
  v.pass = good >= tol::kExpOracleNeeded;
  v.summary = std::to_string(good) + "/" + std::to_string(cfg.seeds.size()) + " seeds with visitation >= " +
              fmt(tol::kCoverVisit) + " and V >= " + fmt(tol::kValue) + " (need " +
              std::to_string(tol::kExpOracleNeeded) + ")";
  v.detail = {{"runs", runs}, {"directory", out.directory.string()}};
  return v;
}

Verdict criterion7(const fs::path& artifacts) {
  const auto cfg = load_config("criterion7_homer.json");
  const RunOutcome out = run_experiment(cfg, artifacts);
  int good = 0, valued = 0, within_budget = 0, matched_seeds = 0;
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& r : out.summary["runs"]) {
    if (r.contains("error")) {
      runs.push_back(r);
      continue;
    }
    const double value = r["value"].get<double>();
    const auto episodes = r["episodes"].get<std::uint64_t>();
    int matched = 0;
    for (const auto& a : r["backward_decode_accuracy"]) matched += a.get<double>() >= tol::kPartitionMatch;
    const bool v_ok = value >= tol::kValue, b_ok = episodes <= tol::kEpisodeBudget, m_ok = matched >= tol::kStepsNeeded;
    valued += v_ok;
    within_budget += b_ok;
    matched_seeds += m_ok;
    good += v_ok && b_ok && m_ok;
    runs.push_back({{"seed", r["seed"]},
                    {"value", value},
                    {"episodes", episodes},
                    {"matched_steps", matched},
                    {"decode_accuracy", r["backward_decode_accuracy"]},
                    {"ok", v_ok && b_ok && m_ok}});
  }
  Verdict v;
  v.pass = good >= tol::kHomerNeeded;
  v.summary = std::to_string(good) + "/" + std::to_string(cfg.seeds.size()) + " seeds succeed (need " +
              std::to_string(tol::kHomerNeeded) + "); V >= 0.5 in " + std::to_string(valued) + ", <= 5e5 episodes in " +
              std::to_string(within_budget) + ", >= 9/10 partition matches in " + std::to_string(matched_seeds);
  v.detail = {{"runs", runs}, {"directory", out.directory.string()}};
  return v;
}

// Recovers dynamics from the stored HOMER artifacts of one seed.
nlohmann::json dynamics_from_artifacts(const ExperimentConfig& cfg, const fs::path& seed_dir, std::uint64_t seed) {
  std::ifstream in(seed_dir / "result.json");
  const auto j = nlohmann::json::parse(in);
  std::vector<PolicyCover> covers;
  for (const auto& c : j["covers"]) covers.push_back(PolicyCover::from_json(c));
  const Abstraction backward = abstraction_from_json(j["backward"]);
  const Abstraction forward = abstraction_from_json(j["forward"]);

  EnvironmentConfig envc = cfg.environment;
  envc.seed += seed;
  const auto mdp = make_environment(envc);
  envc.discrete = true;
  const auto twin = make_environment(envc);
  const BlockMdpEnvironment env(mdp);
  const auto dyn = recover_dynamics(env, covers, forward, backward, tol::kDynamicsSamples, derive_seed(seed, {0xC8}));
  const auto rep = canonical_dynamics_tv(dyn, forward, backward, *mdp, canonicalize(*twin), tol::kPopulatedRow, 2000,
                                         derive_seed(seed, {0xC8, 1}));
  return {{"seed", seed}, {"max_tv", rep.max_tv}, {"rows_checked", rep.rows_checked}, {"report", rep.to_json()}};
}

Verdict criterion8(const fs::path& artifacts) {
  auto cfg = load_config("criterion7_homer.json");
  fs::path dir = artifacts / cfg.name;
  nlohmann::json summary;
  if (fs::exists(dir / "summary.json")) {
    std::ifstream in(dir / "summary.json");
    summary = nlohmann::json::parse(in);
  } else {
    cfg.name += "-single";
    cfg.seeds = {0};
    const RunOutcome out = run_experiment(cfg, artifacts);
    dir = out.directory;
    summary = out.summary;
  }
  double worst = 0.0;
  std::size_t rows = 0;
  int evaluated = 0;
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& r : summary["runs"]) {
    if (r.contains("error") || r["value"].get<double>() < tol::kValue) continue;
    const auto seed = r["seed"].get<std::uint64_t>();
    auto d = dynamics_from_artifacts(cfg, dir / "artifacts" / ("seed-" + std::to_string(seed)), seed);
    worst = std::max(worst, d["max_tv"].get<double>());
    rows += d["rows_checked"].get<std::size_t>();
    ++evaluated;
    runs.push_back(d);
  }
  Verdict v;
  v.pass = evaluated > 0 && worst <= tol::kDynamicsTv;
  v.summary = "max TV " + fmt(worst) + " over " + std::to_string(rows) + " populated rows (count >= " +
              std::to_string(tol::kPopulatedRow) + ") in " + std::to_string(evaluated) +
              " successful runs (<= " + fmt(tol::kDynamicsTv) + ")";
  v.detail = {{"runs", runs}, {"max_tv", worst}};
  return v;
}

Verdict criterion9() {
  const auto fig = make_counterexample(CounterexampleKind::fig4a());
  auto names = [&](const StatePartition& p) {
    std::vector<std::vector<std::string>> out;
    for (const auto& b : p) {
      std::vector<std::string> nb;
      for (StateId s : b) nb.push_back(fig->name(s));
      out.push_back(nb);
    }
    return out;
  };
  const auto c2 = names(bayes_prev_action_collapse(*fig, 2));
  const auto c3 = names(bayes_prev_action_collapse(*fig, 3));
  using Blocks = std::vector<std::vector<std::string>>;
  const bool collapse_ok = c2 == Blocks{{"s3", "s4"}, {"s5", "s6"}} && c3 == Blocks{{"s7", "s8"}, {"s9"}};
  const auto ki3 = ki_partition(*fig, 3);
  const bool ki_ok = ki3.block_of(fig->state_at(3, 0)) != ki3.block_of(fig->state_at(3, 1));

  bool reach_ok = true;
  nlohmann::json reach = nlohmann::json::array();
  for (int L = 1; L <= tol::kChainDepth; ++L) {
    const auto m = make_counterexample(CounterexampleKind::fig4b_chain(L));
    std::vector<StatePartition> parts;
    for (int h = 1; h <= m->horizon(); ++h) parts.push_back(bayes_prev_action_collapse(*m, h));
    const std::vector<StateId> targets{m->state_at(L + 1, 0), m->state_at(L + 1, 1)};
    const double r = best_reach_under_abstraction(*m, parts, targets).best;
    const double latent = best_reach_latent(*m, targets);
    reach_ok = reach_ok && r == std::ldexp(1.0, -L);
    reach.push_back({{"L", L}, {"abstract", r}, {"expected", std::ldexp(1.0, -L)}, {"latent", latent}});
  }

  bool ae_ok = true;
  nlohmann::json ae = nlohmann::json::array();
  for (double p : {0.5, 0.6, 0.8, 0.9}) {
    const auto [keep_state, keep_noise] = autoencoder_loss_compare(8, p);
    const bool ok = p == 0.5 ? keep_state == keep_noise : keep_noise < keep_state;
    ae_ok = ae_ok && ok;
    ae.push_back({{"p", p}, {"keep_state_bit", keep_state}, {"keep_noise_bit", keep_noise}});
  }
  Verdict v;
  v.pass = collapse_ok && ki_ok && reach_ok && ae_ok;
  v.summary = std::string("fig4a collapse ") + (collapse_ok ? "ok" : "wrong") + ", KI s7!=s8 " +
              (ki_ok ? "ok" : "wrong") + ", chain reach 2^-L " + (reach_ok ? "ok" : "wrong") +
              ", autoencoder comparison " + (ae_ok ? "ok" : "wrong");
  v.detail = {{"collapse_h2", c2}, {"collapse_h3", c3}, {"ki_h3", ki3.to_json(*fig)}, {"reach", reach},
              {"autoencoder", ae}};
  return v;
}

Verdict criterion10() {
  RandomMdpOptions opts;
  opts.min_horizon = 3;
  opts.max_horizon = 4;
  double min_margin = std::numeric_limits<double>::infinity();
  double alpha_min = 1.0;
  std::size_t checks = 0, violations = 0, partial_covers = 0;
  for (int i = 0; i < tol::kCoverInstances; ++i) {
    auto rng = make_rng(0xCA, {static_cast<std::uint64_t>(i)});
    const LatentBlockMDP m = random_block_mdp(opts, rng);
    const EtaResult eta = eta_exact(m);
    const int K = m.num_actions();
    for (int h = 2; h <= m.horizon(); ++h) {
      // Psi_{h-1}: homing policies for some states, random latent policies for the rest.
      PolicyCover cover;
      cover.timestep = h - 1;
      if (h > 2) {
        for (StateId s : m.states_at(h - 1)) {
          if (!eta.reachable[s]) continue;
          if (uniform01(rng) < 0.6) {
            cover.policies.push_back(eta.homing[s]);
          } else {
            std::vector<std::map<StateId, Action>> tables;
            for (int t = 1; t < h - 1; ++t) {
              std::map<StateId, Action> tab;
              for (StateId x : m.states_at(t)) tab[x] = uniform_int(rng, K);
              tables.push_back(tab);
            }
            cover.policies.push_back(latent_policy(K, tables));
          }
        }
        // Home in on states the random members miss so that alpha stays positive.
        const auto cert = cover_certificate(m, cover);
        for (int j = 0; j < m.num_states_at(h - 1); ++j) {
          const StateId s = m.state_at(h - 1, j);
          if (eta.reachable[s] && cert.best_visit[j] <= 0.0) cover.policies.push_back(eta.homing[s]);
        }
      }
      const double alpha = h > 2 ? cover_certificate(m, cover).alpha : 1.0;
      partial_covers += alpha < 1.0;
      alpha_min = std::min(alpha_min, alpha);
      const double N = std::max<std::size_t>(1, cover.policies.size());
      const auto rho = rollin_marginal(m, cover, h);
      for (int j = 0; j < m.num_states_at(h); ++j) {
        const double lower = alpha * eta.eta[m.state_at(h, j)] / (N * K);
        min_margin = std::min(min_margin, rho[j] - lower);
        violations += rho[j] < lower - tol::kSlack;
        ++checks;
      }
    }
  }
  Verdict v;
  v.pass = violations == 0;
  v.summary = std::to_string(checks) + " state checks on " + std::to_string(tol::kCoverInstances) +
              " instances, violations " + std::to_string(violations) + ", min margin " + fmt(min_margin) +
              ", smallest alpha " + fmt(alpha_min) + " (" + std::to_string(partial_covers) + " covers with alpha < 1)";
  v.pass = v.pass && alpha_min > 0.0;
  v.detail = {{"checks", checks},          {"violations", violations}, {"min_margin", min_margin},
              {"min_alpha", alpha_min},    {"partial_covers", partial_covers}};
  return v;
}

Verdict run_criterion(int n, const fs::path& artifacts) {
  switch (n) {
    case 1: return criterion1();
    case 2: return criterion2();
    case 3: return criterion3();
    case 4: return criterion4();
    case 5: return criterion5();
    case 6: return criterion6(artifacts);
    case 7: return criterion7(artifacts);
    case 8: return criterion8(artifacts);
    case 9: return criterion9();
    case 10: return criterion10();
    default: throw ConfigurationError("criteria are numbered 1..10");
  }
}

int main(int argc, char** argv) {
  CLI::App app{"kinlab acceptance criteria"};
  std::vector<int> criteria;
  std::string artifacts = "acceptance_runs";
  app.add_option("--criterion,-c", criteria, "criteria to run (default: all)")->check(CLI::Range(1, 10));
  app.add_option("--artifacts", artifacts, "directory for run outputs and per-criterion reports");
  CLI11_PARSE(app, argc, argv);
  if (criteria.empty())
    for (int i = 1; i <= 10; ++i) criteria.push_back(i);

  const fs::path root(artifacts);
  fs::create_directories(root);
  bool all = true;
  for (int n : criteria) {
    const auto t0 = Clock::now();
    Verdict v;
    try {
      v = run_criterion(n, root);
    } catch (const std::exception& e) {
      v.pass = false;
      v.summary = std::string("error: ") + e.what();
    }
    const double secs = elapsed(t0);
    v.detail["pass"] = v.pass;
    v.detail["seconds"] = secs;
    v.detail["summary"] = v.summary;
    std::ofstream(root / ("criterion-" + std::to_string(n) + ".json")) << v.detail.dump(2) << "\n";
    std::cout << "criterion " << std::setw(2) << n << " [" << (v.pass ? "PASS" : "FAIL") << "] " << kNames[n] << ": "
              << v.summary << " (" << fmt(secs, 3) << " s)" << std::endl;
    all = all && v.pass;
  }
  return all ? 0 : 1;
}
