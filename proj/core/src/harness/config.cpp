#include "kinlab/harness/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

#include "kinlab/block_mdp/io.hpp"
#include "kinlab/common/errors.hpp"
#include "kinlab/envs/combolock.hpp"
#include "kinlab/envs/figures.hpp"
#include "kinlab/envs/random_mdp.hpp"

namespace kinlab {

namespace {

class Reader {
 public:
  Reader(const nlohmann::json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw SchemaError(path_.empty() ? "/" : path_, "expected an object");
  }

  template <class T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const nlohmann::json::exception&) {
      throw SchemaError(at(key), "wrong type");
    }
  }

  const nlohmann::json* child(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string at(const std::string& key) const { return path_ + "/" + key; }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.count(k)) throw SchemaError(at(k), "unknown field");
  }

 private:
  const nlohmann::json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& path, const std::string& msg) {
  if (!ok) throw SchemaError(path, msg);
}

}  // namespace

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::Homer:
      return "homer";
    case Algorithm::ExpOracle:
      return "exp_oracle";
    case Algorithm::Psdp:
      return "psdp";
    case Algorithm::KiAnalyze:
      return "ki-analyze";
    case Algorithm::Canonicalize:
      return "canonicalize";
    case Algorithm::CounterexampleReport:
      return "counterexample-report";
  }
  return "?";
}

Algorithm parse_algorithm(const std::string& s) {
  for (Algorithm a : {Algorithm::Homer, Algorithm::ExpOracle, Algorithm::Psdp, Algorithm::KiAnalyze,
                      Algorithm::Canonicalize, Algorithm::CounterexampleReport})
    if (to_string(a) == s) return a;
  throw ConfigurationError("unknown algorithm '" + s + "'");
}

nlohmann::json ExperimentConfig::to_json() const {
  const auto& e = environment;
  const auto& h = hyper;
  const auto& v = evaluation;
  return {{"name", name},
          {"algorithm", to_string(algorithm)},
          {"environment",
           {{"kind", e.kind}, {"horizon", e.horizon}, {"actions", e.actions}, {"seed", e.seed}, {"discrete", e.discrete},
            {"variant", e.variant}, {"counterexample", e.counterexample}, {"path", e.path}}},
          {"hyper",
           {{"N", h.N},
            {"M", h.M},
            {"n_reg", h.n_reg},
            {"n_psdp", h.n_psdp},
            {"learning_rate", h.learning_rate},
            {"batch", h.batch},
            {"hidden", h.hidden},
            {"temperature", h.temperature},
            {"reg_epochs", h.reg_epochs},
            {"cb_epochs", h.cb_epochs},
            {"validation_fraction", h.validation_fraction},
            {"patience", h.patience},
            {"pretrain_epochs", h.pretrain_epochs},
            {"restarts", h.restarts},
            {"optimizer", h.optimizer},
            {"reg_backend", h.reg_backend},
            {"cb_class", h.cb_class},
            {"gps", h.gps},
            {"gps_epsilon", h.gps_epsilon},
            {"gps_episodes", h.gps_episodes},
            {"resample_imposters", h.resample_imposters},
            {"recycle", h.recycle},
            {"learn_forward", h.learn_forward},
            {"eta", h.eta},
            {"epsilon", h.epsilon},
            {"delta", h.delta}}},
          {"evaluation",
           {{"episodes", v.episodes},
            {"decode_samples", v.decode_samples},
            {"recover_dynamics", v.recover_dynamics},
            {"dynamics_samples", v.dynamics_samples},
            {"dynamics_min_count", v.dynamics_min_count},
            {"trace_episodes", v.trace_episodes}}},
          {"seeds", seeds},
          {"output_dir", output_dir},
          {"workers", workers}};
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  Reader r(j, "");
  r.read("name", c.name);
  std::string algo = to_string(c.algorithm);
  r.read("algorithm", algo);
  try {
    c.algorithm = parse_algorithm(algo);
  } catch (const ConfigurationError& e) {
    throw SchemaError(r.at("algorithm"), e.what());
  }
  if (const auto* e = r.child("environment")) {
    Reader er(*e, "/environment");
    auto& env = c.environment;
    er.read("kind", env.kind);
    er.read("horizon", env.horizon);
    er.read("actions", env.actions);
    er.read("seed", env.seed);
    er.read("discrete", env.discrete);
    er.read("variant", env.variant);
    er.read("counterexample", env.counterexample);
    er.read("path", env.path);
    er.finish();
    static const std::set<std::string> kinds{"combolock", "fig1", "counterexample", "random", "file"};
    require(kinds.count(env.kind) > 0, "/environment/kind", "unknown environment kind '" + env.kind + "'");
    require(env.horizon >= 1, "/environment/horizon", "must be >= 1");
    require(env.actions >= 1, "/environment/actions", "must be >= 1");
    require(env.kind != "fig1" || env.variant == "left" || env.variant == "right", "/environment/variant",
            "must be left or right");
    require(env.kind != "file" || !env.path.empty(), "/environment/path", "required for kind file");
  }
  if (const auto* h = r.child("hyper")) {
    Reader hr(*h, "/hyper");
    auto& p = c.hyper;
    hr.read("N", p.N);
    hr.read("M", p.M);
    hr.read("n_reg", p.n_reg);
    hr.read("n_psdp", p.n_psdp);
    hr.read("learning_rate", p.learning_rate);
    hr.read("batch", p.batch);
    hr.read("hidden", p.hidden);
    hr.read("temperature", p.temperature);
    hr.read("reg_epochs", p.reg_epochs);
    hr.read("cb_epochs", p.cb_epochs);
    hr.read("validation_fraction", p.validation_fraction);
    hr.read("patience", p.patience);
    hr.read("pretrain_epochs", p.pretrain_epochs);
    hr.read("restarts", p.restarts);
    hr.read("optimizer", p.optimizer);
    hr.read("reg_backend", p.reg_backend);
    hr.read("cb_class", p.cb_class);
    hr.read("gps", p.gps);
    hr.read("gps_epsilon", p.gps_epsilon);
    hr.read("gps_episodes", p.gps_episodes);
    hr.read("resample_imposters", p.resample_imposters);
    hr.read("recycle", p.recycle);
    hr.read("learn_forward", p.learn_forward);
    hr.read("eta", p.eta);
    hr.read("epsilon", p.epsilon);
    hr.read("delta", p.delta);
    hr.finish();
    require(p.N >= 1, "/hyper/N", "must be >= 1");
    require(p.M >= 1, "/hyper/M", "must be >= 1");
    require(p.n_reg >= 1, "/hyper/n_reg", "must be >= 1");
    require(p.n_psdp >= 1, "/hyper/n_psdp", "must be >= 1");
    require(p.learning_rate > 0, "/hyper/learning_rate", "must be positive");
    require(p.batch >= 1, "/hyper/batch", "must be >= 1");
    require(p.restarts >= 1, "/hyper/restarts", "must be >= 1");
    require(p.temperature > 0, "/hyper/temperature", "must be positive");
    require(p.validation_fraction >= 0 && p.validation_fraction < 1, "/hyper/validation_fraction",
            "must lie in [0, 1)");
    try {
      parse_optimizer(p.optimizer);
    } catch (const ConfigurationError& e) {
      throw SchemaError("/hyper/optimizer", e.what());
    }
    require(p.reg_backend == "sgd_gumbel" || p.reg_backend == "exact_erm", "/hyper/reg_backend",
            "must be sgd_gumbel or exact_erm");
    require(p.cb_class == "linear" || p.cb_class == "tabular", "/hyper/cb_class", "must be linear or tabular");
  }
  if (const auto* v = r.child("evaluation")) {
    Reader vr(*v, "/evaluation");
    auto& ev = c.evaluation;
    vr.read("episodes", ev.episodes);
    vr.read("decode_samples", ev.decode_samples);
    vr.read("recover_dynamics", ev.recover_dynamics);
    vr.read("dynamics_samples", ev.dynamics_samples);
    vr.read("dynamics_min_count", ev.dynamics_min_count);
    vr.read("trace_episodes", ev.trace_episodes);
    vr.finish();
  }
  r.read("seeds", c.seeds);
  require(!c.seeds.empty(), "/seeds", "needs at least one seed");
  r.read("output_dir", c.output_dir);
  r.read("workers", c.workers);
  require(c.workers >= 0, "/workers", "must be >= 0");
  r.finish();
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot open config '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError("/", std::string("not valid JSON: ") + e.what());
  }
  return from_json(j);
}

std::shared_ptr<const LatentBlockMDP> make_environment(const EnvironmentConfig& env) {
  if (env.kind == "combolock") {
    ComboLockOptions o;
    o.discrete_emission = env.discrete;
    return make_combolock(env.horizon, env.actions, env.seed, o);
  }
  if (env.kind == "fig1") return make_fig1(env.variant == "left" ? Fig1Variant::Left : Fig1Variant::Right);
  if (env.kind == "counterexample") return make_counterexample(parse_counterexample(env.counterexample));
  if (env.kind == "random") {
    Rng rng = make_rng(env.seed, {0x726e64ULL});
    return std::make_shared<const LatentBlockMDP>(random_block_mdp({}, rng));
  }
  if (env.kind == "file") return std::make_shared<const LatentBlockMDP>(load_mdp(env.path));
  throw ConfigurationError("unknown environment kind '" + env.kind + "'");
}

PsdpConfig psdp_config(const Hyperparameters& hp, std::uint64_t seed) {
  PsdpConfig p;
  p.n = hp.n_psdp;
  p.seed = seed;
  if (hp.cb_class == "tabular") {
    p.policy_class = TabularClass{};
  } else {
    LinearClass lc;
    lc.epochs = hp.cb_epochs;
    lc.batch = hp.batch;
    lc.optimizer.kind = parse_optimizer(hp.optimizer);
    lc.optimizer.lr = hp.learning_rate;
    p.policy_class = lc;
  }
  return p;
}

HomerConfig homer_config(const Hyperparameters& hp, std::uint64_t seed) {
  HomerConfig h;
  h.N = hp.N;
  h.M = hp.M;
  h.n_reg = hp.n_reg;
  h.psdp = psdp_config(hp, seed);
  if (hp.reg_backend == "exact_erm") {
    h.reg = ExactRegConfig{};
  } else {
    GumbelNetConfig g;
    g.hidden = hp.hidden;
    g.temperature = hp.temperature;
    g.optimizer.kind = parse_optimizer(hp.optimizer);
    g.optimizer.lr = hp.learning_rate;
    g.batch = hp.batch;
    g.max_epochs = hp.reg_epochs;
    g.patience = hp.patience;
    g.validation_fraction = hp.validation_fraction;
    g.pretrain_epochs = hp.pretrain_epochs;
    g.restarts = hp.restarts;
    h.reg = g;
  }
  h.learn_forward = hp.learn_forward;
  h.use_gps = hp.gps;
  h.gps.epsilon = hp.gps_epsilon;
  h.gps.mc_episodes = hp.gps_episodes;
  h.resample_imposters = hp.resample_imposters;
  h.recycle_second = hp.recycle;
  h.eta = hp.eta;
  h.epsilon = hp.epsilon;
  h.delta = hp.delta;
  h.seed = seed;
  return h;
}

std::filesystem::path default_output_root() {
  if (const char* env = std::getenv("KINLAB_OUTPUT_ROOT"); env && *env) return env;
  return "runs";
}

}  // namespace kinlab
