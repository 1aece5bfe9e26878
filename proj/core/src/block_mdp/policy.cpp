#include "kinlab/block_mdp/policy.hpp"

#include "kinlab/block_mdp/latent_access.hpp"
#include "kinlab/common/errors.hpp"

namespace kinlab {

namespace {

std::vector<double> one_hot(int n, Action a) {
  std::vector<double> p(static_cast<std::size_t>(n), 0.0);
  p[static_cast<std::size_t>(a)] = 1.0;
  return p;
}

}  // namespace

Action LatentTableDecider::action_for(StateId s) const {
  auto it = table_.find(s);
  return it == table_.end() ? fallback_ : it->second;
}

std::vector<double> LatentTableDecider::distribution(const Observation& x) const {
  return one_hot(num_actions_, action_for(LatentAccess::latent(x)));
}

Action LatentTableDecider::act(const Observation& x, Rng&) const { return action_for(LatentAccess::latent(x)); }

nlohmann::json LatentTableDecider::to_json() const {
  nlohmann::json t = nlohmann::json::array();
  for (const auto& [s, a] : table_) t.push_back({s, a});
  return {{"kind", "latent_table"}, {"num_actions", num_actions_}, {"table", t}, {"fallback", fallback_}};
}

Action ObservationTableDecider::action_for(ObsId id) const {
  auto it = table_.find(id);
  return it == table_.end() ? fallback_ : it->second;
}

std::vector<double> ObservationTableDecider::distribution(const Observation& x) const {
  return one_hot(num_actions_, action_for(x.id()));
}

Action ObservationTableDecider::act(const Observation& x, Rng&) const { return action_for(x.id()); }

nlohmann::json ObservationTableDecider::to_json() const {
  nlohmann::json t = nlohmann::json::array();
  for (const auto& [o, a] : table_) t.push_back({o, a});
  return {{"kind", "observation_table"}, {"num_actions", num_actions_}, {"table", t}, {"fallback", fallback_}};
}

Action LinearArgmaxDecider::greedy(const Observation& x) const {
  const Eigen::Index K = W_.rows();
  Action best = 0;
  double best_score = 0.0;
  for (Eigen::Index a = 0; a < K; ++a) {
    double score = b_[a];
    if (features_.discrete_dim > 0) {
      ObsId id = x.id();
      if (id >= 0 && id < features_.discrete_dim) score += W_(a, static_cast<Eigen::Index>(id));
    } else {
      score += W_.row(a).dot(x.vec());
    }
    if (a == 0 || score > best_score) {
      best = static_cast<Action>(a);
      best_score = score;
    }
  }
  return best;
}

std::vector<double> LinearArgmaxDecider::distribution(const Observation& x) const {
  return one_hot(num_actions(), greedy(x));
}

nlohmann::json LinearArgmaxDecider::to_json() const {
  nlohmann::json W = nlohmann::json::array();
  for (Eigen::Index r = 0; r < W_.rows(); ++r) {
    std::vector<double> row(W_.cols());
    for (Eigen::Index c = 0; c < W_.cols(); ++c) row[c] = W_(r, c);
    W.push_back(row);
  }
  std::vector<double> b(b_.data(), b_.data() + b_.size());
  return {{"kind", "linear_argmax"}, {"W", W}, {"b", b},
          {"discrete_dim", features_.discrete_dim}, {"vector_dim", features_.vector_dim}};
}

std::vector<double> UniformDecider::distribution(const Observation&) const {
  return std::vector<double>(static_cast<std::size_t>(num_actions_), 1.0 / num_actions_);
}

nlohmann::json UniformDecider::to_json() const { return {{"kind", "uniform"}, {"num_actions", num_actions_}}; }

std::vector<double> FunctionDecider::distribution(const Observation& x) const {
  return one_hot(num_actions_, fn_(x));
}

nlohmann::json FunctionDecider::to_json() const { return {{"kind", "function"}, {"num_actions", num_actions_}}; }

DeciderPtr decider_from_json(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "latent_table") {
    std::map<StateId, Action> t;
    for (const auto& e : j.at("table")) t[e[0].get<StateId>()] = e[1].get<Action>();
    return std::make_shared<LatentTableDecider>(j.at("num_actions").get<int>(), t, j.value("fallback", 0));
  }
  if (kind == "observation_table") {
    std::map<ObsId, Action> t;
    for (const auto& e : j.at("table")) t[e[0].get<ObsId>()] = e[1].get<Action>();
    return std::make_shared<ObservationTableDecider>(j.at("num_actions").get<int>(), t, j.value("fallback", 0));
  }
  if (kind == "linear_argmax") {
    const auto& rows = j.at("W");
    const auto b = j.at("b").get<std::vector<double>>();
    Eigen::Index K = static_cast<Eigen::Index>(rows.size());
    Eigen::Index d = K > 0 ? static_cast<Eigen::Index>(rows[0].size()) : 0;
    Eigen::MatrixXd W(K, d);
    for (Eigen::Index r = 0; r < K; ++r)
      for (Eigen::Index c = 0; c < d; ++c) W(r, c) = rows[r][c].get<double>();
    ObservationFeatures f{j.value("discrete_dim", 0), j.value("vector_dim", static_cast<int>(d))};
    return std::make_shared<LinearArgmaxDecider>(W, Eigen::Map<const Eigen::VectorXd>(b.data(), K), f);
  }
  if (kind == "uniform") return std::make_shared<UniformDecider>(j.at("num_actions").get<int>());
  throw UnsupportedOperation("cannot deserialize decider of kind '" + kind + "'");
}

Action NonstationaryPolicy::act(const Observation& x, Rng& rng) const {
  const int h = x.timestep();
  if (h < 1 || h > length())
    throw ConfigurationError("policy of length " + std::to_string(length()) + " queried at step " + std::to_string(h));
  return deciders_[h - 1]->act(x, rng);
}

NonstationaryPolicy NonstationaryPolicy::prefix(int len) const {
  return NonstationaryPolicy(std::vector<DeciderPtr>(deciders_.begin(), deciders_.begin() + len));
}

NonstationaryPolicy NonstationaryPolicy::then(DeciderPtr d) const {
  auto v = deciders_;
  v.push_back(std::move(d));
  return NonstationaryPolicy(std::move(v));
}

NonstationaryPolicy NonstationaryPolicy::then(const NonstationaryPolicy& tail) const {
  auto v = deciders_;
  v.insert(v.end(), tail.deciders_.begin(), tail.deciders_.end());
  return NonstationaryPolicy(std::move(v));
}

nlohmann::json NonstationaryPolicy::to_json() const {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& d : deciders_) steps.push_back(d->to_json());
  return {{"steps", steps}};
}

NonstationaryPolicy NonstationaryPolicy::from_json(const nlohmann::json& j) {
  std::vector<DeciderPtr> v;
  for (const auto& s : j.at("steps")) v.push_back(decider_from_json(s));
  return NonstationaryPolicy(std::move(v));
}

NonstationaryPolicy latent_policy(int num_actions, const std::vector<std::map<StateId, Action>>& tables) {
  std::vector<DeciderPtr> v;
  for (const auto& t : tables) v.push_back(std::make_shared<LatentTableDecider>(num_actions, t));
  return NonstationaryPolicy(std::move(v));
}

NonstationaryPolicy uniform_policy(int num_actions, int length) {
  auto u = std::make_shared<UniformDecider>(num_actions);
  return NonstationaryPolicy(std::vector<DeciderPtr>(static_cast<std::size_t>(length), u));
}

}  // namespace kinlab
