#include "kinlab/block_mdp/io.hpp"

#include <fstream>
#include <map>

#include "kinlab/common/errors.hpp"

namespace kinlab {

using nlohmann::json;

json mdp_to_json(const LatentBlockMDP& mdp) {
  const auto* em = std::get_if<DiscreteEmission>(&mdp.emission());
  if (!em) throw UnsupportedOperation("only discrete-emission MDPs have a structured-text form");
  json states = json::array();
  for (int h = 1; h <= mdp.horizon(); ++h) {
    json names = json::array();
    for (StateId s : mdp.states_at(h)) names.push_back(mdp.name(s));
    states.push_back(names);
  }
  json transitions = json::array();
  json rewards = json::array();
  for (StateId s = 0; s < mdp.num_states(); ++s) {
    const int h = mdp.step_of(s);
    for (Action a = 0; a < mdp.num_actions(); ++a) {
      if (h == mdp.horizon()) {
        const auto& r = mdp.reward(s, a, 0);
        if (r.scale != 0.0)
          rewards.push_back({{"from", mdp.name(s)}, {"action", a}, {"to", nullptr}, {"scale", r.scale}, {"prob", r.prob}});
        continue;
      }
      const auto& t = mdp.transition(s, a);
      for (std::size_t j = 0; j < t.size(); ++j) {
        const StateId ns = mdp.state_at(h + 1, static_cast<int>(j));
        if (t[j] != 0.0) transitions.push_back({{"from", mdp.name(s)}, {"action", a}, {"to", mdp.name(ns)}, {"p", t[j]}});
        const auto& r = mdp.reward(s, a, static_cast<int>(j));
        if (r.scale != 0.0)
          rewards.push_back({{"from", mdp.name(s)}, {"action", a}, {"to", mdp.name(ns)}, {"scale", r.scale}, {"prob", r.prob}});
      }
    }
  }
  json emissions = json::object();
  for (StateId s = 0; s < mdp.num_states(); ++s) {
    json row = json::array();
    for (const auto& [o, p] : em->table[s]) row.push_back({o, p});
    emissions[mdp.name(s)] = row;
  }
  return {{"horizon", mdp.horizon()},     {"num_actions", mdp.num_actions()}, {"states", states},
          {"start", mdp.start()},         {"transitions", transitions},       {"rewards", rewards},
          {"emissions", emissions}};
}

LatentBlockMDP mdp_from_json(const json& j) {
  try {
    BlockMdpParts p;
    p.horizon = j.at("horizon").get<int>();
    p.num_actions = j.at("num_actions").get<int>();
    std::map<std::string, StateId> ids;
    std::vector<int> step_of;
    for (const auto& step : j.at("states")) {
      p.states_per_step.push_back(static_cast<int>(step.size()));
      for (const auto& name : step) {
        const auto n = name.get<std::string>();
        if (!ids.emplace(n, static_cast<StateId>(p.state_names.size())).second)
          throw SchemaError("/states", "duplicate state name '" + n + "'");
        p.state_names.push_back(n);
        step_of.push_back(static_cast<int>(p.states_per_step.size()));
      }
    }
    if (static_cast<int>(p.states_per_step.size()) != p.horizon)
      throw SchemaError("/states", "expected one list per step");
    std::vector<int> offset(p.states_per_step.size(), 0);
    for (std::size_t h = 1; h < offset.size(); ++h) offset[h] = offset[h - 1] + p.states_per_step[h - 1];
    auto lookup = [&](const json& v, const std::string& path) {
      auto it = ids.find(v.get<std::string>());
      if (it == ids.end()) throw SchemaError(path, "unknown state '" + v.get<std::string>() + "'");
      return it->second;
    };
    p.start = j.at("start").get<std::vector<double>>();
    const int total = static_cast<int>(p.state_names.size());
    p.transitions.resize(total);
    p.rewards.resize(total);
    for (int s = 0; s < total; ++s) {
      const int next = step_of[s] < p.horizon ? p.states_per_step[step_of[s]] : 0;
      p.transitions[s].assign(p.num_actions, std::vector<double>(next, 0.0));
      p.rewards[s].assign(p.num_actions, std::vector<RewardDescriptor>(next > 0 ? next : 1));
    }
    std::size_t k = 0;
    for (const auto& t : j.value("transitions", json::array())) {
      const std::string path = "/transitions/" + std::to_string(k++);
      const StateId from = lookup(t.at("from"), path + "/from");
      const StateId to = lookup(t.at("to"), path + "/to");
      const int a = t.at("action").get<int>();
      if (a < 0 || a >= p.num_actions) throw SchemaError(path + "/action", "out of range");
      if (step_of[to] != step_of[from] + 1) throw SchemaError(path, "transition must advance exactly one step");
      p.transitions[from][a][to - offset[step_of[to] - 1]] += t.at("p").get<double>();
    }
    k = 0;
    for (const auto& r : j.value("rewards", json::array())) {
      const std::string path = "/rewards/" + std::to_string(k++);
      const StateId from = lookup(r.at("from"), path + "/from");
      const int a = r.at("action").get<int>();
      if (a < 0 || a >= p.num_actions) throw SchemaError(path + "/action", "out of range");
      int slot = 0;
      if (r.contains("to") && !r.at("to").is_null()) {
        const StateId to = lookup(r.at("to"), path + "/to");
        if (step_of[to] != step_of[from] + 1) throw SchemaError(path, "reward transition must advance one step");
        slot = to - offset[step_of[to] - 1];
      } else if (step_of[from] != p.horizon) {
        throw SchemaError(path + "/to", "only last-step rewards may omit the next state");
      }
      p.rewards[from][a][slot] = RewardDescriptor{r.at("scale").get<double>(), r.value("prob", 1.0)};
    }
    DiscreteEmission em;
    em.table.resize(total);
    const auto& ej = j.at("emissions");
    for (int s = 0; s < total; ++s) {
      if (!ej.contains(p.state_names[s])) throw SchemaError("/emissions", "missing state '" + p.state_names[s] + "'");
      for (const auto& e : ej.at(p.state_names[s])) em.table[s].emplace_back(e[0].get<ObsId>(), e[1].get<double>());
    }
    p.emission = std::move(em);
    return LatentBlockMDP(std::move(p));
  } catch (const json::exception& e) {
    throw SchemaError("/", e.what());
  }
}

LatentBlockMDP load_mdp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw SchemaError("/", std::string("parse error: ") + e.what());
  }
  return mdp_from_json(j);
}

void save_mdp(const LatentBlockMDP& mdp, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigurationError("cannot write " + path);
  out << mdp_to_json(mdp).dump(2) << "\n";
}

}  // namespace kinlab
