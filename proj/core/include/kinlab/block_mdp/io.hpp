#pragma once

#include <nlohmann/json.hpp>
#include <string>

#include "kinlab/block_mdp/mdp.hpp"

namespace kinlab {

// Structured-text format for tabular MDPs with discrete emissions:
//
//   {
//     "horizon": 2, "num_actions": 2,
//     "states": [["s1", "s2"], ["s3"]],
//     "start": [0.5, 0.5],
//     "transitions": [{"from": "s1", "action": 0, "to": "s3", "p": 1.0}, ...],
//     "rewards": [{"from": "s3", "action": 0, "to": null, "scale": 1.0, "prob": 1.0}, ...],
//     "emissions": {"s1": [[0, 1.0]], ...}
//   }
//
// Missing transitions are zero, missing rewards are zero.
nlohmann::json mdp_to_json(const LatentBlockMDP& mdp);
LatentBlockMDP mdp_from_json(const nlohmann::json& j);
LatentBlockMDP load_mdp(const std::string& path);
void save_mdp(const LatentBlockMDP& mdp, const std::string& path);

}  // namespace kinlab
