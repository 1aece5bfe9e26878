#pragma once

// Diagnostic back door to the latent state carried by an Observation.
// Only simulators, exact oracles and evaluation code include this header.

#include "kinlab/block_mdp/observation.hpp"

namespace kinlab {

struct LatentAccess {
  static StateId latent(const Observation& x) { return x.latent_; }

  static Observation make(int timestep, Observation::Payload payload, StateId latent) {
    Observation x;
    x.timestep_ = timestep;
    x.payload_ = std::move(payload);
    x.latent_ = latent;
    return x;
  }
};

}  // namespace kinlab
