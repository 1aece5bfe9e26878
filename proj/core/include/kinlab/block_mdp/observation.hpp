#pragma once

#include <Eigen/Dense>
#include <variant>

#include "kinlab/common/types.hpp"

namespace kinlab {

struct LatentAccess;

// What a learner sees: a discrete symbol or a real vector, tagged with its
// timestep.  The emitting latent state rides along but is only reachable
// through LatentAccess (latent_access.hpp), which learner code never includes.
class Observation {
 public:
  using Payload = std::variant<std::monostate, ObsId, Eigen::VectorXd>;

  Observation() = default;
  Observation(int timestep, ObsId id) : timestep_(timestep), payload_(id) {}
  Observation(int timestep, Eigen::VectorXd v) : timestep_(timestep), payload_(std::move(v)) {}

  int timestep() const { return timestep_; }
  bool is_discrete() const { return std::holds_alternative<ObsId>(payload_); }
  bool is_vector() const { return std::holds_alternative<Eigen::VectorXd>(payload_); }
  bool empty() const { return std::holds_alternative<std::monostate>(payload_); }
  ObsId id() const { return std::get<ObsId>(payload_); }
  const Eigen::VectorXd& vec() const { return std::get<Eigen::VectorXd>(payload_); }
  const Payload& payload() const { return payload_; }

 private:
  friend struct LatentAccess;
  int timestep_ = 0;
  Payload payload_;
  StateId latent_ = kNoState;
};

// Maps an observation to a dense feature vector: vectors pass through,
// discrete ids become one-hot over [0, discrete_dim).
struct ObservationFeatures {
  int discrete_dim = 0;
  int vector_dim = 0;

  int dim() const { return discrete_dim > 0 ? discrete_dim : vector_dim; }
  Eigen::VectorXd operator()(const Observation& x) const;
  void write(const Observation& x, Eigen::Ref<Eigen::VectorXd> out) const;
};

}  // namespace kinlab
