#pragma once

#include <memory>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "kinlab/block_mdp/dynamics.hpp"
#include "kinlab/kinematics/partition.hpp"
#include "kinlab/oracles/reg.hpp"

namespace kinlab {

class Decoder {
 public:
  virtual ~Decoder() = default;
  virtual int capacity() const = 0;
  virtual int decode(const Observation& x) const = 0;
  virtual nlohmann::json to_json() const = 0;
};

using DecoderPtr = std::shared_ptr<const Decoder>;

class ConstantDecoder final : public Decoder {
 public:
  int capacity() const override { return 1; }
  int decode(const Observation&) const override { return 0; }
  nlohmann::json to_json() const override { return {{"type", "constant"}}; }
};

// Reads the latent state through the diagnostic back door and reports its
// block in a kinematic partition.
class OracleDecoder final : public Decoder {
 public:
  explicit OracleDecoder(KIPartition partition) : partition_(std::move(partition)) {}
  int capacity() const override { return static_cast<int>(partition_.size()); }
  int decode(const Observation& x) const override;
  nlohmann::json to_json() const override;
  const KIPartition& partition() const { return partition_; }

 private:
  KIPartition partition_;
};

enum class DecoderSide { Forward, Backward };

// One side of a fitted bottleneck regressor.
class LearnedDecoder final : public Decoder {
 public:
  LearnedDecoder(std::shared_ptr<const BottleneckRegressor> model, DecoderSide side);
  int capacity() const override;
  int decode(const Observation& x) const override;
  nlohmann::json to_json() const override;
  const BottleneckRegressor& model() const { return *model_; }

 private:
  std::shared_ptr<const BottleneckRegressor> model_;
  DecoderSide side_;
};

enum class Provenance { Oracle, Learned };

std::string to_string(Provenance p);

// decoders[h-1] maps observations of step h into [capacity(h)].
struct Abstraction {
  Provenance provenance = Provenance::Learned;
  std::vector<DecoderPtr> decoders;

  int horizon() const { return static_cast<int>(decoders.size()); }
  const Decoder& at(int h) const { return *decoders.at(static_cast<std::size_t>(h - 1)); }
  int capacity(int h) const { return at(h).capacity(); }
  // Uses the observation's own timestep.
  int decode(const Observation& x) const { return at(x.timestep()).decode(x); }
  nlohmann::json to_json() const;
};

Abstraction constant_abstraction(int horizon);
// Inverse of Abstraction::to_json.
Abstraction abstraction_from_json(const nlohmann::json& j);
Abstraction oracle_abstraction(const LatentBlockMDP& mdp, KIKind kind, double tol = kDefaultKITolerance);

// R_{i,h}(x, a, x') = 1 when x' is a step-h observation decoded to i.
ObservationRewardFn make_internal_reward(const Abstraction& phi, int i, int h);

// (phi_F(x), phi_B(x)) packed as phi_F * capacity_B + phi_B.
int combined_code(const Abstraction& forward, const Abstraction& backward, const Observation& x);
int combined_capacity(const Abstraction& forward, const Abstraction& backward, int h);

}  // namespace kinlab
