#include "kinlab/explorers/abstraction.hpp"

#include "kinlab/block_mdp/latent_access.hpp"
#include "kinlab/common/errors.hpp"

namespace kinlab {

int OracleDecoder::decode(const Observation& x) const {
  const int b = partition_.block_of(LatentAccess::latent(x));
  if (b < 0) throw ConfigurationError("oracle decoder received an observation from another step");
  return b;
}

nlohmann::json OracleDecoder::to_json() const {
  nlohmann::json blocks = nlohmann::json::array();
  for (const auto& b : partition_.blocks) blocks.push_back(b);
  return {{"type", "oracle"}, {"kind", to_string(partition_.kind)}, {"timestep", partition_.timestep}, {"blocks", blocks}};
}

LearnedDecoder::LearnedDecoder(std::shared_ptr<const BottleneckRegressor> model, DecoderSide side)
    : model_(std::move(model)), side_(side) {
  if (!model_) throw ConfigurationError("learned decoder needs a model");
  if (capacity() <= 0) throw ConfigurationError("regressor does not quantize the requested side");
}

int LearnedDecoder::capacity() const {
  return side_ == DecoderSide::Forward ? model_->forward_capacity() : model_->backward_capacity();
}

int LearnedDecoder::decode(const Observation& x) const {
  return side_ == DecoderSide::Forward ? model_->phi_forward(x) : model_->phi_backward(x);
}

nlohmann::json LearnedDecoder::to_json() const {
  return {{"type", "learned"}, {"side", side_ == DecoderSide::Forward ? "forward" : "backward"}, {"model", model_->to_json()}};
}

std::string to_string(Provenance p) { return p == Provenance::Oracle ? "oracle" : "learned"; }

nlohmann::json Abstraction::to_json() const {
  nlohmann::json d = nlohmann::json::array();
  for (const auto& dec : decoders) d.push_back(dec->to_json());
  return {{"provenance", to_string(provenance)}, {"decoders", d}};
}

Abstraction constant_abstraction(int horizon) {
  Abstraction a;
  const auto c = std::make_shared<ConstantDecoder>();
  a.decoders.assign(static_cast<std::size_t>(horizon), c);
  return a;
}

Abstraction abstraction_from_json(const nlohmann::json& j) {
  Abstraction a;
  a.provenance = j.at("provenance").get<std::string>() == "oracle" ? Provenance::Oracle : Provenance::Learned;
  for (const auto& d : j.at("decoders")) {
    const std::string type = d.at("type").get<std::string>();
    if (type == "constant") {
      a.decoders.push_back(std::make_shared<ConstantDecoder>());
    } else if (type == "learned") {
      const auto side = d.at("side").get<std::string>() == "forward" ? DecoderSide::Forward : DecoderSide::Backward;
      a.decoders.push_back(std::make_shared<LearnedDecoder>(regressor_from_json(d.at("model")), side));
    } else if (type == "oracle") {
      KIPartition p;
      p.timestep = d.at("timestep").get<int>();
      const std::string kind = d.at("kind").get<std::string>();
      p.kind = kind == "forward" ? KIKind::Forward : kind == "backward" ? KIKind::Backward : KIKind::Full;
      p.blocks = d.at("blocks").get<std::vector<std::vector<StateId>>>();
      a.decoders.push_back(std::make_shared<OracleDecoder>(std::move(p)));
    } else {
      throw ConfigurationError("unknown decoder type '" + type + "'");
    }
  }
  return a;
}

Abstraction oracle_abstraction(const LatentBlockMDP& mdp, KIKind kind, double tol) {
  Abstraction a;
  a.provenance = Provenance::Oracle;
  for (int h = 1; h <= mdp.horizon(); ++h)
    a.decoders.push_back(std::make_shared<OracleDecoder>(partition_of_kind(mdp, h, kind, tol)));
  return a;
}

ObservationRewardFn make_internal_reward(const Abstraction& phi, int i, int h) {
  if (h < 1 || h > phi.horizon()) throw ConfigurationError("internal reward step outside the abstraction");
  if (i < 0 || i >= phi.capacity(h)) throw ConfigurationError("internal reward index outside the capacity");
  DecoderPtr dec = phi.decoders[static_cast<std::size_t>(h - 1)];
  return [dec, i, h](const Observation&, Action, const Observation& next) {
    if (next.empty() || next.timestep() != h) return 0.0;
    return dec->decode(next) == i ? 1.0 : 0.0;
  };
}

int combined_capacity(const Abstraction& forward, const Abstraction& backward, int h) {
  return forward.capacity(h) * backward.capacity(h);
}

int combined_code(const Abstraction& forward, const Abstraction& backward, const Observation& x) {
  return forward.decode(x) * backward.capacity(x.timestep()) + backward.decode(x);
}

}  // namespace kinlab
