#include "kinlab/block_mdp/emission.hpp"

#include <algorithm>

#include "kinlab/block_mdp/latent_access.hpp"

namespace kinlab {

ObsId DiscreteEmission::max_id() const {
  ObsId m = -1;
  for (const auto& row : table)
    for (const auto& [id, p] : row) m = std::max(m, id);
  return m;
}

Eigen::VectorXd ObservationFeatures::operator()(const Observation& x) const {
  Eigen::VectorXd out(dim());
  write(x, out);
  return out;
}

void ObservationFeatures::write(const Observation& x, Eigen::Ref<Eigen::VectorXd> out) const {
  if (discrete_dim > 0) {
    out.setZero();
    ObsId id = x.id();
    if (id >= 0 && id < discrete_dim) out[static_cast<Eigen::Index>(id)] = 1.0;
  } else {
    out = x.vec();
  }
}

Observation emit(const EmissionModel& em, StateId s, int h, Rng& rng) {
  if (const auto* d = std::get_if<DiscreteEmission>(&em)) {
    const auto& row = d->table[s];
    double u = uniform01(rng);
    double acc = 0.0;
    ObsId chosen = row.back().first;
    for (const auto& [id, p] : row) {
      acc += p;
      if (u < acc) {
        chosen = id;
        break;
      }
    }
    return LatentAccess::make(h, chosen, s);
  }
  const auto& g = std::get<RotatedGaussianEmission>(em);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(g.dim);
  v[g.slot[s]] = 1.0;
  v[3 + (h - 1)] = 1.0;
  std::normal_distribution<double> noise(0.0, g.noise_std);
  const int noisy = g.horizon + 3;
  for (int i = 0; i < noisy; ++i) v[i] += noise(rng);
  Eigen::VectorXd y = g.rotation * v;
  return LatentAccess::make(h, std::move(y), s);
}

}  // namespace kinlab
