#include "kinlab/explorers/recovery.hpp"

#include "kinlab/common/errors.hpp"
#include "kinlab/common/parallel.hpp"

namespace kinlab {

std::uint64_t AbstractTransitions::row_count(int i, Action a) const {
  std::uint64_t s = 0;
  const std::size_t base = (static_cast<std::size_t>(i) * num_actions + a) * to_codes;
  for (int j = 0; j < to_codes; ++j) s += counts[base + j];
  return s;
}

std::vector<double> AbstractTransitions::row(int i, Action a) const {
  const std::uint64_t total = row_count(i, a);
  if (total == 0) return {};
  std::vector<double> r(static_cast<std::size_t>(to_codes));
  const std::size_t base = (static_cast<std::size_t>(i) * num_actions + a) * to_codes;
  for (int j = 0; j < to_codes; ++j) r[j] = static_cast<double>(counts[base + j]) / static_cast<double>(total);
  return r;
}

nlohmann::json AbstractDynamics::to_json() const {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& s : steps) {
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < s.from_codes; ++i)
      for (Action a = 0; a < s.num_actions; ++a) {
        const auto n = s.row_count(i, a);
        if (n == 0) continue;
        rows.push_back({{"i", i}, {"a", a}, {"count", n}, {"T", s.row(i, a)}});
      }
    out.push_back({{"h", s.h}, {"from_codes", s.from_codes}, {"to_codes", s.to_codes}, {"rows", rows}});
  }
  return {{"steps", out}};
}

AbstractDynamics recover_dynamics(const Environment& env, const std::vector<PolicyCover>& covers,
                                  const Abstraction& forward, const Abstraction& backward, std::size_t n_per_step,
                                  std::uint64_t seed) {
  const int H = env.horizon();
  const int K = env.num_actions();
  if (static_cast<int>(covers.size()) < H - 1 || forward.horizon() != H || backward.horizon() != H)
    throw ConfigurationError("dynamics recovery needs covers and abstractions for every step");
  const auto uniform = std::make_shared<UniformDecider>(K);
  AbstractDynamics dyn;
  for (int h = 1; h < H; ++h) {
    AbstractTransitions t;
    t.h = h;
    t.from_codes = combined_capacity(forward, backward, h);
    t.to_codes = combined_capacity(forward, backward, h + 1);
    t.num_actions = K;
    std::vector<std::size_t> cell(n_per_step);
    const auto& cover = covers[h - 1];
    parallel_for(n_per_step, [&](std::size_t k) {
      Rng rng = make_rng(seed, {static_cast<std::uint64_t>(h), k});
      NonstationaryPolicy pol;
      if (!cover.policies.empty()) {
        const auto& p = cover.policies[static_cast<std::size_t>(uniform_int(rng, static_cast<int>(cover.policies.size())))];
        pol = p.prefix(h - 1);
      } else if (h > 1) {
        throw ConfigurationError("empty cover at step " + std::to_string(h));
      }
      const Episode ep = env.run(pol.then(uniform), h, rng);
      const int i = combined_code(forward, backward, ep.observations[h - 1]);
      const int j = combined_code(forward, backward, ep.observations[h]);
      cell[k] = (static_cast<std::size_t>(i) * K + ep.actions[h - 1]) * t.to_codes + j;
    });
    t.counts.assign(static_cast<std::size_t>(t.from_codes) * K * t.to_codes, 0);
    for (auto c : cell) ++t.counts[c];
    dyn.steps.push_back(std::move(t));
  }
  return dyn;
}

}  // namespace kinlab
