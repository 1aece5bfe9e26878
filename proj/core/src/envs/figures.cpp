#include "kinlab/envs/figures.hpp"

#include "kinlab/common/errors.hpp"

namespace kinlab {

namespace {

std::vector<std::vector<RewardDescriptor>> zero_rewards(int actions, int next) {
  return std::vector<std::vector<RewardDescriptor>>(actions, std::vector<RewardDescriptor>(next > 0 ? next : 1));
}

std::vector<std::vector<std::pair<ObsId, double>>> private_symbols(int states) {
  std::vector<std::vector<std::pair<ObsId, double>>> t;
  for (int s = 0; s < states; ++s) t.push_back({{static_cast<ObsId>(s), 1.0}});
  return t;
}

std::shared_ptr<const LatentBlockMDP> fig4a() {
  BlockMdpParts p;
  p.horizon = 3;
  p.num_actions = 2;
  p.states_per_step = {2, 4, 3};
  p.state_names = {"s1", "s2", "s3", "s4", "s5", "s6", "s7", "s8", "s9"};
  p.start = {0.5, 0.5};
  auto det = [](int n, int j) {
    std::vector<double> r(n, 0.0);
    r[j] = 1.0;
    return r;
  };
  // step 1 -> step 2 (locals: s3=0, s4=1, s5=2, s6=3)
  p.transitions.push_back({det(4, 0), det(4, 2)});  // s1
  p.transitions.push_back({det(4, 1), det(4, 3)});  // s2
  // step 2 -> step 3 (locals: s7=0, s8=1, s9=2)
  p.transitions.push_back({det(3, 0), det(3, 2)});  // s3
  p.transitions.push_back({det(3, 2), det(3, 1)});  // s4
  p.transitions.push_back({det(3, 1), det(3, 2)});  // s5
  p.transitions.push_back({det(3, 2), det(3, 0)});  // s6
  for (int i = 0; i < 3; ++i) p.transitions.push_back({{}, {}});
  for (int s = 0; s < 9; ++s) p.rewards.push_back(zero_rewards(2, s < 2 ? 4 : (s < 6 ? 3 : 0)));
  p.emission = DiscreteEmission{private_symbols(9)};
  return std::make_shared<const LatentBlockMDP>(std::move(p));
}

std::shared_ptr<const LatentBlockMDP> fig4b_chain(int depth) {
  if (depth < 1) throw ConfigurationError("fig4b_chain needs depth >= 1");
  BlockMdpParts p;
  p.horizon = depth + 1;
  p.num_actions = 2;
  for (int h = 1; h <= p.horizon; ++h) {
    const int n = h == 1 ? 2 : 3;
    p.states_per_step.push_back(n);
    p.state_names.push_back("g" + std::to_string(h) + ",1");
    p.state_names.push_back("g" + std::to_string(h) + ",2");
    if (n == 3) p.state_names.push_back("z" + std::to_string(h));
  }
  p.start = {0.5, 0.5};
  int total = 0;
  for (int h = 1; h <= p.horizon; ++h) {
    const int n = p.states_per_step[h - 1];
    total += n;
    for (int j = 0; j < n; ++j) {
      if (h == p.horizon) {
        p.transitions.push_back({{}, {}});
        p.rewards.push_back(zero_rewards(2, 0));
        continue;
      }
      const std::vector<double> good{0.5, 0.5, 0.0};
      const std::vector<double> bad{0.0, 0.0, 1.0};
      if (j == 0) p.transitions.push_back({good, bad});
      else if (j == 1) p.transitions.push_back({bad, good});
      else p.transitions.push_back({bad, bad});
      p.rewards.push_back(zero_rewards(2, 3));
    }
  }
  p.emission = DiscreteEmission{private_symbols(total)};
  return std::make_shared<const LatentBlockMDP>(std::move(p));
}

std::shared_ptr<const LatentBlockMDP> noisy_bits(int bits, double prob) {
  if (bits < 2 || bits > 20) throw ConfigurationError("noisy_bits supports 2 <= d <= 20");
  if (prob < 0.0 || prob > 1.0) throw ConfigurationError("noisy_bits state probability outside [0,1]");
  BlockMdpParts p;
  p.horizon = 1;
  p.num_actions = 1;
  p.states_per_step = {2};
  p.state_names = {"s1", "s2"};
  p.start = {prob, 1.0 - prob};
  p.transitions = {{{}}, {{}}};
  p.rewards = {zero_rewards(1, 0), zero_rewards(1, 0)};
  DiscreteEmission em;
  em.table.resize(2);
  const ObsId patterns = ObsId{1} << (bits - 1);
  const double q = 1.0 / static_cast<double>(patterns);
  for (int s = 0; s < 2; ++s)
    for (ObsId noise = 0; noise < patterns; ++noise) em.table[s].emplace_back((noise << 1) | s, q);
  p.emission = std::move(em);
  return std::make_shared<const LatentBlockMDP>(std::move(p));
}

}  // namespace

std::shared_ptr<const LatentBlockMDP> make_fig1(Fig1Variant variant) {
  BlockMdpParts p;
  p.horizon = 3;
  p.num_actions = 1;
  DiscreteEmission em;
  if (variant == Fig1Variant::Left) {
    p.states_per_step = {1, 1, 1};
    p.state_names = {"s1", "s2", "s3"};
    p.transitions = {{{1.0}}, {{1.0}}, {{}}};
    em.table = {{{0, 0.5}, {1, 0.5}}, {{2, 0.8}, {3, 0.2}}, {{4, 0.5}, {5, 0.5}}};
  } else {
    p.states_per_step = {1, 2, 1};
    p.state_names = {"s1", "s2a", "s2b", "s3"};
    p.transitions = {{{0.8, 0.2}}, {{1.0}}, {{1.0}}, {{}}};
    em.table = {{{0, 0.5}, {1, 0.5}}, {{2, 1.0}}, {{3, 1.0}}, {{4, 0.5}, {5, 0.5}}};
  }
  p.start = {1.0};
  p.emission = std::move(em);
  return std::make_shared<const LatentBlockMDP>(std::move(p));
}

CounterexampleKind parse_counterexample(const std::string& text) {
  // Accepted forms: "fig4a", "fig4b_chain:L", "noisy_bits:d:p".
  auto parts = std::vector<std::string>{};
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i)
    if (i == text.size() || text[i] == ':') {
      parts.push_back(text.substr(start, i - start));
      start = i + 1;
    }
  try {
    if (parts[0] == "fig4a" && parts.size() == 1) return CounterexampleKind::fig4a();
    if (parts[0] == "fig4b_chain") return CounterexampleKind::fig4b_chain(parts.size() > 1 ? std::stoi(parts[1]) : 1);
    if (parts[0] == "noisy_bits")
      return CounterexampleKind::noisy_bits(parts.size() > 1 ? std::stoi(parts[1]) : 4,
                                            parts.size() > 2 ? std::stod(parts[2]) : 0.5);
  } catch (const std::logic_error&) {
  }
  throw ConfigurationError("unknown counterexample '" + text + "'");
}

std::shared_ptr<const LatentBlockMDP> make_counterexample(const CounterexampleKind& kind) {
  switch (kind.tag) {
    case CounterexampleKind::Tag::Fig4a:
      return fig4a();
    case CounterexampleKind::Tag::Fig4bChain:
      return fig4b_chain(kind.depth);
    case CounterexampleKind::Tag::NoisyBits:
      return noisy_bits(kind.bits, kind.state_prob);
  }
  throw ConfigurationError("unknown counterexample kind");
}

}  // namespace kinlab
