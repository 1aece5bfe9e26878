#pragma once

#include <memory>
#include <string>

#include "kinlab/block_mdp/mdp.hpp"

namespace kinlab {

enum class Fig1Variant { Left, Right };

// Three-step, one-action chain s1 -> s2 -> s3.  The left MDP's middle state
// emits symbol 2 with probability 0.8 and symbol 3 otherwise; the right MDP
// splits it into s2a (symbol 2, reached w.p. 0.8) and s2b (symbol 3).
std::shared_ptr<const LatentBlockMDP> make_fig1(Fig1Variant variant);

struct CounterexampleKind {
  enum class Tag { Fig4a, Fig4bChain, NoisyBits } tag = Tag::Fig4a;
  int depth = 1;          // fig4b_chain: number of gadget levels L
  int bits = 4;           // noisy_bits: observation width d
  double state_prob = 0.5;  // noisy_bits: P(first state)

  static CounterexampleKind fig4a() { return {}; }
  static CounterexampleKind fig4b_chain(int depth) { return {Tag::Fig4bChain, depth, 4, 0.5}; }
  static CounterexampleKind noisy_bits(int bits, double p) { return {Tag::NoisyBits, 1, bits, p}; }
};

CounterexampleKind parse_counterexample(const std::string& text);

// fig4a: s1,s2 | s3..s6 | s7,s8,s9 with two actions.
// fig4b_chain(L): H = L + 1; each level has a good pair (g1, g2) entered
//   uniformly, where g1 needs action 0 and g2 action 1 to stay good, plus a
//   bad sink from step 2 on.
// noisy_bits(d, p): H = 1, one action, two states; the observation id's low
//   bit is the state and the remaining d-1 bits are fair coins.
std::shared_ptr<const LatentBlockMDP> make_counterexample(const CounterexampleKind& kind);

}  // namespace kinlab
