#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace kinlab {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Seeds for per-episode / per-worker streams.  The result depends only on the
// master seed and the path, never on which thread asks.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = splitmix64(master);
  for (std::uint64_t p : path) s = splitmix64(s ^ splitmix64(p + 0x632BE59BD9B4E019ULL));
  return s;
}

inline Rng make_rng(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  return Rng(derive_seed(master, path));
}

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

inline int uniform_int(Rng& rng, int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); }

// Inverse-CDF draw from a discrete distribution.  Falls back to the last
// index with positive mass to absorb round-off.
inline int sample_index(const std::vector<double>& probs, Rng& rng) {
  double u = uniform01(rng);
  double acc = 0.0;
  int last = -1;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    acc += probs[i];
    last = static_cast<int>(i);
    if (u < acc) return last;
  }
  return last < 0 ? 0 : last;
}

}  // namespace kinlab
