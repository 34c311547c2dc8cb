#pragma once

#include <cmath>
#include <random>

#include "gruin/game.hpp"

namespace gruin::test {

inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline GameParams random_params(std::mt19937_64& rng, int K, double lo = 0.02, double hi = 0.98) {
  auto draw = [&] { return lo + (hi - lo) * uniform01(rng); };
  const double a = draw(), b = draw(), c = draw();
  return GameParams(a, b, c, K);
}

inline StationaryProfile random_profile(std::mt19937_64& rng, int K, bool deterministic = false) {
  auto space = enumerate_states(K);
  std::vector<Choice> entries(space->interior_count());
  for (auto& c : entries) {
    for (double& x : c) x = deterministic ? static_cast<double>(rng() & 1U) : uniform01(rng);
  }
  return StationaryProfile(space, std::move(entries));
}

// Two-player ruin: probability that a player holding `a` of `K` dollars,
// winning each round with probability q, ends with everything.
inline double two_player_ruin(int a, int K, double q) {
  if (std::abs(q - 0.5) < 1e-15) return static_cast<double>(a) / K;
  const double r = (1.0 - q) / q;
  return (1.0 - std::pow(r, a)) / (1.0 - std::pow(r, K));
}

}  // namespace gruin::test
