#pragma once

#include <array>
#include <cstdint>

#include "gruin/game.hpp"

namespace gruin {

class SimulationDivergence : public GameError {
 public:
  using GameError::GameError;
  const char* kind() const noexcept override { return "simulation-divergence"; }
};

struct SimulationResult {
  std::array<std::uint64_t, 3> wins{};
  std::uint64_t games = 0;
  std::uint64_t seed = 0;
  State start{};
  double mean_rounds = 0.0;
  double var_rounds = 0.0;  // unbiased sample variance

  std::array<double, 3> frequencies() const;
  bool operator==(const SimulationResult&) const = default;
};

struct SimulationOptions {
  std::uint64_t round_cap = 10'000'000;
  unsigned threads = 1;
};

// Games are played in fixed batches of kBatchGames. Batch b draws from a
// std::mt19937_64 seeded with splitmix64(seed + b * 0x9E3779B97F4A7C15);
// uniforms are (word >> 11) * 2^-53. Results do not depend on `threads`.
inline constexpr std::uint64_t kBatchGames = 4096;

SimulationResult simulate(const GameParams& params, const StationaryProfile& profile, const State& start,
                          std::uint64_t games, std::uint64_t seed, const SimulationOptions& options = {});

struct DurationEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  double ci_low = 0.0;   // mean - 3 standard errors
  double ci_high = 0.0;  // mean + 3 standard errors
};

DurationEstimate estimate_duration(const GameParams& params, const StationaryProfile& profile, const State& start,
                                   std::uint64_t games, std::uint64_t seed, const SimulationOptions& options = {});

}  // namespace gruin
