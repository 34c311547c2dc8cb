#include "gruin/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <random>
#include <thread>
#include <vector>

#include <fmt/format.h>

namespace gruin {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

double uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

struct Batch {
  std::array<std::uint64_t, 3> wins{};
  std::uint64_t games = 0;
  double sum = 0.0;
  double sum_sq = 0.0;
};

class Runner {
 public:
  Runner(const GameParams& params, const StationaryProfile& profile, std::uint64_t cap)
      : params_(params), space_(profile.space()), cap_(cap) {
    choices_.assign(space_->size(), Choice{1.0, 1.0, 1.0});
    for (std::size_t j = 0; j < space_->interior_count(); ++j) choices_[space_->interior()[j]] = profile.at(j);
  }

  Batch run(const State& start, std::uint64_t games, std::uint64_t batch_seed) const {
    std::mt19937_64 rng(batch_seed);
    Batch b;
    for (std::uint64_t g = 0; g < games; ++g) {
      State s = start;
      std::uint64_t rounds = 0;
      int winner = -1;
      while (true) {
        for (int n = 0; n < 3; ++n) {
          if (s[n] == params_.K()) winner = n;
        }
        if (winner >= 0) break;
        if (++rounds > cap_) {
          throw SimulationDivergence(fmt::format("game from {} exceeded {} rounds", to_string(start), cap_));
        }
        step(s, rng);
      }
      ++b.wins[winner];
      ++b.games;
      const auto r = static_cast<double>(rounds);
      b.sum += r;
      b.sum_sq += r * r;
    }
    return b;
  }

 private:
  void step(State& s, std::mt19937_64& rng) const {
    std::array<int, 3> alive{};
    int count = 0;
    for (int n = 0; n < 3; ++n) {
      if (s[n] > 0) alive[count++] = n;
    }
    const int pick = std::min(count - 1, static_cast<int>(uniform(rng) * count));
    const int mover = alive[pick];
    int opponent;
    if (count == 2) {
      opponent = alive[1 - pick];
    } else {
      const double x = choices_[space_->index_of(s)][mover];
      opponent = uniform(rng) < x ? (mover + 1) % 3 : (mover + 2) % 3;
    }
    const bool mover_wins = uniform(rng) < params_.win_prob(player_at(mover), player_at(opponent));
    const int w = mover_wins ? mover : opponent;
    const int l = mover_wins ? opponent : mover;
    ++s[w];
    --s[l];
  }

  GameParams params_;
  std::shared_ptr<const StateSpace> space_;
  std::uint64_t cap_;
  std::vector<Choice> choices_;
};

}  // namespace

std::array<double, 3> SimulationResult::frequencies() const {
  std::array<double, 3> f{};
  if (games == 0) return f;
  for (int n = 0; n < 3; ++n) f[n] = static_cast<double>(wins[n]) / static_cast<double>(games);
  return f;
}

SimulationResult simulate(const GameParams& params, const StationaryProfile& profile, const State& start,
                          std::uint64_t games, std::uint64_t seed, const SimulationOptions& options) {
  if (games < 1) throw InvalidParameter("games must be at least 1");
  if (!profile.space() || profile.K() != params.K()) throw IncompleteProfile("profile does not match K");
  if (classify_state(start, params.K()).kind == StateKind::Terminal) {
    throw InvalidState(fmt::format("start state {} is terminal", to_string(start)));
  }
  const Runner runner(params, profile, options.round_cap);
  const std::uint64_t batches = (games + kBatchGames - 1) / kBatchGames;
  std::vector<Batch> parts(batches);
  auto work = [&](std::uint64_t b) {
    const std::uint64_t n = std::min(kBatchGames, games - b * kBatchGames);
    parts[b] = runner.run(start, n, splitmix64(seed + b * 0x9E3779B97F4A7C15ULL));
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(batches)));
  if (workers == 1) {
    for (std::uint64_t b = 0; b < batches; ++b) work(b);
  } else {
    std::vector<std::thread> pool;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::uint64_t b = w; b < batches; b += workers) work(b);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  SimulationResult out;
  out.seed = seed;
  out.start = start;
  double sum = 0.0, sum_sq = 0.0;
  for (const Batch& b : parts) {
    for (int n = 0; n < 3; ++n) out.wins[n] += b.wins[n];
    out.games += b.games;
    sum += b.sum;
    sum_sq += b.sum_sq;
  }
  const auto g = static_cast<double>(out.games);
  out.mean_rounds = sum / g;
  out.var_rounds = out.games > 1 ? std::max(0.0, (sum_sq - g * out.mean_rounds * out.mean_rounds) / (g - 1.0)) : 0.0;
  return out;
}

DurationEstimate estimate_duration(const GameParams& params, const StationaryProfile& profile, const State& start,
                                   std::uint64_t games, std::uint64_t seed, const SimulationOptions& options) {
  const SimulationResult r = simulate(params, profile, start, games, seed, options);
  DurationEstimate d;
  d.mean = r.mean_rounds;
  d.std_error = std::sqrt(r.var_rounds / static_cast<double>(r.games));
  d.ci_low = d.mean - 3.0 * d.std_error;
  d.ci_high = d.mean + 3.0 * d.std_error;
  return d;
}

}  // namespace gruin
