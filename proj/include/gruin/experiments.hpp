#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "gruin/game.hpp"

namespace gruin {

// Random p vectors: free coordinates are uniform on (eps, 1 - eps); fixed
// coordinates are clamped into [eps, 1 - eps].
struct SamplingSpec {
  std::array<std::optional<double>, 3> fixed{};
  double eps = 1e-6;
};

double clamp_probability(double p, double eps);
std::array<double, 3> sample_p(const SamplingSpec& spec, std::mt19937_64& rng);

struct SweepConfig {
  int k_min = 3;
  int k_max = 9;
  int repetitions = 100;
  std::uint64_t seed = 1;
  SamplingSpec sampling;
  double tol = 1e-10;
  std::size_t max_iters = 150;
  bool certify_iterates = true;  // see MviOptions
  unsigned threads = 1;
};

struct SweepRow {
  int K = 0;
  int runs = 0;
  int converged = 0;
  double proportion() const { return runs > 0 ? static_cast<double>(converged) / runs : 0.0; }
};

// Fraction of certified MVI runs from the all-zeros seed, per K.
std::vector<SweepRow> run_sweep_convergence(const SweepConfig& cfg);
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

// Most balanced split of K, larger shares first: (3,3,3) for K=9.
State balanced_start(int K);

struct DeltaVConfig {
  int K = 9;
  std::optional<State> start;
  std::vector<std::array<double, 3>> p_list;
  std::uint64_t seed = 1;
  double eps = 1e-6;
  double tol = 1e-10;
  std::size_t max_iters = 100'000;
  unsigned threads = 1;
};

struct DeltaVRow {
  std::array<double, 3> p{};
  State start{};
  std::string status;               // MVI status
  std::array<double, 3> random_gap{};   // V(NE) - V(random strategy vs NE)
  std::array<double, 3> uniform_gap{};  // V(NE) - V(uniform strategy vs NE)
  bool ok() const { return status == "converged"; }
};

std::vector<DeltaVRow> run_delta_v(const DeltaVConfig& cfg);
void write_delta_v_csv(std::ostream& out, const std::vector<DeltaVRow>& rows);

}  // namespace gruin
