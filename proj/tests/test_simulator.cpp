#include <doctest.h>

#include "gruin/payoff.hpp"
#include "gruin/simulator.hpp"
#include "support.hpp"

using namespace gruin;

namespace {

double sigma(double v, std::uint64_t games) { return std::sqrt(v * (1.0 - v) / static_cast<double>(games)); }

}  // namespace

TEST_CASE("symmetric game splits evenly") {
  const auto space = enumerate_states(3);
  std::mt19937_64 rng(1);
  const auto r = simulate(GameParams(0.5, 0.5, 0.5, 3), test::random_profile(rng, 3), {1, 1, 1}, 100000, 7);
  CHECK(r.wins[0] + r.wins[1] + r.wins[2] == r.games);
  const auto f = r.frequencies();
  CHECK(f[0] + f[1] + f[2] == doctest::Approx(1.0));
  for (double x : f) CHECK(std::abs(x - 1.0 / 3) < 3 * sigma(1.0 / 3, r.games));
}

TEST_CASE("two-player phase at even odds") {
  const auto r = simulate(GameParams(0.5, 0.2, 0.7, 3), StationaryProfile::uniform(enumerate_states(3)), {2, 1, 0},
                          100000, 99);
  CHECK(std::abs(r.frequencies()[0] - 2.0 / 3) < 3 * sigma(2.0 / 3, r.games));
  CHECK(r.wins[2] == 0);
}

TEST_CASE("frequencies track the exact payoffs") {
  std::mt19937_64 rng(17);
  int violations = 0;
  for (int trial = 0; trial < 10; ++trial) {
    const int K = 3 + trial % 4;
    const auto params = test::random_params(rng, K);
    const auto profile = test::random_profile(rng, K);
    const auto space = profile.space();
    const State start = (*space)[space->interior()[rng() % space->interior_count()]];
    const auto exact = solve_all_direct(build_transition_matrix(params, profile));
    const auto r = simulate(params, profile, start, 20000, 1000 + trial, {10'000'000, 2});
    for (int n = 0; n < 3; ++n) {
      const double v = exact[n].at(start);
      if (std::abs(r.frequencies()[n] - v) > 3 * sigma(v, r.games) + 1e-12) ++violations;
    }
  }
  CHECK(violations <= 2);
}

TEST_CASE("results are reproducible and thread independent") {
  const GameParams g(0.3, 0.7, 0.45, 6);
  const auto profile = StationaryProfile::uniform(enumerate_states(6));
  const auto a = simulate(g, profile, {2, 2, 2}, 10000, 5, {10'000'000, 1});
  const auto b = simulate(g, profile, {2, 2, 2}, 10000, 5, {10'000'000, 4});
  const auto c = simulate(g, profile, {2, 2, 2}, 10000, 6);
  CHECK(a == b);
  CHECK_FALSE(a == c);
  CHECK(a.seed == 5);
  CHECK(a.start == State{2, 2, 2});
}

TEST_CASE("simulator errors") {
  const GameParams g(0.3, 0.7, 0.45, 9);
  const auto profile = StationaryProfile::uniform(enumerate_states(9));
  CHECK_THROWS_AS(simulate(g, profile, {3, 3, 3}, 10, 1, {1, 1}), SimulationDivergence);
  CHECK_THROWS_AS(simulate(g, profile, {3, 3, 3}, 0, 1), InvalidParameter);
  CHECK_THROWS_AS(simulate(g, profile, {9, 0, 0}, 10, 1), InvalidState);
  CHECK_THROWS_AS(simulate(g, profile, {3, 3, 4}, 10, 1), InvalidState);
  CHECK_THROWS_AS(simulate(g, StationaryProfile::uniform(enumerate_states(4)), {3, 3, 3}, 10, 1), IncompleteProfile);
}

TEST_CASE("durations agree with the fundamental matrix") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 6; ++trial) {
    const int K = 3 + trial % 3;
    const auto params = test::random_params(rng, K);
    const auto profile = test::random_profile(rng, K);
    const auto space = profile.space();
    const auto report = absorption_report(build_transition_matrix(params, profile));
    const std::size_t i = space->interior()[0];
    const auto d = estimate_duration(params, profile, (*space)[i], 20000, 300 + trial);
    const double expected = report.expected_time[static_cast<Eigen::Index>(i - 3)];
    CHECK(d.mean >= 1.0);
    CHECK(d.ci_low == doctest::Approx(d.mean - 3 * d.std_error));
    CHECK(d.ci_low <= expected);
    CHECK(expected <= d.ci_high);
  }
}

TEST_CASE("near-certain win ends in one round") {
  const auto d = estimate_duration(GameParams(1 - 1e-9, 0.5, 0.5, 3), StationaryProfile::uniform(enumerate_states(3)),
                                   {2, 1, 0}, 1000, 3);
  CHECK(d.mean == doctest::Approx(1.0).epsilon(1e-6));
}
