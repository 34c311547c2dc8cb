#include <doctest.h>

#include <algorithm>
#include <map>

#include "gruin/game.hpp"
#include "support.hpp"

using namespace gruin;

namespace {

std::map<State, double> row_map(const GameParams& params, const State& s, const Choice& x) {
  std::map<State, double> out;
  for (const auto& m : transitions(params, s, x)) out[m.to] += m.prob;
  return out;
}

}  // namespace

TEST_CASE("parameters are validated") {
  CHECK_NOTHROW(GameParams(0.3, 0.5, 0.7, 3));
  CHECK_THROWS_AS(GameParams(0.0, 0.5, 0.5, 3), InvalidParameter);
  CHECK_THROWS_AS(GameParams(0.5, 1.0, 0.5, 3), InvalidParameter);
  CHECK_THROWS_AS(GameParams(0.5, 0.5, -0.1, 3), InvalidParameter);
  CHECK_THROWS_AS(GameParams(0.5, 0.5, 0.5, 2), InvalidParameter);

  const GameParams g(0.2, 0.3, 0.9, 4);
  CHECK(g.win_prob(Player::One, Player::Two) == doctest::Approx(0.2));
  CHECK(g.win_prob(Player::Two, Player::One) == doctest::Approx(0.8));
  CHECK(g.win_prob(Player::Two, Player::Three) == doctest::Approx(0.3));
  CHECK(g.win_prob(Player::Three, Player::Two) == doctest::Approx(0.7));
  CHECK(g.win_prob(Player::Three, Player::One) == doctest::Approx(0.9));
  CHECK(g.win_prob(Player::One, Player::Three) == doctest::Approx(0.1));
  CHECK_THROWS_AS(g.win_prob(Player::One, Player::One), InvalidParameter);
}

TEST_CASE("state classification") {
  CHECK(classify_state({3, 0, 0}, 3) == Classification{StateKind::Terminal, Player::One});
  CHECK(classify_state({0, 0, 3}, 3) == Classification{StateKind::Terminal, Player::Three});
  CHECK(classify_state({1, 1, 1}, 3).kind == StateKind::Interior);
  CHECK(classify_state({2, 0, 1}, 3).kind == StateKind::Boundary);
  CHECK_THROWS_AS(classify_state({1, 1, 0}, 3), InvalidState);
  CHECK_THROWS_AS(classify_state({4, -1, 0}, 3), InvalidState);
}

TEST_CASE("state space sizes and ordering") {
  for (int K = 3; K <= 9; ++K) {
    const auto space = enumerate_states(K);
    CHECK(space->size() == static_cast<std::size_t>((K + 1) * (K + 2) / 2));
    CHECK(space->interior_count() == static_cast<std::size_t>((K - 1) * (K - 2) / 2));
    for (std::size_t i = 0; i < space->size(); ++i) CHECK(space->index_of((*space)[i]) == i);
  }
  const auto space = enumerate_states(3);
  const std::vector<State> expected{{3, 0, 0}, {0, 3, 0}, {0, 0, 3}, {2, 1, 0}, {2, 0, 1},
                                    {1, 2, 0}, {1, 1, 1}, {1, 0, 2}, {0, 2, 1}, {0, 1, 2}};
  CHECK(space->states() == expected);
  REQUIRE(space->interior_count() == 1);
  CHECK(space->interior()[0] == 6);
  CHECK(space->interior_index(6) == 0);
  CHECK(space->interior_index(3) == -1);
  CHECK(StateSpace::terminal_index(Player::Two) == 1);
  CHECK_FALSE(space->contains({2, 2, 0}));
  CHECK_THROWS_AS(enumerate_states(2), InvalidParameter);
}

TEST_CASE("neighbors") {
  CHECK(neighbors({3, 0, 0}).empty());
  auto b = neighbors({2, 1, 0});
  std::sort(b.begin(), b.end());
  CHECK(b == std::vector<State>{{1, 2, 0}, {3, 0, 0}});
  CHECK(neighbors({1, 1, 1}).size() == 6);
}

TEST_CASE("interior transition row") {
  const GameParams g(0.2, 0.3, 0.9, 3);
  const auto row = row_map(g, {1, 1, 1}, {1.0, 0.0, 0.5});
  CHECK(row.size() == 6);
  CHECK(row.at({2, 0, 1}) == doctest::Approx(2.0 / 3 * 0.2));
  CHECK(row.at({0, 2, 1}) == doctest::Approx(2.0 / 3 * 0.8));
  CHECK(row.at({1, 2, 0}) == doctest::Approx(1.0 / 6 * 0.3));
  CHECK(row.at({1, 0, 2}) == doctest::Approx(1.0 / 6 * 0.7));
  CHECK(row.at({0, 1, 2}) == doctest::Approx(1.0 / 6 * 0.9));
  CHECK(row.at({2, 1, 0}) == doctest::Approx(1.0 / 6 * 0.1));
}

TEST_CASE("boundary rows ignore the profile") {
  const GameParams g(0.2, 0.3, 0.9, 3);
  for (const Choice& x : {Choice{0, 0, 0}, Choice{1, 1, 1}, Choice{0.3, 0.6, 0.1}}) {
    auto r = row_map(g, {2, 0, 1}, x);
    CHECK(r.at({3, 0, 0}) == doctest::Approx(0.1));
    CHECK(r.at({1, 0, 2}) == doctest::Approx(0.9));
    r = row_map(g, {0, 1, 2}, x);
    CHECK(r.at({0, 2, 1}) == doctest::Approx(0.3));
    r = row_map(g, {1, 2, 0}, x);
    CHECK(r.at({2, 1, 0}) == doctest::Approx(0.2));
  }
  const auto t = transitions(g, {3, 0, 0}, {});
  REQUIRE(t.size() == 1);
  CHECK(t[0].to == State{3, 0, 0});
  CHECK(t[0].prob == 1.0);
}

TEST_CASE("profiles") {
  const auto space = enumerate_states(4);
  CHECK_THROWS_AS(StationaryProfile(space, std::vector<Choice>(2)), IncompleteProfile);
  CHECK_THROWS_AS(StationaryProfile(space, 1.5), InvalidParameter);

  const auto u = StationaryProfile::uniform(space);
  CHECK(u.size() == 3);
  CHECK(u.get(2, Player::Three) == 0.5);
  CHECK_FALSE(u.is_deterministic());

  const auto b = StationaryProfile::from_bits(space, 0b000'010'001);
  CHECK(b.is_deterministic());
  CHECK(b.get(0, Player::One) == 1.0);
  CHECK(b.get(1, Player::Two) == 1.0);
  CHECK(b.get(1, Player::One) == 0.0);
  CHECK(b.player_strategy(Player::One) == std::vector<double>{1, 0, 0});

  const auto c = b.with(2, Player::Three, 1.0);
  CHECK(c.get(2, Player::Three) == 1.0);
  CHECK_FALSE(c == b);
  CHECK(c.with(2, Player::Three, 0.0) == b);
  CHECK(b.with_player(Player::Two, {0, 0, 0}).get(1, Player::Two) == 0.0);
  CHECK_THROWS_AS(b.with_player(Player::Two, {0, 0}), IncompleteProfile);
  CHECK(b.at_state({2, 1, 1}) == b.at(0));
  CHECK_THROWS_AS(b.at_state({3, 1, 0}), InvalidState);
}

TEST_CASE("transition matrix is stochastic with absorbing terminals") {
  std::mt19937_64 rng(11);
  for (int K = 3; K <= 9; ++K) {
    const auto params = test::random_params(rng, K);
    const auto tm = build_transition_matrix(params, test::random_profile(rng, K));
    const auto& P = tm.matrix();
    CHECK((P.array() >= 0.0).all());
    CHECK((P.rowwise().sum().array() - 1.0).abs().maxCoeff() < 1e-14);
    for (int t = 0; t < 3; ++t) CHECK(P(t, t) == 1.0);
  }
  CHECK_THROWS_AS(build_transition_matrix(GameParams(0.5, 0.5, 0.5, 4), StationaryProfile::uniform(enumerate_states(3))),
                  IncompleteProfile);
}

TEST_CASE("rows depend on x only through pairwise differences") {
  std::mt19937_64 rng(5);
  const auto params = test::random_params(rng, 6);
  const auto space = enumerate_states(6);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Choice> a(space->interior_count()), b(space->interior_count());
    for (std::size_t j = 0; j < a.size(); ++j) {
      const double shift = 0.4 * test::uniform01(rng);
      for (int n = 0; n < 3; ++n) {
        a[j][n] = 0.6 * test::uniform01(rng);
        b[j][n] = a[j][n] + shift;
      }
    }
    const auto Pa = build_transition_matrix(params, StationaryProfile(space, a)).matrix();
    const auto Pb = build_transition_matrix(params, StationaryProfile(space, b)).matrix();
    CHECK((Pa - Pb).cwiseAbs().maxCoeff() < 1e-15);
  }
}

TEST_CASE("lookahead interpolates the row value") {
  std::mt19937_64 rng(8);
  const auto params = test::random_params(rng, 5);
  const auto space = enumerate_states(5);
  Eigen::VectorXd v = Eigen::VectorXd::Random(static_cast<Eigen::Index>(space->size()));
  const State s{2, 2, 1};
  Choice x{0.3, 0.8, 0.1};
  for (Player n : kPlayers) {
    const auto la = interior_lookahead(params, *space, s, x, n, v);
    const double t = x[index(n)];
    CHECK(row_value(params, *space, s, x, v) == doctest::Approx((1 - t) * la[0] + t * la[1]).epsilon(1e-13));
  }
}
