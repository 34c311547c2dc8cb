#include "gruin/game.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace gruin {

namespace {

// Player n's two possible opponents: {picked when x_n = 1, picked when x_n = 0}.
constexpr std::array<std::array<Player, 2>, 3> kOpponents{{
    {Player::Two, Player::Three},
    {Player::Three, Player::One},
    {Player::One, Player::Two},
}};

State transfer(const State& s, Player to, Player from) {
  State t = s;
  ++t[index(to)];
  --t[index(from)];
  return t;
}

void check_sum(const State& s, int K) {
  if (s[0] < 0 || s[1] < 0 || s[2] < 0 || s[0] + s[1] + s[2] != K) {
    throw InvalidState(fmt::format("state {} is not a split of K={}", to_string(s), K));
  }
}

// Value of a single match between a and b under v.
double match_value(const GameParams& params, const StateSpace& space, const State& s, Player a,
                   Player b, const Eigen::VectorXd& v) {
  return params.win_prob(a, b) * v[space.index_of(transfer(s, a, b))] +
         params.win_prob(b, a) * v[space.index_of(transfer(s, b, a))];
}

}  // namespace

GameParams::GameParams(double p1, double p2, double p3, int K) : p_{p1, p2, p3}, K_(K) {
  for (int i = 0; i < 3; ++i) {
    if (!(p_[i] > 0.0 && p_[i] < 1.0)) {
      throw InvalidParameter(fmt::format("p{} = {} must lie in the open interval (0,1)", i + 1, p_[i]));
    }
  }
  if (K < 3) throw InvalidParameter(fmt::format("K = {} must be at least 3", K));
}

double GameParams::win_prob(Player winner, Player loser) const {
  const int w = index(winner);
  const int l = index(loser);
  if (w == l) throw InvalidParameter("winner and loser must be different players");
  // Cyclic pairs (1,2), (2,3), (3,1) carry p_w directly.
  if ((w + 1) % 3 == l) return p_[w];
  return 1.0 - p_[l];
}

std::string to_string(const State& s) { return fmt::format("({},{},{})", s[0], s[1], s[2]); }

Classification classify_state(const State& s, int K) {
  check_sum(s, K);
  for (Player n : kPlayers) {
    if (s[index(n)] == K) return {StateKind::Terminal, n};
  }
  if (s[0] > 0 && s[1] > 0 && s[2] > 0) return {StateKind::Interior};
  return {StateKind::Boundary};
}

std::vector<State> neighbors(const State& s) {
  const int K = s[0] + s[1] + s[2];
  const auto cls = classify_state(s, K);
  std::vector<State> out;
  if (cls.kind == StateKind::Terminal) return out;
  for (Player a : kPlayers) {
    for (Player b : kPlayers) {
      if (a == b || s[index(a)] == 0 || s[index(b)] == 0) continue;
      out.push_back(transfer(s, a, b));
    }
  }
  return out;
}

StateSpace::StateSpace(int K) : K_(K) {
  if (K < 3) throw InvalidParameter(fmt::format("K = {} must be at least 3", K));
  const std::size_t side = static_cast<std::size_t>(K) + 1;
  lookup_.assign(side * side, static_cast<std::size_t>(-1));
  states_ = {{K, 0, 0}, {0, K, 0}, {0, 0, K}};
  for (int s1 = K; s1 >= 0; --s1) {
    for (int s2 = K - s1; s2 >= 0; --s2) {
      const State s{s1, s2, K - s1 - s2};
      if (s1 == K || s2 == K || s[2] == K) continue;
      states_.push_back(s);
    }
  }
  interior_pos_.assign(states_.size(), -1);
  for (std::size_t i = 0; i < states_.size(); ++i) {
    const State& s = states_[i];
    lookup_[static_cast<std::size_t>(s[0]) * side + static_cast<std::size_t>(s[1])] = i;
    if (s[0] > 0 && s[1] > 0 && s[2] > 0) {
      interior_pos_[i] = static_cast<long>(interior_.size());
      interior_.push_back(i);
    }
  }
}

bool StateSpace::contains(const State& s) const {
  return s[0] >= 0 && s[1] >= 0 && s[2] >= 0 && s[0] + s[1] + s[2] == K_;
}

std::size_t StateSpace::index_of(const State& s) const {
  check_sum(s, K_);
  const std::size_t side = static_cast<std::size_t>(K_) + 1;
  return lookup_[static_cast<std::size_t>(s[0]) * side + static_cast<std::size_t>(s[1])];
}

std::shared_ptr<const StateSpace> enumerate_states(int K) { return std::make_shared<const StateSpace>(K); }

StationaryProfile::StationaryProfile(std::shared_ptr<const StateSpace> space, double fill)
    : space_(std::move(space)) {
  if (!(fill >= 0.0 && fill <= 1.0)) throw InvalidParameter("profile entries must lie in [0,1]");
  entries_.assign(space_->interior_count(), Choice{fill, fill, fill});
}

StationaryProfile::StationaryProfile(std::shared_ptr<const StateSpace> space, std::vector<Choice> entries)
    : space_(std::move(space)), entries_(std::move(entries)) {
  if (entries_.size() != space_->interior_count()) {
    throw IncompleteProfile(fmt::format("profile has {} entries, K={} needs {}", entries_.size(),
                                        space_->K(), space_->interior_count()));
  }
  for (const Choice& c : entries_) {
    for (double x : c) {
      if (!(x >= 0.0 && x <= 1.0)) throw InvalidParameter(fmt::format("profile entry {} outside [0,1]", x));
    }
  }
}

StationaryProfile StationaryProfile::from_bits(std::shared_ptr<const StateSpace> space,
                                               unsigned long long bits) {
  std::vector<Choice> entries(space->interior_count());
  for (std::size_t j = 0; j < entries.size(); ++j) {
    for (int n = 0; n < 3; ++n) {
      entries[j][n] = ((bits >> (3 * j + n)) & 1ULL) ? 1.0 : 0.0;
    }
  }
  return StationaryProfile(std::move(space), std::move(entries));
}

const Choice& StationaryProfile::at_state(const State& s) const {
  const long j = space_->interior_index(space_->index_of(s));
  if (j < 0) throw InvalidState(fmt::format("{} is not an interior state", to_string(s)));
  return entries_[static_cast<std::size_t>(j)];
}

StationaryProfile StationaryProfile::with(std::size_t interior_idx, Player n, double value) const {
  StationaryProfile out = *this;
  out.entries_.at(interior_idx)[index(n)] = value;
  return out;
}

StationaryProfile StationaryProfile::with_player(Player n, const std::vector<double>& values) const {
  if (values.size() != entries_.size()) throw IncompleteProfile("strategy length does not match interior count");
  StationaryProfile out = *this;
  for (std::size_t j = 0; j < values.size(); ++j) out.entries_[j][index(n)] = values[j];
  return out;
}

std::vector<double> StationaryProfile::player_strategy(Player n) const {
  std::vector<double> out(entries_.size());
  for (std::size_t j = 0; j < entries_.size(); ++j) out[j] = entries_[j][index(n)];
  return out;
}

bool StationaryProfile::is_deterministic() const {
  return std::all_of(entries_.begin(), entries_.end(), [](const Choice& c) {
    return std::all_of(c.begin(), c.end(), [](double x) { return x == 0.0 || x == 1.0; });
  });
}

bool StationaryProfile::operator==(const StationaryProfile& other) const {
  return K() == other.K() && entries_ == other.entries_;
}

std::vector<Move> transitions(const GameParams& params, const State& s, const Choice& choice) {
  const auto cls = classify_state(s, params.K());
  std::vector<Move> out;
  auto add = [&out](const State& to, double prob) {
    if (prob <= 0.0) return;
    for (Move& m : out) {
      if (m.to == to) {
        m.prob += prob;
        return;
      }
    }
    out.push_back({to, prob});
  };
  auto play = [&](Player a, Player b, double weight) {
    add(transfer(s, a, b), weight * params.win_prob(a, b));
    add(transfer(s, b, a), weight * params.win_prob(b, a));
  };

  switch (cls.kind) {
    case StateKind::Terminal:
      out.push_back({s, 1.0});
      break;
    case StateKind::Boundary: {
      std::array<Player, 2> alive{};
      int k = 0;
      for (Player n : kPlayers) {
        if (s[index(n)] > 0) alive[k++] = n;
      }
      play(alive[0], alive[1], 1.0);
      break;
    }
    case StateKind::Interior:
      for (Player m : kPlayers) {
        const double x = choice[index(m)];
        play(m, kOpponents[index(m)][0], x / 3.0);
        play(m, kOpponents[index(m)][1], (1.0 - x) / 3.0);
      }
      break;
  }
  return out;
}

std::array<double, 2> interior_lookahead(const GameParams& params, const StateSpace& space,
                                         const State& s, const Choice& choice, Player n,
                                         const Eigen::VectorXd& v) {
  double rest = 0.0;
  for (Player m : kPlayers) {
    if (m == n) continue;
    const double x = choice[index(m)];
    rest += x * match_value(params, space, s, m, kOpponents[index(m)][0], v) +
            (1.0 - x) * match_value(params, space, s, m, kOpponents[index(m)][1], v);
  }
  const double pick_first = match_value(params, space, s, n, kOpponents[index(n)][0], v);
  const double pick_second = match_value(params, space, s, n, kOpponents[index(n)][1], v);
  return {(rest + pick_second) / 3.0, (rest + pick_first) / 3.0};
}

double row_value(const GameParams& params, const StateSpace& space, const State& s,
                 const Choice& choice, const Eigen::VectorXd& v) {
  double acc = 0.0;
  for (const Move& m : transitions(params, s, choice)) acc += m.prob * v[space.index_of(m.to)];
  return acc;
}

TransitionMatrix build_transition_matrix(const GameParams& params, const StationaryProfile& profile) {
  const auto& space = profile.space();
  if (!space || space->K() != params.K()) {
    throw IncompleteProfile(fmt::format("profile does not cover the interior states of K={}", params.K()));
  }
  if (profile.size() != space->interior_count()) {
    throw IncompleteProfile("profile is missing interior entries");
  }
  const auto n = static_cast<Eigen::Index>(space->size());
  Eigen::MatrixXd pi = Eigen::MatrixXd::Zero(n, n);
  const Choice forced{1.0, 1.0, 1.0};
  for (std::size_t i = 0; i < space->size(); ++i) {
    const long j = space->interior_index(i);
    const Choice& c = j >= 0 ? profile.at(static_cast<std::size_t>(j)) : forced;
    for (const Move& m : transitions(params, (*space)[i], c)) {
      pi(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(space->index_of(m.to))) += m.prob;
    }
  }
  return TransitionMatrix(params, space, std::move(pi));
}

}  // namespace gruin
