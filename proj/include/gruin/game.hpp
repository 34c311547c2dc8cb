#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace gruin {

// Error hierarchy shared by every module.
class GameError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "game-error"; }
};

class InvalidParameter : public GameError {
 public:
  using GameError::GameError;
  const char* kind() const noexcept override { return "invalid-parameter"; }
};

class InvalidState : public GameError {
 public:
  using GameError::GameError;
  const char* kind() const noexcept override { return "invalid-state"; }
};

class IncompleteProfile : public GameError {
 public:
  using GameError::GameError;
  const char* kind() const noexcept override { return "incomplete-profile"; }
};

enum class Player : int { One = 0, Two = 1, Three = 2 };

inline constexpr std::array<Player, 3> kPlayers{Player::One, Player::Two, Player::Three};

constexpr int index(Player n) { return static_cast<int>(n); }
constexpr Player player_at(int i) { return static_cast<Player>(i); }

// Total capital and the three cyclic pairwise win probabilities:
// p1 = P(1 beats 2), p2 = P(2 beats 3), p3 = P(3 beats 1).
class GameParams {
 public:
  GameParams(double p1, double p2, double p3, int K);

  double p1() const { return p_[0]; }
  double p2() const { return p_[1]; }
  double p3() const { return p_[2]; }
  const std::array<double, 3>& p() const { return p_; }
  int K() const { return K_; }

  // Probability that `winner` takes one dollar from `loser` when they play.
  double win_prob(Player winner, Player loser) const;

 private:
  std::array<double, 3> p_;
  int K_;
};

using State = std::array<int, 3>;

std::string to_string(const State& s);

enum class StateKind { Terminal, Interior, Boundary };

struct Classification {
  StateKind kind;
  Player winner = Player::One;  // meaningful only when kind == Terminal

  bool operator==(const Classification&) const = default;
};

Classification classify_state(const State& s, int K);

// States reachable in one round. Empty for terminal states.
std::vector<State> neighbors(const State& s);

// All capital splits for a given K. Indices 0, 1, 2 are (K,0,0), (0,K,0),
// (0,0,K); the rest follow in lexicographically descending (s1, s2) order.
class StateSpace {
 public:
  explicit StateSpace(int K);

  int K() const { return K_; }
  std::size_t size() const { return states_.size(); }
  const State& operator[](std::size_t i) const { return states_[i]; }
  const std::vector<State>& states() const { return states_; }

  std::size_t index_of(const State& s) const;
  bool contains(const State& s) const;

  // Interior states in canonical order; the position within this list is
  // the "interior index" used by profiles.
  const std::vector<std::size_t>& interior() const { return interior_; }
  std::size_t interior_count() const { return interior_.size(); }
  std::size_t boundary_count() const { return size() - interior_.size(); }

  // -1 when the state is not interior.
  long interior_index(std::size_t state_index) const { return interior_pos_[state_index]; }

  static std::size_t terminal_index(Player n) { return static_cast<std::size_t>(index(n)); }

 private:
  int K_;
  std::vector<State> states_;
  std::vector<std::size_t> lookup_;  // (s1, s2) -> state index
  std::vector<std::size_t> interior_;
  std::vector<long> interior_pos_;
};

std::shared_ptr<const StateSpace> enumerate_states(int K);

// Per-player selection probabilities at one interior state:
// x[0] = P(1 picks 2), x[1] = P(2 picks 3), x[2] = P(3 picks 1).
using Choice = std::array<double, 3>;

class StationaryProfile {
 public:
  StationaryProfile() = default;
  StationaryProfile(std::shared_ptr<const StateSpace> space, double fill);
  StationaryProfile(std::shared_ptr<const StateSpace> space, std::vector<Choice> entries);

  static StationaryProfile uniform(std::shared_ptr<const StateSpace> space) {
    return StationaryProfile(std::move(space), 0.5);
  }
  // Deterministic profile from a bit pattern: bit 3*j + n is player n's
  // choice at interior state j.
  static StationaryProfile from_bits(std::shared_ptr<const StateSpace> space,
                                     unsigned long long bits);

  const std::shared_ptr<const StateSpace>& space() const { return space_; }
  int K() const { return space_ ? space_->K() : 0; }
  std::size_t size() const { return entries_.size(); }

  const Choice& at(std::size_t interior_idx) const { return entries_.at(interior_idx); }
  const Choice& at_state(const State& s) const;
  double get(std::size_t interior_idx, Player n) const { return entries_.at(interior_idx)[index(n)]; }

  StationaryProfile with(std::size_t interior_idx, Player n, double value) const;
  StationaryProfile with_player(Player n, const std::vector<double>& values) const;
  std::vector<double> player_strategy(Player n) const;

  bool is_deterministic() const;
  bool operator==(const StationaryProfile& other) const;

 private:
  std::shared_ptr<const StateSpace> space_;
  std::vector<Choice> entries_;
};

// Dense row-stochastic matrix of the chain induced by (params, profile).
class TransitionMatrix {
 public:
  TransitionMatrix(GameParams params, std::shared_ptr<const StateSpace> space, Eigen::MatrixXd pi)
      : params_(params), space_(std::move(space)), pi_(std::move(pi)) {}

  const GameParams& params() const { return params_; }
  const StateSpace& space() const { return *space_; }
  const std::shared_ptr<const StateSpace>& space_ptr() const { return space_; }
  const Eigen::MatrixXd& matrix() const { return pi_; }
  double operator()(std::size_t from, std::size_t to) const { return pi_(from, to); }
  std::size_t size() const { return static_cast<std::size_t>(pi_.rows()); }

 private:
  GameParams params_;
  std::shared_ptr<const StateSpace> space_;
  Eigen::MatrixXd pi_;
};

// One nonzero transition out of a state.
struct Move {
  State to;
  double prob;
};

// Outgoing transitions of a state; terminal states loop to themselves.
// `choice` is ignored for boundary states, where the two survivors must
// play each other.
std::vector<Move> transitions(const GameParams& params, const State& s, const Choice& choice);

// Expected next-round value sum_{s'} pi(s, s') v(s') for an interior state,
// split by player n's choice: {value if x_n = 0, value if x_n = 1}. The row
// is affine in x_n, so any mixed choice interpolates these two values.
std::array<double, 2> interior_lookahead(const GameParams& params, const StateSpace& space,
                                         const State& s, const Choice& choice, Player n,
                                         const Eigen::VectorXd& v);

double row_value(const GameParams& params, const StateSpace& space, const State& s,
                 const Choice& choice, const Eigen::VectorXd& v);

TransitionMatrix build_transition_matrix(const GameParams& params, const StationaryProfile& profile);

}  // namespace gruin
