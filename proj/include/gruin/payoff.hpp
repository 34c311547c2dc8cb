#pragma once

#include <array>
#include <cstddef>
#include <memory>

#include <Eigen/Dense>

#include "gruin/game.hpp"

namespace gruin {

class SolverFailure : public GameError {
 public:
  using GameError::GameError;
  const char* kind() const noexcept override { return "solver-failure"; }
};

// Raised by iterative methods that hit their cap; carries the last iterate.
class NonConvergence : public GameError {
 public:
  NonConvergence(const std::string& what, Eigen::VectorXd last, std::size_t iterations)
      : GameError(what), last_(std::move(last)), iterations_(iterations) {}
  const char* kind() const noexcept override { return "non-convergence"; }
  const Eigen::VectorXd& last_iterate() const { return last_; }
  std::size_t iterations() const { return iterations_; }

 private:
  Eigen::VectorXd last_;
  std::size_t iterations_;
};

// Winning probability of one player from every state.
struct PayoffVector {
  Player player = Player::One;
  std::shared_ptr<const StateSpace> space;
  Eigen::VectorXd values;
  std::size_t iterations = 0;

  double operator[](std::size_t i) const { return values[static_cast<Eigen::Index>(i)]; }
  double at(const State& s) const { return values[static_cast<Eigen::Index>(space->index_of(s))]; }
};

struct SolverDefaults {
  static constexpr double kDirectResidual = 1e-11;
  static constexpr double kIterTol = 1e-10;
  static constexpr std::size_t kMaxIter = 1'000'000;
};

// Unit vector on the terminal state won by n.
Eigen::VectorXd terminal_indicator(std::size_t size, Player n);

// Transition matrix with the three terminal rows zeroed.
Eigen::MatrixXd transient_part(const TransitionMatrix& tm);

PayoffVector solve_payoff_direct(const TransitionMatrix& tm, Player n);

// Same as solve_payoff_direct for all three players with one factorization.
std::array<PayoffVector, 3> solve_all_direct(const TransitionMatrix& tm);

// Evaluates lim Pi^t by repeated squaring; `iterations` is the number of
// squarings and max_t caps the exponent t.
PayoffVector solve_payoff_power(const TransitionMatrix& tm, Player n,
                                double tol = SolverDefaults::kIterTol,
                                std::size_t max_t = SolverDefaults::kMaxIter);

// U <- Pi~ U + b from an arbitrary seed.
PayoffVector solve_payoff_fixed_point(const TransitionMatrix& tm, Player n, const Eigen::VectorXd& seed,
                                      double tol = SolverDefaults::kIterTol,
                                      std::size_t max_t = SolverDefaults::kMaxIter);

// Fundamental-matrix statistics of the absorbing chain. Rows are the
// transient (nonterminal) states in canonical order, i.e. state index - 3.
struct AbsorptionReport {
  std::shared_ptr<const StateSpace> space;
  Eigen::MatrixXd absorption;     // (N-3) x 3, columns = terminal states
  Eigen::VectorXd expected_time;  // rounds until absorption

  // Full-length payoff for player n: terminal entries are indicators.
  Eigen::VectorXd payoff(Player n) const;
};

AbsorptionReport absorption_report(const TransitionMatrix& tm);

// Closed-form K=3 payoffs for player n on all ten states, given the three
// choices at (1,1,1).
PayoffVector closed_form_k3(const GameParams& params, const Choice& x, Player n = Player::One);

}  // namespace gruin
