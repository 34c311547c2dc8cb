#include "gruin/payoff.hpp"

#include <fmt/format.h>

namespace gruin {

namespace {

constexpr Eigen::Index kTerminals = 3;

Eigen::Index terminal_col(Player n) { return static_cast<Eigen::Index>(StateSpace::terminal_index(n)); }

void check_residual(const Eigen::MatrixXd& a, const Eigen::MatrixXd& x, const Eigen::MatrixXd& b) {
  const double residual = (a * x - b).cwiseAbs().maxCoeff();
  if (!(residual <= SolverDefaults::kDirectResidual)) {
    throw SolverFailure(fmt::format("direct solve residual {:.3e} exceeds {:.0e}", residual,
                                    SolverDefaults::kDirectResidual));
  }
}

// V_1 for the canonical player with p = (a, b, c) and choices y at (1,1,1),
// on the relabelled state (t1, t2, t3).
double k3_player_one(double a, double b, double c, const Choice& y, const State& t) {
  const double da = 1.0 - a + a * a;
  const double dc = 1.0 - c + c * c;
  const double v210 = a / da;
  const double v120 = a * a / da;
  const double v201 = (1.0 - c) / dc;
  const double v102 = (1.0 - 2.0 * c + c * c) / dc;
  if (t == State{3, 0, 0}) return 1.0;
  if (t[0] == 0) return 0.0;
  if (t == State{2, 1, 0}) return v210;
  if (t == State{1, 2, 0}) return v120;
  if (t == State{2, 0, 1}) return v201;
  if (t == State{1, 0, 2}) return v102;
  return (1.0 - c) * (y[0] + 1.0 - y[1]) * a / (3.0 * dc) +
         a * (y[2] + 1.0 - y[0]) * (1.0 - c) / (3.0 * da) +
         (1.0 - c) * (1.0 - c) * (y[1] + 1.0 - y[2]) * (1.0 - b) / (3.0 * dc) +
         a * a * (y[1] + 1.0 - y[2]) * b / (3.0 * da);
}

}  // namespace

Eigen::VectorXd terminal_indicator(std::size_t size, Player n) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size));
  b[terminal_col(n)] = 1.0;
  return b;
}

Eigen::MatrixXd transient_part(const TransitionMatrix& tm) {
  Eigen::MatrixXd m = tm.matrix();
  m.topRows(kTerminals).setZero();
  return m;
}

std::array<PayoffVector, 3> solve_all_direct(const TransitionMatrix& tm) {
  const auto n = static_cast<Eigen::Index>(tm.size());
  const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n) - transient_part(tm);
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n, kTerminals);
  rhs.topRows(kTerminals).setIdentity();
  const Eigen::MatrixXd x = a.partialPivLu().solve(rhs);
  check_residual(a, x, rhs);
  std::array<PayoffVector, 3> out;
  for (Player p : kPlayers) {
    out[index(p)] = PayoffVector{p, tm.space_ptr(), x.col(terminal_col(p)), 0};
  }
  return out;
}

PayoffVector solve_payoff_direct(const TransitionMatrix& tm, Player n) {
  const auto size = static_cast<Eigen::Index>(tm.size());
  const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(size, size) - transient_part(tm);
  const Eigen::VectorXd b = terminal_indicator(tm.size(), n);
  const Eigen::VectorXd x = a.partialPivLu().solve(b);
  check_residual(a, x, b);
  return {n, tm.space_ptr(), x, 0};
}

PayoffVector solve_payoff_power(const TransitionMatrix& tm, Player n, double tol, std::size_t max_t) {
  if (!(tol > 0.0)) throw InvalidParameter("tol must be positive");
  Eigen::MatrixXd power = tm.matrix();
  Eigen::VectorXd column = power.col(terminal_col(n));
  std::size_t exponent = 1;
  std::size_t squarings = 0;
  while (true) {
    if (exponent > max_t / 2) {
      throw NonConvergence(fmt::format("matrix power did not settle below {:.0e} by t={}", tol, max_t),
                           column, squarings);
    }
    power = power * power;
    exponent *= 2;
    ++squarings;
    const Eigen::VectorXd next = power.col(terminal_col(n));
    const double change = (next - column).cwiseAbs().maxCoeff();
    column = next;
    if (change < tol) break;
  }
  return {n, tm.space_ptr(), column, squarings};
}

PayoffVector solve_payoff_fixed_point(const TransitionMatrix& tm, Player n, const Eigen::VectorXd& seed,
                                      double tol, std::size_t max_t) {
  if (!(tol > 0.0)) throw InvalidParameter("tol must be positive");
  if (seed.size() != static_cast<Eigen::Index>(tm.size())) {
    throw InvalidParameter("seed length does not match the state space");
  }
  const Eigen::MatrixXd pt = transient_part(tm);
  const Eigen::VectorXd b = terminal_indicator(tm.size(), n);
  Eigen::VectorXd u = seed;
  for (std::size_t t = 1; t <= max_t; ++t) {
    Eigen::VectorXd next = pt * u + b;
    const double change = (next - u).cwiseAbs().maxCoeff();
    u = std::move(next);
    if (change < tol) return {n, tm.space_ptr(), u, t};
  }
  throw NonConvergence(fmt::format("fixed-point iteration did not settle below {:.0e} in {} steps", tol, max_t),
                       u, max_t);
}

Eigen::VectorXd AbsorptionReport::payoff(Player n) const {
  Eigen::VectorXd v(absorption.rows() + kTerminals);
  v.head(kTerminals) = terminal_indicator(kTerminals, n);
  v.tail(absorption.rows()) = absorption.col(terminal_col(n));
  return v;
}

AbsorptionReport absorption_report(const TransitionMatrix& tm) {
  const Eigen::Index m = static_cast<Eigen::Index>(tm.size()) - kTerminals;
  const Eigen::MatrixXd u = tm.matrix().bottomRightCorner(m, m);
  const Eigen::MatrixXd w = tm.matrix().bottomLeftCorner(m, kTerminals);
  const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(m, m) - u;
  Eigen::MatrixXd rhs(m, kTerminals + 1);
  rhs.leftCols(kTerminals) = w;
  rhs.col(kTerminals).setOnes();
  const Eigen::MatrixXd x = a.partialPivLu().solve(rhs);
  check_residual(a, x, rhs);
  return {tm.space_ptr(), x.leftCols(kTerminals), x.col(kTerminals)};
}

PayoffVector closed_form_k3(const GameParams& params, const Choice& x, Player n) {
  if (params.K() != 3) throw InvalidParameter(fmt::format("closed form needs K=3, got K={}", params.K()));
  const auto space = enumerate_states(3);
  // Relabel so that n plays the role of player 1: n -> 1, n+1 -> 2, n+2 -> 3.
  const int r = index(n);
  const auto& p = params.p();
  const double a = p[r], b = p[(r + 1) % 3], c = p[(r + 2) % 3];
  const Choice y{x[r], x[(r + 1) % 3], x[(r + 2) % 3]};
  Eigen::VectorXd v(static_cast<Eigen::Index>(space->size()));
  for (std::size_t i = 0; i < space->size(); ++i) {
    const State& s = (*space)[i];
    const State t{s[r], s[(r + 1) % 3], s[(r + 2) % 3]};
    v[static_cast<Eigen::Index>(i)] = k3_player_one(a, b, c, y, t);
  }
  return {n, space, v, 0};
}

}  // namespace gruin
