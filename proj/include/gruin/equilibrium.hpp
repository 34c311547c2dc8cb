#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gruin/game.hpp"
#include "gruin/payoff.hpp"

namespace gruin {

// Ties in the argmax within this margin keep the incumbent action, and
// otherwise resolve to action 1.
inline constexpr double kTieMargin = 1e-12;

struct BestResponseDefaults {
  static constexpr double kTol = 1e-12;
  static constexpr std::size_t kMaxIter = 1'000'000;
};

// Discounted auxiliary game: terminal states become preterminal, pay their
// winner 1 and then move to an extra absorbing state with zero payoff.
struct DiscountedGameParams {
  DiscountedGameParams(GameParams game, double gamma);

  GameParams game;
  double gamma;
};

// (N+1) x (N+1) chain of the discounted game; the last index is the extra
// absorbing state.
Eigen::MatrixXd augmented_transition_matrix(const DiscountedGameParams& dparams,
                                            const StationaryProfile& profile);

struct BestResponse {
  Player player = Player::One;
  std::vector<double> strategy;  // one 0/1 entry per interior state
  PayoffVector payoff;
  std::size_t iterations = 0;    // value-iteration sweeps
};

// With opponents fixed at `profile`, player n's payoff-maximizing
// deterministic strategy. gamma = 1 is the original game.
BestResponse best_response(const GameParams& params, const StationaryProfile& profile, Player n,
                           double tol = BestResponseDefaults::kTol,
                           std::size_t max_iter = BestResponseDefaults::kMaxIter);
BestResponse discounted_best_response(const DiscountedGameParams& dparams, const StationaryProfile& profile,
                                      Player n, double tol = BestResponseDefaults::kTol,
                                      std::size_t max_iter = BestResponseDefaults::kMaxIter);

enum class Method { Manual, MVI, Enumeration, AnalyticK3, DiscountedMVI };

std::string to_string(Method m);
Method method_from_string(const std::string& s);

struct EquilibriumCertificate {
  GameParams params;
  StationaryProfile profile;
  std::array<double, 3> gains{};  // max_s [best response payoff - incumbent payoff]
  double tolerance = 0.0;
  Method method = Method::Manual;
  double residual_j = 0.0;
  std::optional<double> gamma;  // set for the discounted game

  bool certified() const { return gains[0] <= tolerance && gains[1] <= tolerance && gains[2] <= tolerance; }
};

EquilibriumCertificate verify_ne(const GameParams& params, const StationaryProfile& profile, double tol,
                                 Method method = Method::Manual);
EquilibriumCertificate verify_discounted_ne(const DiscountedGameParams& dparams,
                                            const StationaryProfile& profile, double tol,
                                            Method method = Method::Manual);

// Sum over players of ||V_n - F_n(V_n | x)||^2 with V_n the exact payoff of x.
double residual_j(const GameParams& params, const StationaryProfile& profile);

enum class MviStatus { Converged, NotConverged, CertificateGap };

std::string to_string(MviStatus s);

// Why a converged run stopped: the value vectors and profile settled, or
// an intermediate greedy profile was itself certified as an equilibrium.
enum class MviStop { None, ValuesSettled, ProfileCertified };

std::string to_string(MviStop s);

struct MviResult {
  MviStatus status = MviStatus::NotConverged;
  MviStop stop = MviStop::None;
  StationaryProfile profile;  // last argmax profile
  std::array<Eigen::VectorXd, 3> values;
  std::size_t iterations = 0;
  double last_change = 0.0;
  double residual_j = 0.0;
  std::optional<EquilibriumCertificate> certificate;  // present unless NotConverged

  bool converged() const { return status == MviStatus::Converged; }
};

struct MviDefaults {
  static constexpr double kTol = 1e-10;
  static constexpr std::size_t kMaxIters = 100'000;
  static constexpr int kStableSteps = 3;
};

struct MviOptions {
  double tol = MviDefaults::kTol;
  std::size_t max_iters = MviDefaults::kMaxIters;
  // Check each newly visited greedy profile against the optimality system
  // and stop at the first certified one. Off = stop only on settled values.
  bool certify_iterates = true;
};

// Synchronous MultiValue Iteration. Every converged result has passed
// verify_ne at 10 * tol.
MviResult mvi(const GameParams& params, const StationaryProfile& seed, const MviOptions& options = {});
MviResult mvi(const GameParams& params, const StationaryProfile& seed, double tol, std::size_t max_iters);
MviResult discounted_mvi(const DiscountedGameParams& dparams, const StationaryProfile& seed,
                         const MviOptions& options = {});
MviResult discounted_mvi(const DiscountedGameParams& dparams, const StationaryProfile& seed, double tol,
                         std::size_t max_iters);

// Deterministic profile count 2^(3 g(K)), with g(K) the interior count.
std::uint64_t profile_count(int K);

struct EnumerationOptions {
  bool allow_large = false;  // permit K > 5
  unsigned threads = 1;
};

struct EnumerationResult {
  std::vector<EquilibriumCertificate> equilibria;  // ordered by profile bit pattern
  std::uint64_t evaluated = 0;
};

EnumerationResult exhaustive_enumeration(const GameParams& params, double tol,
                                         const EnumerationOptions& options = {});

struct K3Equilibrium {
  StationaryProfile profile;
  std::array<bool, 3> indifferent{};  // the sign condition vanished; choice defaulted to 1
};

K3Equilibrium k3_analytic_ne(const GameParams& params);

// Payoff of player n in the discounted game on the augmented chain,
// restricted to the original states.
PayoffVector discounted_value(const DiscountedGameParams& dparams, const StationaryProfile& profile, Player n);

}  // namespace gruin
