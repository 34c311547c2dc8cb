#include "gruin/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <thread>

#include <fmt/format.h>

namespace gruin {

namespace {

constexpr Eigen::Index kTerminals = 3;

// One match between two survivors: the mover's side and the opponent's side.
struct Match {
  Eigen::Index first_gains = 0;
  Eigen::Index second_gains = 0;
  double first_wins = 0.0;
  double second_wins = 0.0;

  double value(const Eigen::VectorXd& v) const {
    return first_wins * v[first_gains] + second_wins * v[second_gains];
  }
};

// Precomputed one-step structure of the game, independent of the profile.
class Dynamics {
 public:
  Dynamics(const GameParams& params, std::shared_ptr<const StateSpace> space, double gamma)
      : params_(params), space_(std::move(space)), gamma_(gamma) {
    const std::size_t n = space_->size();
    kinds_.resize(n);
    winners_.resize(n);
    boundary_.resize(n);
    interior_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const State& s = (*space_)[i];
      const auto cls = classify_state(s, params_.K());
      kinds_[i] = cls.kind;
      winners_[i] = cls.winner;
      if (cls.kind == StateKind::Boundary) {
        std::array<Player, 2> alive{};
        int k = 0;
        for (Player p : kPlayers) {
          if (s[index(p)] > 0) alive[k++] = p;
        }
        boundary_[i] = make_match(s, alive[0], alive[1]);
      } else if (cls.kind == StateKind::Interior) {
        // [mover][choice]: choice 1 picks the cyclic successor, 0 the predecessor.
        for (Player m : kPlayers) {
          const Player next = player_at((index(m) + 1) % 3);
          const Player prev = player_at((index(m) + 2) % 3);
          interior_[i][index(m)][1] = make_match(s, m, next);
          interior_[i][index(m)][0] = make_match(s, m, prev);
        }
      }
    }
  }

  const StateSpace& space() const { return *space_; }
  const std::shared_ptr<const StateSpace>& space_ptr() const { return space_; }
  double gamma() const { return gamma_; }
  std::size_t size() const { return space_->size(); }

  // {value with x_n = 0, value with x_n = 1}, undiscounted.
  std::array<double, 2> lookahead(std::size_t i, const Choice& x, Player n, const Eigen::VectorXd& v) const {
    double rest = 0.0;
    for (Player m : kPlayers) {
      if (m == n) continue;
      const double xm = x[index(m)];
      const auto& mm = interior_[i][index(m)];
      rest += xm * mm[1].value(v) + (1.0 - xm) * mm[0].value(v);
    }
    const auto& own = interior_[i][index(n)];
    return {(rest + own[0].value(v)) / 3.0, (rest + own[1].value(v)) / 3.0};
  }

  double interior_value(std::size_t i, const Choice& x, const Eigen::VectorXd& v) const {
    double acc = 0.0;
    for (Player m : kPlayers) {
      const double xm = x[index(m)];
      const auto& mm = interior_[i][index(m)];
      acc += xm * mm[1].value(v) + (1.0 - xm) * mm[0].value(v);
    }
    return acc / 3.0;
  }

  StateKind kind(std::size_t i) const { return kinds_[i]; }
  double reward(std::size_t i, Player n) const {
    return kinds_[i] == StateKind::Terminal && winners_[i] == n ? 1.0 : 0.0;
  }
  double boundary_value(std::size_t i, const Eigen::VectorXd& v) const { return boundary_[i].value(v); }

  // Exact payoffs of all three players under a profile: V = b + gamma Pi~ V.
  std::array<Eigen::VectorXd, 3> evaluate(const StationaryProfile& profile) const {
    const TransitionMatrix tm = build_transition_matrix(params_, profile);
    const auto n = static_cast<Eigen::Index>(size());
    const Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n) - gamma_ * transient_part(tm);
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n, kTerminals);
    rhs.topRows(kTerminals).setIdentity();
    const Eigen::MatrixXd x = a.partialPivLu().solve(rhs);
    const double residual = (a * x - rhs).cwiseAbs().maxCoeff();
    if (!(residual <= SolverDefaults::kDirectResidual)) {
      throw SolverFailure(fmt::format("payoff solve residual {:.3e}", residual));
    }
    return {x.col(0), x.col(1), x.col(2)};
  }

  // One application of player n's Bellman operator with the others fixed
  // at `profile`; n's own choices are maximized at every interior state.
  Eigen::VectorXd bellman(const StationaryProfile& profile, Player n, const Eigen::VectorXd& v) const {
    Eigen::VectorXd out(v.size());
    for (std::size_t i = 0; i < size(); ++i) {
      const auto e = static_cast<Eigen::Index>(i);
      switch (kinds_[i]) {
        case StateKind::Terminal:
          out[e] = reward(i, n);
          break;
        case StateKind::Boundary:
          out[e] = gamma_ * boundary_value(i, v);
          break;
        case StateKind::Interior: {
          const auto j = static_cast<std::size_t>(space_->interior_index(i));
          const auto la = lookahead(i, profile.at(j), n, v);
          out[e] = gamma_ * std::max(la[0], la[1]);
          break;
        }
      }
    }
    return out;
  }

  // Value of applying the profile's own choices (no maximization).
  Eigen::VectorXd apply(const StationaryProfile& profile, Player n, const Eigen::VectorXd& v) const {
    Eigen::VectorXd out(v.size());
    for (std::size_t i = 0; i < size(); ++i) {
      const auto e = static_cast<Eigen::Index>(i);
      switch (kinds_[i]) {
        case StateKind::Terminal:
          out[e] = reward(i, n);
          break;
        case StateKind::Boundary:
          out[e] = gamma_ * boundary_value(i, v);
          break;
        case StateKind::Interior: {
          const auto j = static_cast<std::size_t>(space_->interior_index(i));
          out[e] = gamma_ * interior_value(i, profile.at(j), v);
          break;
        }
      }
    }
    return out;
  }

 private:
  Match make_match(const State& s, Player a, Player b) const {
    State a_gains = s, b_gains = s;
    ++a_gains[index(a)];
    --a_gains[index(b)];
    ++b_gains[index(b)];
    --b_gains[index(a)];
    return {static_cast<Eigen::Index>(space_->index_of(a_gains)),
            static_cast<Eigen::Index>(space_->index_of(b_gains)), params_.win_prob(a, b), params_.win_prob(b, a)};
  }

  GameParams params_;
  std::shared_ptr<const StateSpace> space_;
  double gamma_;
  std::vector<StateKind> kinds_;
  std::vector<Player> winners_;
  std::vector<Match> boundary_;
  std::vector<std::array<std::array<Match, 2>, 3>> interior_;
};

double choose(const std::array<double, 2>& la, double incumbent) {
  if (incumbent == 1.0 && la[1] >= la[0] - kTieMargin) return 1.0;
  if (incumbent == 0.0 && la[0] >= la[1] - kTieMargin) return 0.0;
  return la[1] >= la[0] - kTieMargin ? 1.0 : 0.0;
}

BestResponse best_response_impl(const Dynamics& dyn, const StationaryProfile& profile, Player n, double tol,
                                std::size_t max_iter) {
  if (!(tol > 0.0)) throw InvalidParameter("tol must be positive");
  const auto& space = dyn.space();
  const std::vector<double> incumbent = profile.player_strategy(n);

  // Value iteration from the incumbent's payoff rises monotonically to the optimum.
  Eigen::VectorXd v = dyn.evaluate(profile)[index(n)];
  std::size_t iter = 0;
  while (true) {
    if (iter >= max_iter) {
      throw NonConvergence(fmt::format("best-response value iteration exceeded {} sweeps", max_iter), v, iter);
    }
    Eigen::VectorXd next = dyn.bellman(profile, n, v);
    ++iter;
    const double change = (next - v).cwiseAbs().maxCoeff();
    v = std::move(next);
    if (change < tol) break;
  }

  std::vector<double> policy(space.interior_count());
  for (std::size_t j = 0; j < policy.size(); ++j) {
    policy[j] = choose(dyn.lookahead(space.interior()[j], profile.at(j), n, v), incumbent[j]);
  }

  // Exact re-solve of the extracted policy; improvement steps remove any
  // residual argmax error left by the stopping tolerance.
  StationaryProfile candidate = profile.with_player(n, policy);
  Eigen::VectorXd exact = dyn.evaluate(candidate)[index(n)];
  for (std::size_t round = 0; round < 4 * policy.size() + 8; ++round) {
    bool improved = false;
    for (std::size_t j = 0; j < policy.size(); ++j) {
      const auto la = dyn.lookahead(space.interior()[j], candidate.at(j), n, exact);
      const double current = la[policy[j] == 1.0 ? 1 : 0];
      const double best = std::max(la[0], la[1]);
      if (best > current + kTieMargin) {
        policy[j] = la[1] > la[0] ? 1.0 : 0.0;
        improved = true;
      }
    }
    if (!improved) break;
    candidate = profile.with_player(n, policy);
    exact = dyn.evaluate(candidate)[index(n)];
  }

  return {n, std::move(policy), PayoffVector{n, dyn.space_ptr(), exact, 0}, iter};
}

EquilibriumCertificate verify_impl(const Dynamics& dyn, const GameParams& params, const StationaryProfile& profile,
                                   double tol, Method method);

double residual_impl(const Dynamics& dyn, const StationaryProfile& profile) {
  const auto values = dyn.evaluate(profile);
  double j = 0.0;
  for (Player n : kPlayers) {
    const Eigen::VectorXd& v = values[index(n)];
    j += (v - dyn.bellman(profile, n, v)).squaredNorm();
  }
  return j;
}

EquilibriumCertificate verify_impl(const Dynamics& dyn, const GameParams& params, const StationaryProfile& profile,
                                   double tol, Method method) {
  const auto incumbent = dyn.evaluate(profile);
  EquilibriumCertificate cert{params, profile, {}, tol, method, residual_impl(dyn, profile), std::nullopt};
  for (Player n : kPlayers) {
    const BestResponse br = best_response_impl(dyn, profile, n, BestResponseDefaults::kTol,
                                               BestResponseDefaults::kMaxIter);
    cert.gains[index(n)] = (br.payoff.values - incumbent[index(n)]).maxCoeff();
  }
  return cert;
}

StationaryProfile greedy_profile(const Dynamics& dyn, const StationaryProfile& previous,
                                 const std::array<Eigen::VectorXd, 3>& values) {
  const auto& space = dyn.space();
  std::vector<Choice> entries(space.interior_count());
  for (std::size_t j = 0; j < entries.size(); ++j) {
    const std::size_t i = space.interior()[j];
    for (Player n : kPlayers) {
      // A player's lookahead difference does not depend on the others' choices.
      entries[j][index(n)] = choose(dyn.lookahead(i, previous.at(j), n, values[index(n)]), previous.get(j, n));
    }
  }
  return StationaryProfile(dyn.space_ptr(), std::move(entries));
}

// Largest one-step improvement available to any player at any interior state.
double bellman_gap(const Dynamics& dyn, const StationaryProfile& profile, const std::array<Eigen::VectorXd, 3>& values) {
  const auto& space = dyn.space();
  double gap = 0.0;
  for (std::size_t j = 0; j < space.interior_count(); ++j) {
    const std::size_t i = space.interior()[j];
    for (Player n : kPlayers) {
      const auto la = dyn.lookahead(i, profile.at(j), n, values[index(n)]);
      const double current = (1.0 - profile.get(j, n)) * la[0] + profile.get(j, n) * la[1];
      gap = std::max(gap, dyn.gamma() * (std::max(la[0], la[1]) - current));
    }
  }
  return gap;
}

void require_match(const GameParams& params, const StationaryProfile& profile) {
  if (!profile.space() || profile.K() != params.K()) throw IncompleteProfile("profile does not match K");
}

MviResult mvi_impl(const Dynamics& dyn, const GameParams& params, const StationaryProfile& seed,
                   const MviOptions& options, Method method, std::optional<double> gamma) {
  if (!(options.tol > 0.0)) throw InvalidParameter("tol must be positive");
  const double certify_tol = 10.0 * options.tol;

  MviResult result;
  result.profile = seed;
  result.values = dyn.evaluate(seed);
  std::set<std::vector<Choice>> checked;
  auto finish = [&](EquilibriumCertificate cert, MviStop stop) {
    cert.gamma = gamma;
    result.residual_j = cert.residual_j;
    result.status = cert.certified() ? MviStatus::Converged : MviStatus::CertificateGap;
    result.stop = stop;
    result.certificate = std::move(cert);
    return result;
  };

  int stable = 0;
  for (std::size_t t = 1; t <= options.max_iters; ++t) {
    StationaryProfile x = greedy_profile(dyn, result.profile, result.values);
    stable = (x == result.profile) ? stable + 1 : 0;
    double change = 0.0;
    for (Player n : kPlayers) {
      Eigen::VectorXd next = dyn.apply(x, n, result.values[index(n)]);
      change = std::max(change, (next - result.values[index(n)]).cwiseAbs().maxCoeff());
      result.values[index(n)] = std::move(next);
    }
    result.profile = std::move(x);
    result.iterations = t;
    result.last_change = change;
    if (change < options.tol && stable >= MviDefaults::kStableSteps) {
      return finish(verify_impl(dyn, params, result.profile, certify_tol, method), MviStop::ValuesSettled);
    }
    if (options.certify_iterates) {
      std::vector<Choice> key(result.profile.size());
      for (std::size_t j = 0; j < key.size(); ++j) key[j] = result.profile.at(j);
      if (checked.insert(std::move(key)).second) {
        // A one-step gap above the tolerance rules out certification cheaply.
        if (bellman_gap(dyn, result.profile, dyn.evaluate(result.profile)) <= certify_tol) {
          auto cert = verify_impl(dyn, params, result.profile, certify_tol, method);
          if (cert.certified()) return finish(std::move(cert), MviStop::ProfileCertified);
        }
      }
    }
  }
  result.status = MviStatus::NotConverged;
  result.residual_j = residual_impl(dyn, result.profile);
  return result;
}

}  // namespace

DiscountedGameParams::DiscountedGameParams(GameParams g, double discount) : game(g), gamma(discount) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw InvalidParameter(fmt::format("gamma = {} must lie in (0,1)", gamma));
}

Eigen::MatrixXd augmented_transition_matrix(const DiscountedGameParams& dparams, const StationaryProfile& profile) {
  const TransitionMatrix tm = build_transition_matrix(dparams.game, profile);
  const auto n = static_cast<Eigen::Index>(tm.size());
  Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(n + 1, n + 1);
  aug.topLeftCorner(n, n) = tm.matrix();
  aug.topRows(kTerminals).setZero();
  aug.block(0, n, kTerminals, 1).setOnes();
  aug(n, n) = 1.0;
  return aug;
}

PayoffVector discounted_value(const DiscountedGameParams& dparams, const StationaryProfile& profile, Player n) {
  const Eigen::MatrixXd aug = augmented_transition_matrix(dparams, profile);
  const Eigen::Index size = aug.rows();
  Eigen::VectorXd q = Eigen::VectorXd::Zero(size);
  q[static_cast<Eigen::Index>(StateSpace::terminal_index(n))] = 1.0;
  // The extra state is absorbing with zero payoff, so its value is pinned to 0.
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(size, size) - dparams.gamma * aug;
  a.row(size - 1).setZero();
  a(size - 1, size - 1) = 1.0;
  const Eigen::VectorXd v = a.partialPivLu().solve(q);
  return {n, profile.space(), v.head(size - 1), 0};
}

BestResponse best_response(const GameParams& params, const StationaryProfile& profile, Player n, double tol,
                           std::size_t max_iter) {
  require_match(params, profile);
  return best_response_impl(Dynamics(params, profile.space(), 1.0), profile, n, tol, max_iter);
}

BestResponse discounted_best_response(const DiscountedGameParams& dparams, const StationaryProfile& profile,
                                      Player n, double tol, std::size_t max_iter) {
  require_match(dparams.game, profile);
  return best_response_impl(Dynamics(dparams.game, profile.space(), dparams.gamma), profile, n, tol, max_iter);
}

std::string to_string(Method m) {
  switch (m) {
    case Method::Manual: return "manual";
    case Method::MVI: return "mvi";
    case Method::Enumeration: return "enumeration";
    case Method::AnalyticK3: return "analytic-k3";
    case Method::DiscountedMVI: return "discounted-mvi";
  }
  return "manual";
}

Method method_from_string(const std::string& s) {
  for (Method m : {Method::Manual, Method::MVI, Method::Enumeration, Method::AnalyticK3, Method::DiscountedMVI}) {
    if (to_string(m) == s) return m;
  }
  throw InvalidParameter(fmt::format("unknown method '{}'", s));
}

std::string to_string(MviStop s) {
  switch (s) {
    case MviStop::None: return "none";
    case MviStop::ValuesSettled: return "values-settled";
    case MviStop::ProfileCertified: return "profile-certified";
  }
  return "none";
}

std::string to_string(MviStatus s) {
  switch (s) {
    case MviStatus::Converged: return "converged";
    case MviStatus::NotConverged: return "not-converged";
    case MviStatus::CertificateGap: return "certificate-gap";
  }
  return "not-converged";
}

EquilibriumCertificate verify_ne(const GameParams& params, const StationaryProfile& profile, double tol,
                                 Method method) {
  require_match(params, profile);
  return verify_impl(Dynamics(params, profile.space(), 1.0), params, profile, tol, method);
}

EquilibriumCertificate verify_discounted_ne(const DiscountedGameParams& dparams, const StationaryProfile& profile,
                                            double tol, Method method) {
  require_match(dparams.game, profile);
  auto cert = verify_impl(Dynamics(dparams.game, profile.space(), dparams.gamma), dparams.game, profile, tol, method);
  cert.gamma = dparams.gamma;
  return cert;
}

double residual_j(const GameParams& params, const StationaryProfile& profile) {
  require_match(params, profile);
  return residual_impl(Dynamics(params, profile.space(), 1.0), profile);
}

MviResult mvi(const GameParams& params, const StationaryProfile& seed, const MviOptions& options) {
  require_match(params, seed);
  return mvi_impl(Dynamics(params, seed.space(), 1.0), params, seed, options, Method::MVI, std::nullopt);
}

MviResult mvi(const GameParams& params, const StationaryProfile& seed, double tol, std::size_t max_iters) {
  return mvi(params, seed, MviOptions{tol, max_iters, true});
}

MviResult discounted_mvi(const DiscountedGameParams& dparams, const StationaryProfile& seed,
                         const MviOptions& options) {
  require_match(dparams.game, seed);
  return mvi_impl(Dynamics(dparams.game, seed.space(), dparams.gamma), dparams.game, seed, options,
                  Method::DiscountedMVI, dparams.gamma);
}

MviResult discounted_mvi(const DiscountedGameParams& dparams, const StationaryProfile& seed, double tol,
                         std::size_t max_iters) {
  return discounted_mvi(dparams, seed, MviOptions{tol, max_iters, true});
}

std::uint64_t profile_count(int K) {
  const std::size_t g = StateSpace(K).interior_count();
  if (3 * g >= 64) throw InvalidParameter(fmt::format("2^{} profiles do not fit in 64 bits", 3 * g));
  return std::uint64_t{1} << (3 * g);
}

EnumerationResult exhaustive_enumeration(const GameParams& params, double tol, const EnumerationOptions& options) {
  if (!(tol > 0.0)) throw InvalidParameter("tol must be positive");
  if (params.K() > 5 && !options.allow_large) {
    const std::size_t g = StateSpace(params.K()).interior_count();
    throw InvalidParameter(fmt::format("refusing to enumerate 2^{} profiles for K={} (limit K<=5)", 3 * g, params.K()));
  }
  const auto space = enumerate_states(params.K());
  const std::uint64_t total = profile_count(params.K());
  const Dynamics dyn(params, space, 1.0);

  // A profile with a profitable deviation has a profitable one-state
  // deviation, so the one-step Bellman gap screens out non-equilibria
  // before the full best-response check.
  auto screen = [&](std::uint64_t begin, std::uint64_t end) {
    std::vector<std::uint64_t> hits;
    for (std::uint64_t bits = begin; bits < end; ++bits) {
      const auto profile = StationaryProfile::from_bits(space, bits);
      const auto values = dyn.evaluate(profile);
      bool ok = true;
      for (std::size_t j = 0; ok && j < space->interior_count(); ++j) {
        const std::size_t i = space->interior()[j];
        for (Player n : kPlayers) {
          const auto la = dyn.lookahead(i, profile.at(j), n, values[index(n)]);
          const double current = la[profile.get(j, n) == 1.0 ? 1 : 0];
          if (std::max(la[0], la[1]) - current > tol) {
            ok = false;
            break;
          }
        }
      }
      if (ok) hits.push_back(bits);
    }
    return hits;
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(total)));
  std::vector<std::vector<std::uint64_t>> partial(workers);
  if (workers == 1) {
    partial[0] = screen(0, total);
  } else {
    std::vector<std::thread> pool;
    const std::uint64_t chunk = (total + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
      const std::uint64_t begin = std::min(total, w * chunk);
      const std::uint64_t end = std::min(total, begin + chunk);
      pool.emplace_back([&, w, begin, end] { partial[w] = screen(begin, end); });
    }
    for (auto& t : pool) t.join();
  }

  EnumerationResult result;
  result.evaluated = total;
  for (const auto& hits : partial) {
    for (std::uint64_t bits : hits) {
      auto cert = verify_impl(dyn, params, StationaryProfile::from_bits(space, bits), tol, Method::Enumeration);
      if (cert.certified()) result.equilibria.push_back(std::move(cert));
    }
  }
  return result;
}

K3Equilibrium k3_analytic_ne(const GameParams& params) {
  if (params.K() != 3) throw InvalidParameter(fmt::format("analytic equilibrium needs K=3, got K={}", params.K()));
  const auto& p = params.p();
  K3Equilibrium out;
  Choice choice{};
  for (int n = 0; n < 3; ++n) {
    // p_n: n against its successor; p_{n-1}: the predecessor against n.
    const double own = p[n];
    const double prev = p[(n + 2) % 3];
    const double sign = (own + prev - 1.0) * (own - prev);
    if (sign > 0.0) {
      choice[n] = 1.0;
    } else if (sign < 0.0) {
      choice[n] = 0.0;
    } else {
      choice[n] = 1.0;
      out.indifferent[n] = true;
    }
  }
  out.profile = StationaryProfile(enumerate_states(3), std::vector<Choice>{choice});
  return out;
}

}  // namespace gruin
