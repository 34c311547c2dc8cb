#include "gruin/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <thread>

#include <fmt/format.h>

#include "gruin/equilibrium.hpp"
#include "gruin/io.hpp"
#include "gruin/payoff.hpp"

namespace gruin {

namespace {

// Runs job(i) for i in [0, count) across `threads` workers.
template <typename Job>
void parallel_for(std::size_t count, unsigned threads, Job job) {
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) job(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

double clamp_probability(double p, double eps) { return std::clamp(p, eps, 1.0 - eps); }

std::array<double, 3> sample_p(const SamplingSpec& spec, std::mt19937_64& rng) {
  std::array<double, 3> p{};
  for (int n = 0; n < 3; ++n) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    p[n] = spec.fixed[n] ? clamp_probability(*spec.fixed[n], spec.eps) : spec.eps + (1.0 - 2.0 * spec.eps) * u;
  }
  return p;
}

std::vector<SweepRow> run_sweep_convergence(const SweepConfig& cfg) {
  if (cfg.k_min < 3 || cfg.k_max > 9 || cfg.k_min > cfg.k_max) {
    throw InvalidParameter(fmt::format("K range [{},{}] must lie within 3..9", cfg.k_min, cfg.k_max));
  }
  if (cfg.repetitions < 1) throw InvalidParameter("repetitions must be at least 1");

  std::mt19937_64 rng(cfg.seed);
  std::vector<std::array<double, 3>> draws(static_cast<std::size_t>(cfg.repetitions));
  for (auto& p : draws) p = sample_p(cfg.sampling, rng);

  const int k_count = cfg.k_max - cfg.k_min + 1;
  std::vector<char> success(draws.size() * static_cast<std::size_t>(k_count), 0);
  parallel_for(success.size(), cfg.threads, [&](std::size_t task) {
    const auto& p = draws[task / static_cast<std::size_t>(k_count)];
    const int K = cfg.k_min + static_cast<int>(task % static_cast<std::size_t>(k_count));
    try {
      const GameParams params(p[0], p[1], p[2], K);
      const auto seed = StationaryProfile(enumerate_states(K), 0.0);
      const MviOptions opts{cfg.tol, cfg.max_iters, cfg.certify_iterates};
      success[task] = mvi(params, seed, opts).converged() ? 1 : 0;
    } catch (const GameError&) {
      success[task] = 0;
    }
  });

  std::vector<SweepRow> rows;
  for (int k = 0; k < k_count; ++k) {
    SweepRow row{cfg.k_min + k, cfg.repetitions, 0};
    for (std::size_t r = 0; r < draws.size(); ++r) row.converged += success[r * static_cast<std::size_t>(k_count) + k];
    rows.push_back(row);
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "K,runs,converged,proportion\n";
  for (const auto& r : rows) out << fmt::format("{},{},{},{}\n", r.K, r.runs, r.converged, format_real(r.proportion()));
}

State balanced_start(int K) {
  State s{K / 3, K / 3, K / 3};
  for (int n = 0; n < K % 3; ++n) ++s[n];
  return s;
}

std::vector<DeltaVRow> run_delta_v(const DeltaVConfig& cfg) {
  const State start = cfg.start.value_or(balanced_start(cfg.K));
  const auto space = enumerate_states(cfg.K);
  if (!space->contains(start)) throw InvalidState(fmt::format("start {} is not a state of K={}", to_string(start), cfg.K));
  const std::size_t start_idx = space->index_of(start);

  std::vector<DeltaVRow> rows(cfg.p_list.size());
  parallel_for(rows.size(), cfg.threads, [&](std::size_t r) {
    DeltaVRow& row = rows[r];
    for (int n = 0; n < 3; ++n) row.p[n] = clamp_probability(cfg.p_list[r][n], cfg.eps);
    row.start = start;
    const GameParams params(row.p[0], row.p[1], row.p[2], cfg.K);
    MviResult res;
    try {
      res = mvi(params, StationaryProfile(space, 0.0), cfg.tol, cfg.max_iters);
    } catch (const GameError& e) {
      row.status = e.kind();
      return;
    }
    row.status = to_string(res.status);
    if (!res.converged()) return;

    const StationaryProfile& ne = res.profile;
    const auto ne_values = solve_all_direct(build_transition_matrix(params, ne));
    std::mt19937_64 rng(cfg.seed + 0x9E3779B97F4A7C15ULL * (r + 1));
    for (Player n : kPlayers) {
      std::vector<double> random(space->interior_count());
      for (double& x : random) x = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      const std::vector<double> uniform(space->interior_count(), 0.5);
      const double v_ne = ne_values[index(n)][start_idx];
      const auto v_random = solve_payoff_direct(build_transition_matrix(params, ne.with_player(n, random)), n);
      const auto v_uniform = solve_payoff_direct(build_transition_matrix(params, ne.with_player(n, uniform)), n);
      row.random_gap[index(n)] = v_ne - v_random[start_idx];
      row.uniform_gap[index(n)] = v_ne - v_uniform[start_idx];
    }
  });
  return rows;
}

void write_delta_v_csv(std::ostream& out, const std::vector<DeltaVRow>& rows) {
  out << "p1,p2,p3,start,status,dVbar1,dVbar2,dVbar3,dVtilde1,dVtilde2,dVtilde3\n";
  for (const auto& r : rows) {
    out << fmt::format("{},{},{},\"{}\",{}", format_real(r.p[0]), format_real(r.p[1]), format_real(r.p[2]),
                       state_key(r.start), r.status);
    for (double v : r.random_gap) out << ',' << (r.ok() ? format_real(v) : "");
    for (double v : r.uniform_gap) out << ',' << (r.ok() ? format_real(v) : "");
    out << '\n';
  }
}

}  // namespace gruin
