#include <doctest.h>

#include <sstream>

#include "gruin/experiments.hpp"

using namespace gruin;

TEST_CASE("sampling") {
  std::mt19937_64 rng(1);
  SamplingSpec spec;
  spec.fixed[0] = 1.0;
  for (int i = 0; i < 1000; ++i) {
    const auto p = sample_p(spec, rng);
    CHECK(p[0] == 1.0 - 1e-6);
    for (double x : p) CHECK((x >= 1e-6 && x <= 1.0 - 1e-6));
  }
  CHECK(clamp_probability(0.0, 1e-6) == 1e-6);
  CHECK(clamp_probability(0.4, 1e-6) == 0.4);
}

TEST_CASE("balanced start") {
  CHECK(balanced_start(9) == State{3, 3, 3});
  CHECK(balanced_start(4) == State{2, 1, 1});
  CHECK(balanced_start(5) == State{2, 2, 1});
}

TEST_CASE("sweep") {
  SweepConfig cfg;
  cfg.k_min = 3;
  cfg.k_max = 5;
  cfg.repetitions = 20;
  const auto one = run_sweep_convergence(cfg);
  cfg.threads = 4;
  const auto four = run_sweep_convergence(cfg);
  REQUIRE(one.size() == 3);
  for (std::size_t i = 0; i < one.size(); ++i) {
    CHECK(one[i].K == 3 + static_cast<int>(i));
    CHECK(one[i].runs == 20);
    CHECK(one[i].converged == four[i].converged);
  }
  CHECK(one[0].proportion() == 1.0);

  std::ostringstream out;
  write_sweep_csv(out, one);
  CHECK(out.str().rfind("K,runs,converged,proportion\n3,20,20,1\n", 0) == 0);

  cfg.k_max = 10;
  CHECK_THROWS_AS(run_sweep_convergence(cfg), InvalidParameter);
  cfg.k_max = 4;
  cfg.repetitions = 0;
  CHECK_THROWS_AS(run_sweep_convergence(cfg), InvalidParameter);
}

TEST_CASE("delta V") {
  DeltaVConfig cfg;
  cfg.K = 5;
  cfg.p_list = {{0.1, 0.1, 0.1}, {0.8, 0.8, 0.5}, {0.9, 0.0, 0.5}};
  const auto rows = run_delta_v(cfg);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].start == State{2, 2, 1});
  CHECK(rows[2].p[1] == 1e-6);
  // an equilibrium certified at 10*tol can lose at most that much to a deviation
  const double slack = 10 * cfg.tol;
  for (const auto& r : rows) {
    CHECK(r.ok());
    for (int n = 0; n < 3; ++n) {
      CHECK(r.random_gap[n] >= -slack);
      CHECK(r.uniform_gap[n] >= -slack);
    }
  }
  cfg.threads = 3;
  const auto again = run_delta_v(cfg);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].status == again[i].status);
    CHECK(rows[i].random_gap == again[i].random_gap);
  }

  std::ostringstream out;
  write_delta_v_csv(out, rows);
  CHECK(out.str().rfind("p1,p2,p3,start,status,dVbar1,dVbar2,dVbar3,dVtilde1,dVtilde2,dVtilde3\n", 0) == 0);

  cfg.start = State{1, 1, 1};
  CHECK_THROWS_AS(run_delta_v(cfg), InvalidState);
}
