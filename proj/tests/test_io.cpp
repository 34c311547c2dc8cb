#include <doctest.h>

#include <sstream>

#include "gruin/io.hpp"
#include "support.hpp"

using namespace gruin;

TEST_CASE("state keys") {
  CHECK(state_key({3, 0, 1}) == "3,0,1");
  CHECK(parse_state("3,0,1") == State{3, 0, 1});
  CHECK(parse_state("(2, 1, 1)") == State{2, 1, 1});
  CHECK_THROWS_AS(parse_state("2,1"), InvalidState);
  CHECK_THROWS_AS(parse_state("2,a,1"), InvalidState);
}

TEST_CASE("game documents round trip") {
  std::mt19937_64 rng(2);
  const auto params = test::random_params(rng, 5);
  const auto profile = test::random_profile(rng, 5);
  const json doc = game_to_json(params, profile);
  CHECK(doc["K"] == 5);
  CHECK(doc["x"].size() == 6);
  const auto back = game_from_json(json::parse(doc.dump()));
  CHECK(back.params.p() == params.p());
  CHECK(back.profile == profile);
}

TEST_CASE("missing x means uniform") {
  const auto d = game_from_json(json::parse(R"({"p":[0.1,0.2,0.3],"K":4})"));
  CHECK(d.profile == StationaryProfile::uniform(enumerate_states(4)));
}

TEST_CASE("malformed documents name the field") {
  auto field_of = [](const char* text) -> std::string {
    try {
      game_from_json(json::parse(text));
    } catch (const ConfigError& e) {
      return e.field();
    }
    return "<none>";
  };
  CHECK(field_of("[1,2]") == "$");
  CHECK(field_of(R"({"K":3})") == "p");
  CHECK(field_of(R"({"p":[0.1,0.2],"K":3})") == "p");
  CHECK(field_of(R"({"p":[0.1,0.2,0.3]})") == "K");
  CHECK(field_of(R"({"p":[0.1,0.2,0.3],"K":3.5})") == "K");
  CHECK(field_of(R"({"p":[0.1,0.2,0.3],"K":3,"x":[]})") == "x");
  CHECK(field_of(R"({"p":[0.1,0.2,0.3],"K":3,"x":{"2,1,0":[1,1,1]}})") == "x.2,1,0");
  CHECK(field_of(R"({"p":[0.1,0.2,0.3],"K":3,"x":{"1,1,2":[1,1,1]}})") == "x.1,1,2");
  CHECK(field_of(R"({"p":[0.1,0.2,0.3],"K":3,"x":{"1,1,1":[1,2,1]}})") == "x.1,1,1");
  CHECK(field_of(R"({"p":[0.1,0.2,0.3],"K":3,"x":{"1,1,1":[1,1]}})") == "x.1,1,1");
  CHECK(field_of(R"({"p":[0.1,0.2,0.3],"K":3,"x":{"a":[1,1,1]}})") == "x.a");
  CHECK_THROWS_AS(game_from_json(json::parse(R"({"p":[0.1,0.2,0.3],"K":4,"x":{"2,1,1":[1,1,1]}})")),
                  IncompleteProfile);
  CHECK_THROWS_AS(game_from_json(json::parse(R"({"p":[0,0.2,0.3],"K":4})")), InvalidParameter);
}

TEST_CASE("certificates serialize") {
  const GameParams g(0.8, 0.3, 0.4, 3);
  const auto cert = verify_ne(g, k3_analytic_ne(g).profile, 1e-10, Method::AnalyticK3);
  const json j = certificate_to_json(cert);
  CHECK(j["method"] == "analytic-k3");
  CHECK(j["certified"] == true);
  CHECK(j["gains"].size() == 3);
  CHECK_FALSE(j.contains("gamma"));
  CHECK(game_from_json(j["profile"]).profile == cert.profile);
}

TEST_CASE("payoff CSV") {
  const auto tm = build_transition_matrix(GameParams(0.5, 0.5, 0.5, 3), StationaryProfile::uniform(enumerate_states(3)));
  const auto all = solve_all_direct(tm);
  std::ostringstream out;
  write_payoff_csv(out, tm.space(), {all[0].values, all[1].values, all[2].values});
  const std::string text = out.str();
  CHECK(text.rfind("s1,s2,s3,V1,V2,V3\n3,0,0,1,0,0\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 11);
  CHECK(text.find('\r') == std::string::npos);
  CHECK(format_real(0.1) == "0.1");
}

TEST_CASE("simulation CSV row") {
  SimulationResult r;
  r.wins = {1, 2, 1};
  r.games = 4;
  r.seed = 9;
  r.start = {1, 1, 1};
  r.mean_rounds = 2.5;
  CHECK(simulation_csv_header() == "K,p1,p2,p3,start,games,seed,f1,f2,f3,mean_rounds");
  CHECK(simulation_csv_row(GameParams(0.5, 0.25, 0.75, 3), r) == "3,0.5,0.25,0.75,\"1,1,1\",4,9,0.25,0.5,0.25,2.5");
}
