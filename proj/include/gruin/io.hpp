#pragma once

#include <array>
#include <ostream>
#include <string>

#include <Eigen/Dense>
#include <json.hpp>

#include "gruin/equilibrium.hpp"
#include "gruin/game.hpp"
#include "gruin/simulator.hpp"

namespace gruin {

using json = nlohmann::json;

// Malformed input documents; `field` names the offending JSON path.
class ConfigError : public GameError {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : GameError(field + ": " + what), field_(field) {}
  const char* kind() const noexcept override { return "config-error"; }
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct GameDocument {
  GameParams params;
  StationaryProfile profile;
};

// {"p":[p1,p2,p3],"K":K,"x":{"s1,s2,s3":[x1,x2,x3],...}}; a missing "x"
// means the uniform profile.
json game_to_json(const GameParams& params, const StationaryProfile& profile);
GameDocument game_from_json(const json& doc);

std::string state_key(const State& s);
State parse_state(const std::string& text);

json certificate_to_json(const EquilibriumCertificate& cert);

// Shortest round-trip decimal form.
std::string format_real(double x);

// s1,s2,s3,V1,V2,V3 in canonical state order.
void write_payoff_csv(std::ostream& out, const StateSpace& space, const std::array<Eigen::VectorXd, 3>& values);

std::string simulation_csv_header();
// K,p1,p2,p3,start,games,seed,f1,f2,f3,mean_rounds
std::string simulation_csv_row(const GameParams& params, const SimulationResult& result);

}  // namespace gruin
