#include "gruin/io.hpp"

#include <charconv>
#include <sstream>

#include <fmt/format.h>

namespace gruin {

std::string state_key(const State& s) { return fmt::format("{},{},{}", s[0], s[1], s[2]); }

State parse_state(const std::string& text) {
  std::string t;
  for (char c : text) {
    if (c != '(' && c != ')' && c != ' ') t.push_back(c);
  }
  State s{};
  std::size_t pos = 0;
  for (int n = 0; n < 3; ++n) {
    const std::size_t end = n < 2 ? t.find(',', pos) : t.size();
    if (end == std::string::npos) throw InvalidState(fmt::format("cannot parse state '{}'", text));
    const auto [ptr, ec] = std::from_chars(t.data() + pos, t.data() + end, s[n]);
    if (ec != std::errc{} || ptr != t.data() + end) throw InvalidState(fmt::format("cannot parse state '{}'", text));
    pos = end + 1;
  }
  return s;
}

std::string format_real(double x) { return fmt::format("{}", x); }

json game_to_json(const GameParams& params, const StationaryProfile& profile) {
  json doc;
  doc["p"] = params.p();
  doc["K"] = params.K();
  json x = json::object();
  const auto& space = *profile.space();
  for (std::size_t j = 0; j < space.interior_count(); ++j) {
    x[state_key(space[space.interior()[j]])] = profile.at(j);
  }
  doc["x"] = std::move(x);
  return doc;
}

GameDocument game_from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("$", "expected a JSON object");
  if (!doc.contains("p")) throw ConfigError("p", "missing");
  if (!doc.contains("K")) throw ConfigError("K", "missing");
  const json& p = doc["p"];
  if (!p.is_array() || p.size() != 3 || !std::all_of(p.begin(), p.end(), [](const json& v) { return v.is_number(); })) {
    throw ConfigError("p", "expected an array of three numbers");
  }
  if (!doc["K"].is_number_integer()) throw ConfigError("K", "expected an integer");
  const GameParams params(p[0].get<double>(), p[1].get<double>(), p[2].get<double>(), doc["K"].get<int>());
  auto space = enumerate_states(params.K());
  if (!doc.contains("x")) return {params, StationaryProfile::uniform(space)};

  const json& x = doc["x"];
  if (!x.is_object()) throw ConfigError("x", "expected an object keyed by \"s1,s2,s3\"");
  std::vector<Choice> entries(space->interior_count());
  std::vector<bool> seen(entries.size(), false);
  for (const auto& [key, value] : x.items()) {
    const std::string field = "x." + key;
    State s{};
    try {
      s = parse_state(key);
    } catch (const InvalidState& e) {
      throw ConfigError(field, e.what());
    }
    if (!space->contains(s)) throw ConfigError(field, fmt::format("not a state of K={}", params.K()));
    const long j = space->interior_index(space->index_of(s));
    if (j < 0) throw ConfigError(field, "choices are only defined at interior states");
    if (!value.is_array() || value.size() != 3) throw ConfigError(field, "expected [x1,x2,x3]");
    for (int n = 0; n < 3; ++n) {
      if (!value[n].is_number()) throw ConfigError(field, "expected numbers");
      const double v = value[n].get<double>();
      if (!(v >= 0.0 && v <= 1.0)) throw ConfigError(field, fmt::format("entry {} outside [0,1]", v));
      entries[static_cast<std::size_t>(j)][n] = v;
    }
    seen[static_cast<std::size_t>(j)] = true;
  }
  for (std::size_t j = 0; j < seen.size(); ++j) {
    if (!seen[j]) {
      throw IncompleteProfile(fmt::format("profile has no entry for interior state {}",
                                          to_string((*space)[space->interior()[j]])));
    }
  }
  return {params, StationaryProfile(space, std::move(entries))};
}

json certificate_to_json(const EquilibriumCertificate& cert) {
  json doc;
  doc["profile"] = game_to_json(cert.params, cert.profile);
  doc["gains"] = cert.gains;
  doc["method"] = to_string(cert.method);
  doc["tolerance"] = cert.tolerance;
  doc["J"] = cert.residual_j;
  doc["certified"] = cert.certified();
  if (cert.gamma) doc["gamma"] = *cert.gamma;
  return doc;
}

void write_payoff_csv(std::ostream& out, const StateSpace& space, const std::array<Eigen::VectorXd, 3>& values) {
  out << "s1,s2,s3,V1,V2,V3\n";
  for (std::size_t i = 0; i < space.size(); ++i) {
    const State& s = space[i];
    const auto e = static_cast<Eigen::Index>(i);
    out << fmt::format("{},{},{},{},{},{}\n", s[0], s[1], s[2], format_real(values[0][e]),
                       format_real(values[1][e]), format_real(values[2][e]));
  }
}

std::string simulation_csv_header() { return "K,p1,p2,p3,start,games,seed,f1,f2,f3,mean_rounds"; }

std::string simulation_csv_row(const GameParams& params, const SimulationResult& r) {
  const auto f = r.frequencies();
  return fmt::format("{},{},{},{},\"{}\",{},{},{},{},{},{}", params.K(), format_real(params.p1()),
                     format_real(params.p2()), format_real(params.p3()), state_key(r.start), r.games, r.seed,
                     format_real(f[0]), format_real(f[1]), format_real(f[2]), format_real(r.mean_rounds));
}

}  // namespace gruin
