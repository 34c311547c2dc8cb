// gruin: command-line front end for the three-player ruin game.
//
// Every subcommand resolves one JSON config (defaults < --config file <
// flags), runs, and writes CSV or JSON to --out (stdout by default).
// Failures print {"error":{...}} to stderr and exit nonzero.

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <fmt/chrono.h>
#include <fmt/format.h>

#include "gruin/equilibrium.hpp"
#include "gruin/experiments.hpp"
#include "gruin/io.hpp"
#include "gruin/payoff.hpp"
#include "gruin/simulator.hpp"

using namespace gruin;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

json common_defaults(double tol) {
  return {{"seed", 1}, {"tol", tol}, {"threads", 1}, {"out", "-"}};
}

// Default delta-v p list; the 0.00 entry is clamped to eps.
json default_p_list() {
  return json::array({{0.10, 0.10, 0.10},
                      {0.90, 0.00, 0.50},
                      {0.80, 0.80, 0.50},
                      {0.3922, 0.8932, 0.6634},
                      {0.53, 0.20, 0.80},
                      {0.9000, 0.8747, 0.2252}});
}

json defaults_for(const std::string& cmd) {
  json d;
  if (cmd == "solve") {
    d = common_defaults(SolverDefaults::kIterTol);
    d["method"] = "direct";
    d["closed_form"] = false;
    d["max_iters"] = SolverDefaults::kMaxIter;
  } else if (cmd == "best-response") {
    d = common_defaults(BestResponseDefaults::kTol);
    d["player"] = 1;
    d["max_iters"] = BestResponseDefaults::kMaxIter;
  } else if (cmd == "verify") {
    d = common_defaults(1e-8);
    d["gamma"] = nullptr;
  } else if (cmd == "mvi") {
    d = common_defaults(MviDefaults::kTol);
    d["max_iters"] = MviDefaults::kMaxIters;
    d["strict"] = false;
    d["gamma"] = nullptr;
  } else if (cmd == "enumerate") {
    d = common_defaults(1e-10);
    d["allow_large"] = false;
  } else if (cmd == "simulate") {
    d = common_defaults(0.0);
    d.erase("tol");
    d["start"] = nullptr;
    d["games"] = 100000;
    d["round_cap"] = SimulationOptions{}.round_cap;
  } else if (cmd == "sweep-convergence") {
    const SweepConfig s;
    d = common_defaults(s.tol);
    d["k_min"] = s.k_min;
    d["k_max"] = s.k_max;
    d["repetitions"] = s.repetitions;
    d["max_iters"] = s.max_iters;
    d["eps"] = s.sampling.eps;
    d["fixed_p"] = {nullptr, nullptr, nullptr};
    d["strict"] = false;
  } else if (cmd == "delta-v") {
    const DeltaVConfig s;
    d = common_defaults(s.tol);
    d["K"] = s.K;
    d["start"] = nullptr;
    d["p_list"] = default_p_list();
    d["max_iters"] = s.max_iters;
    d["eps"] = s.eps;
  }
  d["command"] = cmd;
  return d;
}

bool uses_game(const std::string& cmd) { return cmd != "sweep-convergence" && cmd != "delta-v"; }

template <typename T>
T field(const json& cfg, const std::string& key) {
  if (!cfg.contains(key) || cfg[key].is_null()) throw ConfigError(key, "missing");
  try {
    return cfg[key].get<T>();
  } catch (const json::exception&) {
    throw ConfigError(key, fmt::format("unexpected value {}", cfg[key].dump()));
  }
}

double positive(const json& cfg, const std::string& key) {
  const double v = field<double>(cfg, key);
  if (!(v > 0.0)) throw ConfigError(key, "must be positive");
  return v;
}

unsigned threads_of(const json& cfg) {
  const auto t = field<long long>(cfg, "threads");
  if (t < 0) throw ConfigError("threads", "must be >= 0");
  return t == 0 ? std::max(1u, std::thread::hardware_concurrency()) : static_cast<unsigned>(t);
}

std::size_t count_of(const json& cfg, const std::string& key) {
  const auto v = field<long long>(cfg, key);
  if (v < 1) throw ConfigError(key, "must be at least 1");
  return static_cast<std::size_t>(v);
}

Player player_of(const json& cfg) {
  const int n = field<int>(cfg, "player");
  if (n < 1 || n > 3) throw ConfigError("player", "must be 1, 2 or 3");
  return player_at(n - 1);
}

std::optional<State> start_of(const json& cfg) {
  if (!cfg.contains("start") || cfg["start"].is_null()) return std::nullopt;
  try {
    return parse_state(field<std::string>(cfg, "start"));
  } catch (const InvalidState& e) {
    throw ConfigError("start", e.what());
  }
}

json resolve(const std::string& cmd, const std::string& config_path, const json& flags) {
  json cfg = defaults_for(cmd);
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) throw ConfigError("--config", fmt::format("cannot open '{}'", config_path));
    json file;
    try {
      file = json::parse(in);
    } catch (const json::parse_error& e) {
      throw ConfigError("--config", e.what());
    }
    if (!file.is_object()) throw ConfigError("$", "config must be a JSON object");
    if (file.contains("command") && file["command"] != cmd) {
      throw ConfigError("command", fmt::format("config is for '{}'", file["command"].dump()));
    }
    cfg.update(file);
  }
  cfg.update(flags);

  const json defaults = defaults_for(cmd);
  std::set<std::string> allowed;
  for (const auto& [k, v] : defaults.items()) allowed.insert(k);
  if (uses_game(cmd)) allowed.insert({"p", "K", "x", "fill"});
  for (const auto& [k, v] : cfg.items()) {
    if (!allowed.count(k)) throw ConfigError(k, fmt::format("unknown field for '{}'", cmd));
  }
  return cfg;
}

// Game and profile from the resolved config. Without "x" the profile is
// constant at "fill", falling back to `fallback`.
GameDocument game_of(const json& cfg, double fallback) {
  json doc = {{"p", cfg.contains("p") ? cfg["p"] : json()}, {"K", cfg.contains("K") ? cfg["K"] : json()}};
  if (doc["p"].is_null()) throw ConfigError("p", "missing");
  if (doc["K"].is_null()) throw ConfigError("K", "missing");
  if (cfg.contains("x") && !cfg["x"].is_null()) {
    doc["x"] = cfg["x"];
    return game_from_json(doc);
  }
  const GameDocument g = game_from_json(doc);
  const double fill = cfg.contains("fill") && !cfg["fill"].is_null() ? field<double>(cfg, "fill") : fallback;
  return {g.params, StationaryProfile(g.profile.space(), fill)};
}

std::string timestamp() {
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::time(nullptr)));
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (path != "-") {
      file_.open(path, std::ios::binary);
      if (!file_) throw ConfigError("out", fmt::format("cannot write '{}'", path));
    }
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

 private:
  std::ofstream file_;
};

// Leading "#" lines of every CSV: the timestamp comes first so runs can be
// compared after dropping line one. Output path and thread count do not
// change results and are left out of the echoed config.
void csv_preamble(std::ostream& out, const json& cfg, const std::vector<std::string>& extra = {}) {
  json echo = cfg;
  echo.erase("out");
  echo.erase("threads");
  out << "# generated " << timestamp() << '\n';
  out << "# config " << echo.dump() << '\n';
  for (const auto& line : extra) out << "# " << line << '\n';
}

void write_json(std::ostream& out, json doc) {
  doc["generated"] = timestamp();
  out << doc.dump(2) << '\n';
}

json strategy_json(const StateSpace& space, const std::vector<double>& s) {
  json out = json::object();
  for (std::size_t j = 0; j < s.size(); ++j) out[state_key(space[space.interior()[j]])] = s[j];
  return out;
}

int run_solve(const json& cfg, std::ostream& out) {
  const auto [params, profile] = game_of(cfg, 0.5);
  const auto method = field<std::string>(cfg, "method");
  const double tol = positive(cfg, "tol");
  const std::size_t max_iters = count_of(cfg, "max_iters");
  const auto tm = build_transition_matrix(params, profile);

  std::array<Eigen::VectorXd, 3> values;
  std::vector<std::string> notes{fmt::format("method {}", method)};
  if (method == "direct") {
    const auto all = solve_all_direct(tm);
    for (int n = 0; n < 3; ++n) values[n] = all[n].values;
  } else if (method == "fundamental") {
    const auto report = absorption_report(tm);
    for (Player n : kPlayers) values[index(n)] = report.payoff(n);
  } else if (method == "power" || method == "fixed-point") {
    for (Player n : kPlayers) {
      const auto v = method == "power"
                         ? solve_payoff_power(tm, n, tol, max_iters)
                         : solve_payoff_fixed_point(tm, n, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(tm.size())),
                                                    tol, max_iters);
      values[index(n)] = v.values;
      notes.push_back(fmt::format("iterations V{} {}", index(n) + 1, v.iterations));
    }
  } else {
    throw ConfigError("method", "expected direct, power, fixed-point or fundamental");
  }

  if (field<bool>(cfg, "closed_form")) {
    if (params.K() != 3) throw ConfigError("closed_form", "the closed form exists only for K=3");
    double diff = 0.0;
    for (Player n : kPlayers) {
      const auto cf = closed_form_k3(params, profile.at(0), n);
      diff = std::max(diff, (cf.values - values[index(n)]).cwiseAbs().maxCoeff());
    }
    notes.push_back(fmt::format("closed_form_max_abs_diff {}", format_real(diff)));
  }
  csv_preamble(out, cfg, notes);
  write_payoff_csv(out, tm.space(), values);
  return 0;
}

int run_best_response(const json& cfg, std::ostream& out) {
  const auto [params, profile] = game_of(cfg, 0.5);
  const Player n = player_of(cfg);
  const auto br = best_response(params, profile, n, positive(cfg, "tol"), count_of(cfg, "max_iters"));
  const auto incumbent = solve_payoff_direct(build_transition_matrix(params, profile), n);
  const auto& space = *profile.space();
  json payoff = json::object();
  for (std::size_t i = 0; i < space.size(); ++i) payoff[state_key(space[i])] = br.payoff[i];
  write_json(out, {{"player", index(n) + 1},
                   {"strategy", strategy_json(space, br.strategy)},
                   {"payoff", payoff},
                   {"gain", (br.payoff.values - incumbent.values).maxCoeff()},
                   {"iterations", br.iterations},
                   {"profile", game_to_json(params, profile.with_player(n, br.strategy))}});
  return 0;
}

std::optional<DiscountedGameParams> discount_of(const json& cfg, const GameParams& params) {
  if (!cfg.contains("gamma") || cfg["gamma"].is_null()) return std::nullopt;
  return DiscountedGameParams(params, field<double>(cfg, "gamma"));
}

int run_verify(const json& cfg, std::ostream& out) {
  const auto [params, profile] = game_of(cfg, 0.5);
  const double tol = positive(cfg, "tol");
  const auto d = discount_of(cfg, params);
  const auto cert = d ? verify_discounted_ne(*d, profile, tol) : verify_ne(params, profile, tol);
  write_json(out, certificate_to_json(cert));
  return 0;
}

int run_mvi(const json& cfg, std::ostream& out) {
  const auto [params, seed] = game_of(cfg, 0.0);
  const MviOptions opts{positive(cfg, "tol"), count_of(cfg, "max_iters"), !field<bool>(cfg, "strict")};
  const auto d = discount_of(cfg, params);
  const auto res = d ? discounted_mvi(*d, seed, opts) : mvi(params, seed, opts);
  json doc = {{"status", to_string(res.status)},
              {"stop", to_string(res.stop)},
              {"iterations", res.iterations},
              {"last_change", res.last_change},
              {"J", res.residual_j},
              {"profile", game_to_json(params, res.profile)}};
  if (res.certificate) doc["certificate"] = certificate_to_json(*res.certificate);
  write_json(out, doc);
  return 0;
}

int run_enumerate(const json& cfg, std::ostream& out) {
  const auto [params, unused] = game_of(cfg, 0.5);
  const auto res = exhaustive_enumeration(params, positive(cfg, "tol"),
                                          {field<bool>(cfg, "allow_large"), threads_of(cfg)});
  json list = json::array();
  for (const auto& c : res.equilibria) list.push_back(certificate_to_json(c));
  write_json(out, {{"evaluated", res.evaluated}, {"count", res.equilibria.size()}, {"equilibria", list}});
  return 0;
}

int run_simulate(const json& cfg, std::ostream& out) {
  const auto [params, profile] = game_of(cfg, 0.5);
  const State start = start_of(cfg).value_or(balanced_start(params.K()));
  if (!profile.space()->contains(start)) throw ConfigError("start", fmt::format("not a state of K={}", params.K()));
  const SimulationOptions opts{count_of(cfg, "round_cap"), threads_of(cfg)};
  const auto r = simulate(params, profile, start, count_of(cfg, "games"), field<std::uint64_t>(cfg, "seed"), opts);
  csv_preamble(out, cfg, {fmt::format("start {}", state_key(start))});
  out << simulation_csv_header() << '\n' << simulation_csv_row(params, r) << '\n';
  return 0;
}

int run_sweep(const json& cfg, std::ostream& out) {
  SweepConfig s;
  s.k_min = field<int>(cfg, "k_min");
  s.k_max = field<int>(cfg, "k_max");
  s.repetitions = field<int>(cfg, "repetitions");
  s.seed = field<std::uint64_t>(cfg, "seed");
  s.tol = positive(cfg, "tol");
  s.max_iters = count_of(cfg, "max_iters");
  s.certify_iterates = !field<bool>(cfg, "strict");
  s.threads = threads_of(cfg);
  s.sampling.eps = positive(cfg, "eps");
  const json& fixed = cfg["fixed_p"];
  if (!fixed.is_array() || fixed.size() != 3) throw ConfigError("fixed_p", "expected [p1|null, p2|null, p3|null]");
  for (int n = 0; n < 3; ++n) {
    if (fixed[n].is_null()) continue;
    if (!fixed[n].is_number()) throw ConfigError(fmt::format("fixed_p[{}]", n), "expected a number or null");
    s.sampling.fixed[n] = fixed[n].get<double>();
  }
  const auto rows = run_sweep_convergence(s);
  csv_preamble(out, cfg);
  write_sweep_csv(out, rows);
  return 0;
}

int run_delta_v_cmd(const json& cfg, std::ostream& out) {
  DeltaVConfig d;
  d.K = field<int>(cfg, "K");
  d.start = start_of(cfg);
  d.seed = field<std::uint64_t>(cfg, "seed");
  d.eps = positive(cfg, "eps");
  d.tol = positive(cfg, "tol");
  d.max_iters = count_of(cfg, "max_iters");
  d.threads = threads_of(cfg);
  try {
    d.p_list = cfg["p_list"].get<std::vector<std::array<double, 3>>>();
  } catch (const json::exception&) {
    throw ConfigError("p_list", "expected a list of [p1,p2,p3]");
  }
  const auto rows = run_delta_v(d);
  csv_preamble(out, cfg, {fmt::format("start {}", state_key(d.start.value_or(balanced_start(d.K))))});
  write_delta_v_csv(out, rows);
  return 0;
}

void print_error(const std::string& kind, const std::string& message, const std::string& field = {}) {
  json err = {{"kind", kind}, {"message", message}};
  if (!field.empty()) err["field"] = field;
  std::cerr << json{{"error", err}}.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Three-player gambler's ruin: payoffs, equilibria and simulation"};
  app.require_subcommand(1);

  struct Sub {
    std::string name;
    std::string help;
    int (*run)(const json&, std::ostream&);
  };
  const std::vector<Sub> subs{
      {"solve", "winning probabilities of every player from every state", run_solve},
      {"best-response", "best deterministic reply of one player", run_best_response},
      {"verify", "check a profile against all unilateral deviations", run_verify},
      {"mvi", "MultiValue Iteration search for an equilibrium", run_mvi},
      {"enumerate", "all deterministic equilibria (K<=5)", run_enumerate},
      {"simulate", "Monte Carlo play from a start state", run_simulate},
      {"sweep-convergence", "MVI success rate over random p, per K", run_sweep},
      {"delta-v", "equilibrium advantage over random and uniform play", run_delta_v_cmd},
  };

  json flags = json::object();
  std::string config_path;
  bool emit_config = false;
  std::vector<CLI::App*> handles;
  for (const auto& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    handles.push_back(sub);
    sub->add_option("--config", config_path, "JSON config; flags override its fields");
    sub->add_flag("--emit-config", emit_config, "print the resolved config and exit");
    sub->add_option_function<std::uint64_t>("--seed", [&](std::uint64_t v) { flags["seed"] = v; }, "master seed");
    sub->add_option_function<std::string>("--out", [&](const std::string& v) { flags["out"] = v; },
                                          "output path, - for stdout");
    sub->add_option_function<int>("--threads", [&](int v) { flags["threads"] = v; }, "worker threads, 0 = all cores");
    if (s.name != "simulate") {
      sub->add_option_function<double>("--tol", [&](double v) { flags["tol"] = v; }, "tolerance");
    }
    if (uses_game(s.name)) {
      sub->add_option_function<std::vector<double>>("--p", [&](const std::vector<double>& v) { flags["p"] = v; },
                                                    "p1 p2 p3")
          ->expected(3);
      sub->add_option_function<int>("--K", [&](int v) { flags["K"] = v; }, "total capital");
      sub->add_option_function<double>("--fill", [&](double v) { flags["fill"] = v; },
                                       "constant profile entry when the config has no x");
    }
    if (s.name == "solve") {
      sub->add_option_function<std::string>("--method", [&](const std::string& v) { flags["method"] = v; },
                                            "direct | power | fixed-point | fundamental");
      sub->add_flag_function("--closed-form", [&](std::int64_t) { flags["closed_form"] = true; },
                             "compare with the K=3 closed form");
    }
    if (s.name == "solve" || s.name == "best-response" || s.name == "mvi" || s.name == "sweep-convergence" ||
        s.name == "delta-v") {
      sub->add_option_function<long long>("--max-iters", [&](long long v) { flags["max_iters"] = v; },
                                          "iteration cap");
    }
    if (s.name == "best-response") {
      sub->add_option_function<int>("--player", [&](int v) { flags["player"] = v; }, "1, 2 or 3");
    }
    if (s.name == "verify" || s.name == "mvi") {
      sub->add_option_function<double>("--gamma", [&](double v) { flags["gamma"] = v; },
                                       "discount factor of the auxiliary game");
    }
    if (s.name == "mvi" || s.name == "sweep-convergence") {
      sub->add_flag_function("--strict", [&](std::int64_t) { flags["strict"] = true; },
                             "stop only when values settle");
    }
    if (s.name == "enumerate") {
      sub->add_flag_function("--allow-large", [&](std::int64_t) { flags["allow_large"] = true; }, "permit K>5");
    }
    if (s.name == "simulate" || s.name == "delta-v") {
      sub->add_option_function<std::string>("--start", [&](const std::string& v) { flags["start"] = v; },
                                            "start state s1,s2,s3");
    }
    if (s.name == "simulate") {
      sub->add_option_function<long long>("--games", [&](long long v) { flags["games"] = v; }, "number of games");
      sub->add_option_function<long long>("--round-cap", [&](long long v) { flags["round_cap"] = v; },
                                          "rounds per game before failing");
    }
    if (s.name == "sweep-convergence") {
      sub->add_option_function<int>("--k-min", [&](int v) { flags["k_min"] = v; }, "smallest K");
      sub->add_option_function<int>("--k-max", [&](int v) { flags["k_max"] = v; }, "largest K");
      sub->add_option_function<int>("--repetitions", [&](int v) { flags["repetitions"] = v; }, "random p draws");
      for (int n = 0; n < 3; ++n) {
        sub->add_option_function<double>(
            fmt::format("--fix-p{}", n + 1),
            [&flags, n](double v) {
              if (!flags.contains("fixed_p")) flags["fixed_p"] = {nullptr, nullptr, nullptr};
              flags["fixed_p"][n] = v;
            },
            "hold this coordinate fixed (clamped to [eps, 1-eps])");
      }
    }
    if (s.name == "delta-v") {
      sub->add_option_function<int>("--K", [&](int v) { flags["K"] = v; }, "total capital");
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("usage-error", e.what());
    return kExitUsage;
  }

  std::size_t chosen = 0;
  while (!handles[chosen]->parsed()) ++chosen;
  const Sub& sub = subs[chosen];

  try {
    const json cfg = resolve(sub.name, config_path, flags);
    if (emit_config) {
      std::cout << cfg.dump(2) << '\n';
      return 0;
    }
    Output out(field<std::string>(cfg, "out"));
    return sub.run(cfg, out.stream());
  } catch (const ConfigError& e) {
    print_error(e.kind(), e.what(), e.field());
    return kExitUsage;
  } catch (const GameError& e) {
    print_error(e.kind(), e.what());
    return kExitFailure;
  } catch (const std::exception& e) {
    print_error("internal-error", e.what());
    return kExitFailure;
  }
}
