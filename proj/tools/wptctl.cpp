// wptctl: policy tables, Monte Carlo comparisons, parameter sweeps and oracle
// checks for the harvest-then-transmit controller.
//
// Exit codes: 0 success, 2 configuration error, 3 internal invariant violation.

#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "wpt/errors.hpp"
#include "wpt/experiment.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitInvariant = 3;

struct Flags {
  std::string config_path;
  std::optional<int> T;
  std::optional<int> N;
  std::optional<double> m, lambda, P, eta, mean, gain, E1, E_max;
  std::optional<std::string> law;
  std::optional<std::size_t> episodes, K_E, K_alpha;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::vector<std::string> policies;
  std::optional<std::string> sweep;
  std::vector<std::string> values;
  std::optional<std::string> out, format;
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config_path, "JSON config file (flags override it)");
  sub->add_option("--T", f.T, "horizon in slots");
  sub->add_option("--N", f.N, "number of channel levels");
  sub->add_option("--m", f.m, "monomial order");
  sub->add_option("--lambda", f.lambda, "energy coefficient");
  sub->add_option("--P", f.P, "AP transmit power");
  sub->add_option("--eta", f.eta, "harvesting efficiency");
  sub->add_option("--law", f.law, "fading law: exponential | deterministic");
  sub->add_option("--mean", f.mean, "mean gain of the exponential law");
  sub->add_option("--gain", f.gain, "gain of the deterministic law");
  sub->add_option("--E1", f.E1, "battery energy at slot 1");
  sub->add_option("--episodes", f.episodes, "Monte Carlo episodes per policy");
  sub->add_option("--seed", f.seed, "master seed (random if omitted)");
  sub->add_option("--workers", f.workers, "worker threads (0 = all cores)");
  sub->add_option("--policy", f.policies,
                  "optimal | beta:<b> | forced:<T0> (repeatable)");
  sub->add_option("--sweep", f.sweep, "T | N | m | eta | forced_T0");
  sub->add_option("--values", f.values, "sweep values")->delimiter(',');
  sub->add_option("--out", f.out, "output file (default stdout)");
  sub->add_option("--format", f.format, "csv | json");
  sub->add_option("--K_E", f.K_E, "oracle energy grid points");
  sub->add_option("--K_alpha", f.K_alpha, "oracle alpha grid points");
  sub->add_option("--E_max", f.E_max, "oracle energy grid top");
}

wpt::ExperimentConfig build_config(const Flags& f) {
  wpt::ExperimentConfig cfg;
  if (!f.config_path.empty()) {
    std::ifstream in(f.config_path);
    if (!in) throw wpt::ConfigError("cannot open config " + f.config_path);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw wpt::ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    cfg.merge_json(j);
  }

  nlohmann::json overrides = nlohmann::json::object();
  if (f.T) overrides["T"] = *f.T;
  if (f.N) overrides["N"] = *f.N;
  if (f.m) overrides["m"] = *f.m;
  if (f.lambda) overrides["lambda"] = *f.lambda;
  if (f.P) overrides["P"] = *f.P;
  if (f.eta) overrides["eta"] = *f.eta;
  if (f.E1) overrides["E1"] = *f.E1;
  if (f.episodes) overrides["episodes"] = *f.episodes;
  if (f.seed) overrides["seed"] = *f.seed;
  if (f.workers) overrides["workers"] = *f.workers;
  if (!f.policies.empty()) overrides["policies"] = f.policies;
  if (f.sweep) overrides["sweep"] = *f.sweep;
  if (f.out) overrides["out"] = *f.out;
  if (f.format) overrides["format"] = *f.format;
  if (f.K_E) overrides["K_E"] = *f.K_E;
  if (f.K_alpha) overrides["K_alpha"] = *f.K_alpha;
  if (f.E_max) overrides["E_max"] = *f.E_max;
  if (f.law || f.mean || f.gain) {
    nlohmann::json ch = {{"law", f.law.value_or("exponential")},
                         {"N", cfg.channel.levels}};
    if (f.mean) ch["mean"] = *f.mean;
    if (f.gain) ch["value"] = *f.gain;
    overrides["channel"] = ch;
  }
  cfg.merge_json(overrides);
  if (f.N) cfg.channel.levels = static_cast<std::size_t>(*f.N);

  if (!f.values.empty()) {
    cfg.sweep_values.clear();
    for (const auto& v : f.values) cfg.sweep_values.push_back(wpt::parse_value(v));
  }
  if (cfg.policies.empty())
    for (const char* p : {"optimal", "beta:1/3", "beta:1/2", "beta:2/3"})
      cfg.policies.push_back(wpt::parse_policy(p));
  return cfg;
}

void resolve_seed(wpt::ExperimentConfig& cfg) {
  if (cfg.seed) return;
  std::random_device rd;
  cfg.seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  std::cerr << "seed: " << *cfg.seed << '\n';
}

void echo_config(const wpt::ExperimentConfig& cfg) {
  nlohmann::json j = {{"T", cfg.params.horizon},
                      {"m", cfg.params.order},
                      {"lambda", cfg.params.energy_coeff},
                      {"P", cfg.params.ap_power},
                      {"eta", cfg.params.efficiency},
                      {"E1", cfg.initial_energy},
                      {"episodes", cfg.episodes},
                      {"seed", cfg.seed.value_or(0)},
                      {"channel", cfg.channel.build().to_json()}};
  std::cerr << "config: " << j.dump() << '\n';
}

void emit(const wpt::ExperimentConfig& cfg, const std::string& text) {
  if (cfg.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream os(cfg.out, std::ios::binary);
  if (!os) throw wpt::ConfigError("cannot write " + cfg.out);
  os << text;
}

std::string render(const wpt::ExperimentConfig& cfg,
                   const std::vector<wpt::ResultRecord>& records) {
  return cfg.format == wpt::OutputFormat::Json ? wpt::render_json(records)
                                                : wpt::render_csv(records);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Harvest-then-transmit controller: tables, simulation, sweeps"};
  app.require_subcommand(1);
  Flags flags;
  auto* tables = app.add_subcommand("tables", "dump Q and gamma tables as JSON");
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo per policy");
  auto* sweep = app.add_subcommand("sweep", "Monte Carlo over a swept parameter");
  auto* oracle = app.add_subcommand("oracle-check",
                                    "closed forms vs brute-force DP (JSON report)");
  auto* trace = app.add_subcommand("trace", "CSV trace of one episode");
  for (auto* sub : {tables, simulate, sweep, oracle, trace}) add_common(sub, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    wpt::ExperimentConfig cfg = build_config(flags);
    if (tables->parsed()) {
      emit(cfg, wpt::tables_report(cfg).dump(2) + "\n");
    } else if (simulate->parsed()) {
      resolve_seed(cfg);
      cfg.validate();
      echo_config(cfg);
      emit(cfg, render(cfg, wpt::simulate(cfg)));
    } else if (sweep->parsed()) {
      resolve_seed(cfg);
      emit(cfg, render(cfg, wpt::sweep(cfg)));
    } else if (oracle->parsed()) {
      emit(cfg, wpt::oracle_check(cfg).to_json().dump(2) + "\n");
    } else if (trace->parsed()) {
      resolve_seed(cfg);
      cfg.validate();
      const auto channel = cfg.channel.build();
      const wpt::PolicyTables pt(cfg.params, channel);
      wpt::Stream rng = wpt::make_stream(*cfg.seed, 0);
      const auto tr = wpt::run_episode(cfg.params, channel, pt,
                                       cfg.policies.front().spec, rng,
                                       cfg.initial_energy);
      std::ostringstream os;
      tr.write_csv(os);
      emit(cfg, os.str());
    }
  } catch (const wpt::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const wpt::InvariantViolation& e) {
    std::cerr << "invariant violation: " << e.what() << '\n';
    return kExitInvariant;
  }
  return 0;
}
