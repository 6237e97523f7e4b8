#pragma once

// Experiment configuration, sweeps and result rendering behind the CLI.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "wpt/channel.hpp"
#include "wpt/oracle.hpp"
#include "wpt/policy.hpp"
#include "wpt/sim.hpp"

namespace wpt {

/// A policy plus the token it was requested with ("optimal", "beta:0.5",
/// "beta:1/3", "forced:7").
struct NamedPolicy {
  std::string name;
  PolicySpec spec;
};

NamedPolicy parse_policy(std::string_view token);

/// Decimal or simple fraction ("1/3").
double parse_value(std::string_view text);

/// Either a fading law discretized into `levels` bins or an explicit channel.
struct ChannelSpec {
  FadingLaw law = ExponentialLaw{1.0};
  std::size_t levels = 20;
  std::optional<DiscreteChannel> explicit_channel;

  DiscreteChannel build() const;
};

enum class SweepVar { T, N, m, eta, forced_T0 };

std::string_view to_string(SweepVar var);
SweepVar parse_sweep_var(std::string_view name);

enum class OutputFormat { Csv, Json };

struct ExperimentConfig {
  SystemParams params{50, 10.0, 1.0, 0.1, 3.0};
  ChannelSpec channel;
  std::vector<NamedPolicy> policies;
  std::size_t episodes = 10000;
  std::optional<std::uint64_t> seed;
  unsigned workers = 0;
  double initial_energy = 0.0;

  std::optional<SweepVar> sweep;
  std::vector<double> sweep_values;

  std::string out;  // empty = stdout
  OutputFormat format = OutputFormat::Csv;

  // oracle-check grid; e_max <= 0 selects the default.
  std::size_t oracle_energy_points = 512;
  std::size_t oracle_alpha_points = 512;
  double oracle_e_max = 0.0;

  /// Overlays the keys present in `j` onto this config.
  void merge_json(const nlohmann::json& j);
  /// Throws ConfigError on any invalid field.
  void validate() const;
};

/// One output row. sweep_var is "none" and sweep_value empty for plain
/// simulate runs.
struct ResultRecord {
  std::string sweep_var;
  std::optional<double> sweep_value;
  std::string policy;
  std::size_t episodes = 0;
  double mean_bits = 0.0;
  double ci95 = 0.0;
  double mean_harvest = 0.0;
  double mean_stop_slot = 0.0;
  std::uint64_t seed = 0;
};

inline constexpr std::string_view kCsvHeader =
    "sweep_var,sweep_value,policy,episodes,mean_bits,ci95,mean_harvest_J,"
    "mean_T0,seed";

/// Q and gamma tables as {"Q": [...], "gamma": [...]}.
nlohmann::json tables_report(const ExperimentConfig& config);

/// One record per policy, sorted by policy name. Requires config.seed.
std::vector<ResultRecord> simulate(const ExperimentConfig& config);

/// Records for every (sweep value, policy), sorted by value then policy name.
/// A forced_T0 sweep ignores config.policies and defaults to T0 = 1..T-1.
std::vector<ResultRecord> sweep(const ExperimentConfig& config);

std::string render_csv(const std::vector<ResultRecord>& records);
std::string render_json(const std::vector<ResultRecord>& records);
std::vector<ResultRecord> parse_csv(std::string_view text);
std::vector<ResultRecord> parse_json(std::string_view text);

/// Closed form vs brute-force DP on one instance.
struct OracleReport {
  double alpha_step = 0.0;
  double energy_step = 0.0;
  double e_max = 0.0;
  double it_max_rel_error = 0.0;
  double alpha_max_abs_error = 0.0;
  bool single_crossing = true;
  double threshold_max_abs_error = 0.0;
  int thresholds_on_grid = 0;
  int thresholds_beyond_grid = 0;
  bool thresholds_consistent = true;
  double stopping_value_at_start = 0.0;  // J_1(E(1))

  nlohmann::json to_json() const;
};

OracleReport compare_with_oracle(const SystemParams& params,
                                 const DiscreteChannel& channel,
                                 const oracle::GridSpec& grid,
                                 double initial_energy = 0.0);

OracleReport oracle_check(const ExperimentConfig& config);

}  // namespace wpt
