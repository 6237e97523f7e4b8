#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <variant>
#include <vector>

#include "wpt/channel.hpp"
#include "wpt/policy.hpp"

namespace wpt {

/// Algorithm 1: harvest until E(t) >= gamma(t), then optimal power split.
struct OptimalPolicy {};

/// Harvest floor(beta * T) slots, then spend equal energy per remaining slot.
struct BetaPolicy {
  double beta = 0.5;
};

/// Harvest exactly stop_slot - 1 slots, then optimal power split.
struct ForcedStopPolicy {
  int stop_slot = 1;
};

using PolicySpec = std::variant<OptimalPolicy, BetaPolicy, ForcedStopPolicy>;

/// Throws ConfigError if the policy cannot run over a horizon of T slots.
void validate_policy(const PolicySpec& policy, int horizon);

/// Number of harvesting slots of a beta baseline, floor(beta * T).
int beta_harvest_slots(double beta, int horizon);

enum class Phase { Harvest, Transmit };

struct SlotRecord {
  int t = 0;
  std::size_t level = 0;  // 0-based channel index drawn in this slot
  double energy = 0.0;    // E(t), battery at the start of the slot
  Phase phase = Phase::Harvest;
  std::optional<double> alpha;  // set for transmit slots
  double bits = 0.0;
  double spent = 0.0;      // alpha(t) E(t)
  double harvested = 0.0;  // eta g(t) P
};

struct EpisodeTrace {
  std::vector<SlotRecord> slots;
  int stop_slot = 0;  // T_0, first transmit slot
  double initial_energy = 0.0;
  double final_energy = 0.0;  // E(T+1)
  double total_bits = 0.0;
  double total_harvested = 0.0;
  double total_spent = 0.0;

  /// Columns: t,phase,level,energy_J,alpha,bits
  void write_csv(std::ostream& os) const;
};

/// Per-episode scalars kept by the Monte Carlo engine.
struct EpisodeOutcome {
  double bits = 0.0;
  double harvested = 0.0;
  int stop_slot = 0;
};

/// Simulates one frame. The stopping test at slot t uses E(t) only; the
/// channel of slot t is drawn afterwards.
EpisodeTrace run_episode(const SystemParams& params,
                         const DiscreteChannel& channel,
                         const PolicyTables& tables, const PolicySpec& policy,
                         Stream& rng, double initial_energy = 0.0);

/// Same dynamics as run_episode without recording the trace.
EpisodeOutcome play_episode(const SystemParams& params,
                            const DiscreteChannel& channel,
                            const PolicyTables& tables,
                            const PolicySpec& policy, Stream& rng,
                            double initial_energy = 0.0);

struct MonteCarloOptions {
  std::size_t episodes = 10000;
  std::uint64_t master_seed = 0;
  unsigned workers = 1;  // 0 = hardware concurrency
  double initial_energy = 0.0;
};

struct MonteCarloSummary {
  std::size_t episodes = 0;
  double mean_bits = 0.0;
  double stddev_bits = 0.0;  // sample standard deviation
  double ci95 = 0.0;         // 1.96 * stddev / sqrt(episodes)
  double mean_harvested = 0.0;
  double mean_stop_slot = 0.0;
  std::uint64_t seed = 0;
};

/// Episode i draws from make_stream(master_seed, i), so the summary is
/// bit-identical for any worker count.
MonteCarloSummary run_monte_carlo(const SystemParams& params,
                                  const DiscreteChannel& channel,
                                  const PolicyTables& tables,
                                  const PolicySpec& policy,
                                  const MonteCarloOptions& options);

}  // namespace wpt
