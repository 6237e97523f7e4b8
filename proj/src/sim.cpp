#include "wpt/sim.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "wpt/errors.hpp"
#include "wpt/format.hpp"

namespace wpt {

int beta_harvest_slots(double beta, int horizon) {
  // The slack keeps exact products such as (2/3) * 30 from rounding down.
  return static_cast<int>(std::floor(beta * horizon + 1e-9));
}

void validate_policy(const PolicySpec& policy, int horizon) {
  if (const auto* b = std::get_if<BetaPolicy>(&policy)) {
    if (!(b->beta > 0.0 && b->beta < 1.0))
      throw ConfigError("beta must lie in (0, 1)");
    if (beta_harvest_slots(b->beta, horizon) >= horizon)
      throw ConfigError("beta leaves no transmit slot before the deadline");
  } else if (const auto* f = std::get_if<ForcedStopPolicy>(&policy)) {
    if (f->stop_slot < 1 || f->stop_slot > horizon)
      throw ConfigError("forced stop slot must satisfy 1 <= T0 <= T");
  }
}

namespace {

struct NullRecorder {
  void harvest(int, std::size_t, double, double) {}
  void transmit(int, std::size_t, double, double, double, double) {}
};

struct TraceRecorder {
  EpisodeTrace* trace;
  void harvest(int t, std::size_t level, double energy, double gained) {
    trace->slots.push_back(
        {t, level, energy, Phase::Harvest, std::nullopt, 0.0, 0.0, gained});
  }
  void transmit(int t, std::size_t level, double energy, double alpha,
                double spent, double bits) {
    trace->slots.push_back(
        {t, level, energy, Phase::Transmit, alpha, bits, spent, 0.0});
  }
};

struct Totals {
  int stop_slot = 0;
  double final_energy = 0.0;
  double bits = 0.0;
  double harvested = 0.0;
  double spent = 0.0;
};

template <class Recorder>
Totals play(const SystemParams& params, const DiscreteChannel& channel,
            const PolicyTables& tables, const PolicySpec& policy, Stream& rng,
            double initial_energy, Recorder& rec) {
  const int horizon = params.horizon;
  const auto* beta = std::get_if<BetaPolicy>(&policy);
  const auto* forced = std::get_if<ForcedStopPolicy>(&policy);
  const int beta_slots = beta ? beta_harvest_slots(beta->beta, horizon) : 0;

  auto stop_now = [&](int t, double energy) {
    if (beta) return t - 1 >= beta_slots;
    if (forced) return t >= forced->stop_slot;
    return should_stop(t, energy, tables);
  };

  Totals out;
  double energy = initial_energy;
  int t = 1;
  for (; t <= horizon; ++t) {
    if (stop_now(t, energy)) break;
    const std::size_t n = channel.sample(rng);
    const double gained = harvest_amount(params, channel.level(n));
    rec.harvest(t, n, energy, gained);
    out.harvested += gained;
    energy += gained;
  }
  out.stop_slot = t;

  for (; t <= horizon; ++t) {
    const std::size_t n = channel.sample(rng);
    const double gain = channel.level(n);
    const double alpha = beta ? 1.0 / static_cast<double>(horizon - t + 1)
                              : alpha_star(t, gain, tables.q());
    const double spent = alpha * energy;
    const double bits = bits_for_energy(params, spent, gain);
    rec.transmit(t, n, energy, alpha, spent, bits);
    out.bits += bits;
    out.spent += spent;
    energy = (1.0 - alpha) * energy;
  }
  out.final_energy = energy;
  return out;
}

void check_inputs(const SystemParams& params, const PolicyTables& tables,
                  const PolicySpec& policy, double initial_energy) {
  params.validate();
  if (tables.horizon() != params.horizon)
    throw ConfigError("policy tables were built for a different horizon");
  validate_policy(policy, params.horizon);
  if (!(initial_energy >= 0.0) || !std::isfinite(initial_energy))
    throw ConfigError("initial battery energy must be >= 0");
}

}  // namespace

EpisodeTrace run_episode(const SystemParams& params,
                         const DiscreteChannel& channel,
                         const PolicyTables& tables, const PolicySpec& policy,
                         Stream& rng, double initial_energy) {
  check_inputs(params, tables, policy, initial_energy);
  EpisodeTrace trace;
  trace.slots.reserve(static_cast<std::size_t>(params.horizon));
  trace.initial_energy = initial_energy;
  TraceRecorder rec{&trace};
  const Totals totals =
      play(params, channel, tables, policy, rng, initial_energy, rec);
  trace.stop_slot = totals.stop_slot;
  trace.final_energy = totals.final_energy;
  trace.total_bits = totals.bits;
  trace.total_harvested = totals.harvested;
  trace.total_spent = totals.spent;
  return trace;
}

EpisodeOutcome play_episode(const SystemParams& params,
                            const DiscreteChannel& channel,
                            const PolicyTables& tables,
                            const PolicySpec& policy, Stream& rng,
                            double initial_energy) {
  check_inputs(params, tables, policy, initial_energy);
  NullRecorder rec;
  const Totals totals =
      play(params, channel, tables, policy, rng, initial_energy, rec);
  return {totals.bits, totals.harvested, totals.stop_slot};
}

void EpisodeTrace::write_csv(std::ostream& os) const {
  os << "t,phase,level,energy_J,alpha,bits\n";
  for (const SlotRecord& s : slots) {
    os << s.t << ',' << (s.phase == Phase::Harvest ? "EH" : "IT") << ','
       << s.level << ',' << format_double(s.energy) << ','
       << (s.alpha ? format_double(*s.alpha) : std::string()) << ','
       << format_double(s.bits) << '\n';
  }
}

MonteCarloSummary run_monte_carlo(const SystemParams& params,
                                  const DiscreteChannel& channel,
                                  const PolicyTables& tables,
                                  const PolicySpec& policy,
                                  const MonteCarloOptions& options) {
  if (options.episodes == 0)
    throw ConfigError("Monte Carlo needs at least one episode");
  check_inputs(params, tables, policy, options.initial_energy);

  const std::size_t count = options.episodes;
  std::vector<EpisodeOutcome> outcomes(count);
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      Stream rng = make_stream(options.master_seed, i);
      NullRecorder rec;
      const Totals totals = play(params, channel, tables, policy, rng,
                                 options.initial_energy, rec);
      outcomes[i] = {totals.bits, totals.harvested, totals.stop_slot};
    }
  };

  unsigned workers = options.workers == 0
                         ? std::max(1u, std::thread::hardware_concurrency())
                         : options.workers;
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));
  if (workers <= 1) {
    work(0, count);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (count + workers - 1) / workers;
    for (std::size_t begin = 0; begin < count; begin += chunk)
      pool.emplace_back(work, begin, std::min(count, begin + chunk));
  }

  // Reduced in episode order so the result does not depend on `workers`.
  MonteCarloSummary s;
  s.episodes = count;
  s.seed = options.master_seed;
  const double n = static_cast<double>(count);
  double bits = 0.0, harvested = 0.0, stop = 0.0;
  for (const auto& o : outcomes) {
    bits += o.bits;
    harvested += o.harvested;
    stop += o.stop_slot;
  }
  s.mean_bits = bits / n;
  s.mean_harvested = harvested / n;
  s.mean_stop_slot = stop / n;
  if (count > 1) {
    double ss = 0.0;
    for (const auto& o : outcomes) {
      const double d = o.bits - s.mean_bits;
      ss += d * d;
    }
    s.stddev_bits = std::sqrt(ss / (n - 1.0));
  }
  s.ci95 = 1.96 * s.stddev_bits / std::sqrt(n);
  return s;
}

}  // namespace wpt
