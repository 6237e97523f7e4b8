#include "wpt/policy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wpt/errors.hpp"

namespace wpt {

void SystemParams::validate() const {
  if (horizon < 2) throw ConfigError("horizon T must be >= 2");
  if (!(ap_power > 0.0) || !std::isfinite(ap_power))
    throw ConfigError("AP power P must be > 0");
  if (!(efficiency > 0.0 && efficiency <= 1.0))
    throw ConfigError("harvesting efficiency eta must lie in (0, 1]");
  if (!(energy_coeff > 0.0) || !std::isfinite(energy_coeff))
    throw ConfigError("energy coefficient lambda must be > 0");
  if (!(order > 1.0 + kMinOrderGap) || !std::isfinite(order))
    throw ConfigError("monomial order m must be > 1");
}

double bits_for_energy(const SystemParams& p, double energy, double gain) {
  if (energy <= 0.0) return 0.0;
  return std::pow(gain * energy / p.energy_coeff, 1.0 / p.order);
}

namespace {

// (g^(1/(m-1)) + q^(m/(m-1)))^((m-1)/m): the per-unit-energy value of a slot
// with gain g followed by a future worth q.
double slot_aggregate(double gain, double q_next, double m) {
  const double inner =
      std::pow(gain, 1.0 / (m - 1.0)) + std::pow(q_next, m / (m - 1.0));
  return std::pow(inner, (m - 1.0) / m);
}

std::size_t checked_table_size(const SystemParams& params) {
  params.validate();
  return static_cast<std::size_t>(params.horizon) + 1;
}

}  // namespace

QTable::QTable(const SystemParams& params, const DiscreteChannel& channel)
    : q_(checked_table_size(params), 0.0),
      order_(params.order),
      energy_coeff_(params.energy_coeff) {
  const double m = params.order;
  for (int t = params.horizon - 1; t >= 0; --t) {
    const double next = q_[static_cast<std::size_t>(t) + 1];
    double acc = 0.0;
    for (std::size_t n = 0; n < channel.size(); ++n)
      acc += channel.prob(n) * slot_aggregate(channel.level(n), next, m);
    q_[static_cast<std::size_t>(t)] = acc;
  }
}

QTable QTable::from_values(std::vector<double> q, double order,
                           double energy_coeff) {
  if (q.empty()) throw ConfigError("Q table needs at least one entry");
  QTable table;
  table.q_ = std::move(q);
  table.q_.push_back(0.0);
  table.order_ = order;
  table.energy_coeff_ = energy_coeff;
  return table;
}

double alpha_star(int t, double gain, const QTable& q) {
  if (!(gain > 0.0)) throw ConfigError("alpha_star needs a positive gain");
  if (t >= q.horizon()) return 1.0;
  const double m = q.order();
  const double own = std::pow(gain, 1.0 / (m - 1.0));
  return own / (own + std::pow(q(t), m / (m - 1.0)));
}

double value(int t, double energy, double gain, const QTable& q) {
  if (energy <= 0.0) return 0.0;
  const double m = q.order();
  return std::pow(energy / q.energy_coeff(), 1.0 / m) *
         slot_aggregate(gain, q(t), m);
}

double expected_stop_value(int t, double energy, const QTable& q) {
  if (energy <= 0.0) return 0.0;
  return std::pow(energy / q.energy_coeff(), 1.0 / q.order()) * q(t - 1);
}

double threshold_lhs(double gamma, const SystemParams& params,
                     const DiscreteChannel& channel) {
  const double inv_m = 1.0 / params.order;
  double acc = 0.0;
  for (std::size_t n = 0; n < channel.size(); ++n) {
    const double e = harvest_amount(params, channel.level(n));
    acc += channel.prob(n) * std::pow(1.0 + e / gamma, inv_m);
  }
  return acc;
}

ThresholdSolve solve_gamma(int t, const QTable& q,
                           const DiscreteChannel& channel,
                           const SystemParams& params) {
  if (t < 1 || t >= params.horizon)
    throw ConfigError("threshold slot must satisfy 1 <= t <= T-1");
  const double ratio = q(t - 1) / q(t);
  if (!(ratio > 1.0))
    throw InvariantViolation("q(" + std::to_string(t - 1) + ")/q(" +
                             std::to_string(t) +
                             ") <= 1; the Q table is not decreasing");

  const double e_max = harvest_amount(params, channel.levels().back());
  auto excess = [&](double gamma) {
    return threshold_lhs(gamma, params, channel) - ratio;
  };

  // The left side falls strictly from +inf (gamma -> 0) to 1 (gamma -> inf).
  double lo = 1e-12 * e_max;
  for (int i = 0; i < 64 && excess(lo) <= 0.0; ++i) lo *= 1e-3;
  double hi = e_max;
  for (int i = 0; i < 2048 && excess(hi) > 0.0; ++i) hi *= 2.0;
  if (!(excess(lo) > 0.0) || excess(hi) > 0.0 || !std::isfinite(hi))
    throw InvariantViolation("could not bracket the threshold at slot " +
                             std::to_string(t));

  int it = 0;
  for (; it < 200 && (hi - lo) >= 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (excess(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  const double gamma = 0.5 * (lo + hi);
  return {gamma, excess(gamma), it};
}

PolicyTables::PolicyTables(const SystemParams& params,
                           const DiscreteChannel& channel)
    : params_(params), q_(params, channel) {
  gamma_.reserve(static_cast<std::size_t>(params.horizon));
  for (int t = 1; t < params.horizon; ++t)
    gamma_.push_back(solve_gamma(t, q_, channel, params).gamma);
  gamma_.push_back(0.0);
}

nlohmann::json PolicyTables::to_json() const {
  const auto qs = q_.values();
  return {{"Q", std::vector<double>(qs.begin(), qs.end())},
          {"gamma", std::vector<double>(gamma_.begin(), gamma_.end() - 1)}};
}

bool should_stop(int t, double energy, const PolicyTables& tables) {
  if (t >= tables.horizon()) return true;
  return energy >= tables.gamma(t);
}

}  // namespace wpt
