#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <json.hpp>

#include "wpt/channel.hpp"

namespace wpt {

/// Link and horizon parameters of one frame.
///
/// Transmitting l bits at gain g costs lambda * l^m / g joules; the AP beams
/// P watts during harvesting, of which a fraction eta is banked.
struct SystemParams {
  int horizon = 10;       // T, slots per frame
  double ap_power = 1.0;  // P
  double efficiency = 1.0;  // eta, in (0, 1]
  double energy_coeff = 1.0;  // lambda
  double order = 2.0;     // m, monomial order > 1

  /// Throws ConfigError if any field is outside its domain.
  void validate() const;
};

/// Orders closer to 1 than this are rejected (the exponent 1/(m-1) explodes).
inline constexpr double kMinOrderGap = 1e-6;

/// Energy banked in one harvesting slot at gain g: eta * g * P.
inline double harvest_amount(const SystemParams& p, double gain) {
  return p.efficiency * gain * p.ap_power;
}

/// Bits delivered by spending `energy` joules at gain `gain`.
double bits_for_energy(const SystemParams& p, double energy, double gain);

/// Backward-recursive channel aggregate. q(t) for t = 0..T, with q(T) = 0 so
/// that the value function at the last slot reduces to (gE/lambda)^(1/m).
class QTable {
 public:
  QTable(const SystemParams& params, const DiscreteChannel& channel);

  /// Wraps precomputed values q(0..T-1); q(T) = 0 is appended.
  static QTable from_values(std::vector<double> q, double order,
                            double energy_coeff);

  int horizon() const { return static_cast<int>(q_.size()) - 1; }
  double order() const { return order_; }
  double energy_coeff() const { return energy_coeff_; }

  double operator()(int t) const { return q_.at(static_cast<std::size_t>(t)); }
  /// q(0..T-1), the entries the closed forms use.
  std::span<const double> values() const {
    return std::span<const double>(q_).first(q_.size() - 1);
  }

 private:
  QTable() = default;

  std::vector<double> q_;
  double order_ = 2.0;
  double energy_coeff_ = 1.0;
};

/// Optimal fraction of the battery spent at slot t after observing gain g.
/// Exactly 1 at t = T. Throws ConfigError for g <= 0.
double alpha_star(int t, double gain, const QTable& q);

/// Optimal expected bits from slot t to T with battery E, slot-t gain g known.
double value(int t, double energy, double gain, const QTable& q);

/// Expected bits when harvesting stops at slot t, before g(t) is seen:
/// (E/lambda)^(1/m) q(t-1).
double expected_stop_value(int t, double energy, const QTable& q);

/// Result of the threshold root solve, with its diagnostic residual.
struct ThresholdSolve {
  double gamma;
  double residual;
  int iterations;
};

/// Left side of the threshold equation, Σ q_n (1 + e_n/gamma)^(1/m).
double threshold_lhs(double gamma, const SystemParams& params,
                     const DiscreteChannel& channel);

/// Unique gamma > 0 with Σ q_n (1 + e_n/gamma)^(1/m) = q(t-1)/q(t), found by
/// bracketed bisection. Valid for 1 <= t <= T-1. Throws InvariantViolation if
/// the ratio is not above 1.
ThresholdSolve solve_gamma(int t, const QTable& q,
                           const DiscreteChannel& channel,
                           const SystemParams& params);

/// Everything the online controller needs for one (params, channel) pair.
class PolicyTables {
 public:
  PolicyTables(const SystemParams& params, const DiscreteChannel& channel);

  const SystemParams& params() const { return params_; }
  const QTable& q() const { return q_; }
  int horizon() const { return params_.horizon; }

  /// gamma(t) for t = 1..T; gamma(T) = 0.
  double gamma(int t) const {
    return gamma_.at(static_cast<std::size_t>(t - 1));
  }
  std::span<const double> gammas() const { return gamma_; }

  /// {"Q": [q(0)..q(T-1)], "gamma": [gamma(1)..gamma(T-1)]}
  nlohmann::json to_json() const;

 private:
  SystemParams params_;
  QTable q_;
  std::vector<double> gamma_;
};

/// Stop harvesting at slot t iff E >= gamma(t). Always true at t = T.
bool should_stop(int t, double energy, const PolicyTables& tables);

}  // namespace wpt
