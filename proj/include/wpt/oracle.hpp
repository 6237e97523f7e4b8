#pragma once

// Brute-force dynamic-programming reference for the closed-form controller.
//
// Both recursions run on a uniform energy grid E_k = k * e_max / (K_E - 1).
// Between grid nodes values are interpolated linearly in the coordinate
// E^(1/m); above e_max they are extrapolated with the E^(1/m) scaling law.
// Nothing here uses the closed-form power split or the threshold equation:
// the transmission DP searches an explicit alpha grid and the stopping DP
// compares the two branches of the recursion pointwise.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "wpt/channel.hpp"
#include "wpt/policy.hpp"

namespace wpt::oracle {

struct GridSpec {
  double e_max = 1.0;
  std::size_t energy_points = 512;  // K_E
  std::size_t alpha_points = 512;   // K_alpha

  void validate() const;
  double energy_step() const {
    return e_max / static_cast<double>(energy_points - 1);
  }
  double alpha_step() const {
    return 1.0 / static_cast<double>(alpha_points - 1);
  }
};

/// e_max = (T-1) * eta * g_N * P: the most a frame can harvest from empty.
GridSpec default_grid(const SystemParams& params,
                      const DiscreteChannel& channel,
                      std::size_t energy_points = 512,
                      std::size_t alpha_points = 512);

/// Uniform energy grid plus the interpolation rule shared by both DPs.
class EnergyGrid {
 public:
  EnergyGrid(const GridSpec& spec, double order);

  std::size_t size() const { return energy_.size(); }
  double energy(std::size_t k) const { return energy_[k]; }
  double root(std::size_t k) const { return root_[k]; }
  double step() const { return step_; }
  double e_max() const { return energy_.back(); }
  double order() const { return order_; }

  /// Interpolates grid values `f` at energy x >= 0, given x^(1/m).
  double interpolate(std::span<const double> f, double x, double x_root) const;
  double interpolate(std::span<const double> f, double x) const;

 private:
  std::vector<double> energy_;
  std::vector<double> root_;
  double step_;
  double order_;
};

/// Transmission-phase DP over (t, E_k, channel level n), t = 1..T.
class TransmissionTable {
 public:
  TransmissionTable(int horizon, std::size_t energy_points,
                    std::size_t levels, EnergyGrid grid);

  int horizon() const { return horizon_; }
  const EnergyGrid& grid() const { return grid_; }
  std::size_t levels() const { return levels_; }

  double value(int t, std::size_t k, std::size_t n) const {
    return values_[index(t, k, n)];
  }
  /// Maximizing alpha from the grid; 1 at t = T.
  double alpha(int t, std::size_t k, std::size_t n) const {
    return alphas_[index(t, k, n)];
  }

 private:
  friend TransmissionTable dp_it_value(const SystemParams&,
                                       const DiscreteChannel&,
                                       const GridSpec&);
  std::size_t index(int t, std::size_t k, std::size_t n) const {
    return (static_cast<std::size_t>(t - 1) * grid_.size() + k) * levels_ + n;
  }

  int horizon_;
  std::size_t levels_;
  EnergyGrid grid_;
  std::vector<double> values_;
  std::vector<double> alphas_;
};

/// Backward induction for the transmission phase: at every state maximize
/// (alpha g E / lambda)^(1/m) + Σ q_n V(t+1, (1-alpha) E, g_n) over the alpha
/// grid, with alpha = 1 forced at t = T.
TransmissionTable dp_it_value(const SystemParams& params,
                              const DiscreteChannel& channel,
                              const GridSpec& grid);

/// J_t(E) over the energy grid and the region where stopping wins.
class StoppingTable {
 public:
  StoppingTable(int horizon, EnergyGrid grid);
  /// Rows t = 1..T of J and of the stop flags, each of grid.size() entries.
  StoppingTable(int horizon, EnergyGrid grid, std::vector<double> values,
                std::vector<unsigned char> stop);

  int horizon() const { return horizon_; }
  const EnergyGrid& grid() const { return grid_; }

  double value(int t, std::size_t k) const { return j_[index(t, k)]; }
  bool stop(int t, std::size_t k) const { return stop_[index(t, k)] != 0; }
  /// J_t interpolated at arbitrary E >= 0.
  double value_at(int t, double energy) const;

 private:
  friend StoppingTable dp_stopping(const SystemParams&, const DiscreteChannel&,
                                   const QTable&, const GridSpec&);
  std::size_t index(int t, std::size_t k) const {
    return static_cast<std::size_t>(t - 1) * grid_.size() + k;
  }
  std::span<const double> row(int t) const {
    return std::span<const double>(j_).subspan(index(t, 0), grid_.size());
  }

  int horizon_;
  EnergyGrid grid_;
  std::vector<double> j_;
  std::vector<unsigned char> stop_;
};

/// J_t(E) = max((E/lambda)^(1/m) q(t-1), Σ q_n J_{t+1}(E + e_n)), with
/// J_T(E) = (E/lambda)^(1/m) q(T-1).
StoppingTable dp_stopping(const SystemParams& params,
                          const DiscreteChannel& channel, const QTable& q,
                          const GridSpec& grid);

/// Smallest grid energy where stopping is optimal at slot t; 0 at t = T.
/// Empty when no grid point stops (the threshold lies beyond e_max).
/// Throws InvariantViolation if the stop region is not single-crossing.
std::optional<double> extract_threshold(const StoppingTable& table, int t);

}  // namespace wpt::oracle
