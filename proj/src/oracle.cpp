#include "wpt/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "wpt/errors.hpp"

namespace wpt::oracle {

void GridSpec::validate() const {
  if (!(e_max > 0.0) || !std::isfinite(e_max))
    throw ConfigError("oracle grid e_max must be > 0");
  if (energy_points < 2) throw ConfigError("oracle grid needs K_E >= 2");
  if (alpha_points < 2) throw ConfigError("oracle grid needs K_alpha >= 2");
}

GridSpec default_grid(const SystemParams& params,
                      const DiscreteChannel& channel,
                      std::size_t energy_points, std::size_t alpha_points) {
  params.validate();
  const double e_max = (params.horizon - 1) *
                       harvest_amount(params, channel.levels().back());
  return {e_max, energy_points, alpha_points};
}

EnergyGrid::EnergyGrid(const GridSpec& spec, double order)
    : step_(spec.energy_step()), order_(order) {
  spec.validate();
  energy_.resize(spec.energy_points);
  root_.resize(spec.energy_points);
  for (std::size_t k = 0; k < energy_.size(); ++k) {
    energy_[k] = static_cast<double>(k) * step_;
    root_[k] = std::pow(energy_[k], 1.0 / order_);
  }
  energy_.back() = spec.e_max;
  root_.back() = std::pow(spec.e_max, 1.0 / order_);
}

double EnergyGrid::interpolate(std::span<const double> f, double x,
                               double x_root) const {
  if (x <= 0.0) return f.front();
  if (x >= e_max()) return f.back() * (x_root / root_.back());
  const std::size_t j =
      std::min(static_cast<std::size_t>(x / step_), energy_.size() - 2);
  const double w = (x_root - root_[j]) / (root_[j + 1] - root_[j]);
  return f[j] + w * (f[j + 1] - f[j]);
}

double EnergyGrid::interpolate(std::span<const double> f, double x) const {
  return interpolate(f, x, x > 0.0 ? std::pow(x, 1.0 / order_) : 0.0);
}

TransmissionTable::TransmissionTable(int horizon, std::size_t energy_points,
                                     std::size_t levels, EnergyGrid grid)
    : horizon_(horizon),
      levels_(levels),
      grid_(std::move(grid)),
      values_(static_cast<std::size_t>(horizon) * energy_points * levels),
      alphas_(values_.size(), 1.0) {}

TransmissionTable dp_it_value(const SystemParams& params,
                              const DiscreteChannel& channel,
                              const GridSpec& spec) {
  params.validate();
  const double m = params.order;
  const int horizon = params.horizon;
  const std::size_t levels = channel.size();
  TransmissionTable table(horizon, spec.energy_points, levels,
                          EnergyGrid(spec, m));
  const EnergyGrid& grid = table.grid_;
  const std::size_t kE = grid.size();

  std::vector<double> alpha(spec.alpha_points), alpha_root(spec.alpha_points),
      rest_root(spec.alpha_points);
  for (std::size_t j = 0; j < spec.alpha_points; ++j) {
    alpha[j] = static_cast<double>(j) * spec.alpha_step();
    alpha_root[j] = std::pow(alpha[j], 1.0 / m);
    rest_root[j] = std::pow(1.0 - alpha[j], 1.0 / m);
  }
  alpha.back() = 1.0;
  alpha_root.back() = 1.0;
  rest_root.back() = 0.0;

  // (g_n / lambda)^(1/m), so that slot bits are alpha_root * E_root * this.
  std::vector<double> gain_root(levels);
  for (std::size_t n = 0; n < levels; ++n)
    gain_root[n] = std::pow(channel.level(n) / params.energy_coeff, 1.0 / m);

  for (std::size_t k = 0; k < kE; ++k)
    for (std::size_t n = 0; n < levels; ++n)
      table.values_[table.index(horizon, k, n)] =
          bits_for_energy(params, grid.energy(k), channel.level(n));

  std::vector<double> future(kE);
  for (int t = horizon - 1; t >= 1; --t) {
    for (std::size_t k = 0; k < kE; ++k) {
      double acc = 0.0;
      for (std::size_t n = 0; n < levels; ++n)
        acc += channel.prob(n) * table.value(t + 1, k, n);
      future[k] = acc;
    }
    for (std::size_t k = 0; k < kE; ++k) {
      const double e = grid.energy(k);
      const double e_root = grid.root(k);
      for (std::size_t n = 0; n < levels; ++n) {
        const double slot_scale = gain_root[n] * e_root;
        double best = -std::numeric_limits<double>::infinity();
        double best_alpha = 0.0;
        for (std::size_t j = 0; j < alpha.size(); ++j) {
          const double candidate =
              alpha_root[j] * slot_scale +
              grid.interpolate(future, (1.0 - alpha[j]) * e,
                               rest_root[j] * e_root);
          if (candidate > best) {
            best = candidate;
            best_alpha = alpha[j];
          }
        }
        table.values_[table.index(t, k, n)] = best;
        table.alphas_[table.index(t, k, n)] = best_alpha;
      }
    }
  }
  return table;
}

StoppingTable::StoppingTable(int horizon, EnergyGrid grid)
    : horizon_(horizon),
      grid_(std::move(grid)),
      j_(static_cast<std::size_t>(horizon) * grid_.size()),
      stop_(j_.size(), 0) {}

StoppingTable::StoppingTable(int horizon, EnergyGrid grid,
                             std::vector<double> values,
                             std::vector<unsigned char> stop)
    : horizon_(horizon),
      grid_(std::move(grid)),
      j_(std::move(values)),
      stop_(std::move(stop)) {
  const std::size_t expected =
      static_cast<std::size_t>(horizon) * grid_.size();
  if (horizon < 1 || j_.size() != expected || stop_.size() != expected)
    throw ConfigError("stopping table rows do not match the grid");
}

double StoppingTable::value_at(int t, double energy) const {
  return grid_.interpolate(row(t), energy);
}

StoppingTable dp_stopping(const SystemParams& params,
                          const DiscreteChannel& channel, const QTable& q,
                          const GridSpec& spec) {
  params.validate();
  const int horizon = params.horizon;
  if (q.horizon() != horizon)
    throw ConfigError("Q table horizon does not match the parameters");
  const double inv_m = 1.0 / params.order;
  StoppingTable table(horizon, EnergyGrid(spec, params.order));
  const EnergyGrid& grid = table.grid_;

  auto stop_value = [&](int t, std::size_t k) {
    return grid.root(k) * std::pow(params.energy_coeff, -inv_m) * q(t - 1);
  };

  for (std::size_t k = 0; k < grid.size(); ++k) {
    table.j_[table.index(horizon, k)] = stop_value(horizon, k);
    table.stop_[table.index(horizon, k)] = 1;
  }

  for (int t = horizon - 1; t >= 1; --t) {
    const auto next = table.row(t + 1);
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double stop = stop_value(t, k);
      double cont = 0.0;
      for (std::size_t n = 0; n < channel.size(); ++n) {
        const double e_next =
            grid.energy(k) + harvest_amount(params, channel.level(n));
        cont += channel.prob(n) *
                grid.interpolate(next, e_next, std::pow(e_next, inv_m));
      }
      table.j_[table.index(t, k)] = std::max(stop, cont);
      table.stop_[table.index(t, k)] = stop >= cont ? 1 : 0;
    }
  }
  return table;
}

std::optional<double> extract_threshold(const StoppingTable& table, int t) {
  if (t < 1 || t > table.horizon())
    throw ConfigError("threshold slot out of range");
  if (t == table.horizon()) return 0.0;
  const std::size_t kE = table.grid().size();
  std::size_t first = 0;
  while (first < kE && !table.stop(t, first)) ++first;
  if (first == kE) return std::nullopt;
  for (std::size_t k = first; k < kE; ++k)
    if (!table.stop(t, k))
      throw InvariantViolation("stop region at slot " + std::to_string(t) +
                               " is not single-crossing in energy");
  return table.grid().energy(first);
}

}  // namespace wpt::oracle
