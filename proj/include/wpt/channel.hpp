#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <variant>
#include <vector>

#include <json.hpp>

namespace wpt {

/// Rayleigh-faded power gain: exponentially distributed with the given mean.
struct ExponentialLaw {
  double mean = 1.0;
};

/// Point mass at `value`. Used for deterministic test channels.
struct DeterministicLaw {
  double value = 1.0;
};

using FadingLaw = std::variant<ExponentialLaw, DeterministicLaw>;

/// Quantile at which continuous laws are truncated before binning.
inline constexpr double kTruncationQuantile = 0.999;

/// An iid multi-level channel: gain levels g_n (strictly increasing, positive)
/// with probabilities q_n. Immutable once built.
class DiscreteChannel {
 public:
  /// Validates and renormalizes `probs`. Throws ConfigError on bad input.
  DiscreteChannel(std::vector<double> levels, std::vector<double> probs);

  std::size_t size() const { return levels_.size(); }
  std::span<const double> levels() const { return levels_; }
  std::span<const double> probs() const { return probs_; }
  double level(std::size_t n) const { return levels_[n]; }
  double prob(std::size_t n) const { return probs_[n]; }

  /// Σ q_n g_n.
  double mean_gain() const;

  /// Draws a 0-based level index with probability q_n.
  template <class Rng>
  std::size_t sample(Rng& rng) const {
    return index_for(uniform01(rng));
  }

  /// Inverse-CDF lookup for u in [0, 1). Zero-mass levels are never returned.
  std::size_t index_for(double u) const;

  nlohmann::json to_json() const;
  static DiscreteChannel from_json(const nlohmann::json& j);

  /// 53-bit uniform in [0, 1), independent of the standard library's
  /// distribution implementations so draws are portable.
  template <class Rng>
  static double uniform01(Rng& rng) {
    static_assert(Rng::max() == std::numeric_limits<std::uint64_t>::max() &&
                  Rng::min() == 0);
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
  }

 private:
  std::vector<double> levels_;
  std::vector<double> probs_;
  std::vector<double> cdf_;
};

/// Equal-width bins over [0, G_max], G_max the law's 0.999 quantile, with
/// midpoint gains and the tail mass folded into the top bin. A deterministic
/// law puts all of its mass on the top level, whose gain is the atom itself.
DiscreteChannel discretize(const FadingLaw& law, std::size_t levels);

/// Upper end of the binned gain axis for `law`.
double truncation_point(const FadingLaw& law);

using Stream = std::mt19937_64;

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Seed of the independent stream `index` derived from `master_seed`.
/// A pure function of its arguments, so stream assignment never depends on
/// how work is partitioned.
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index);

inline Stream make_stream(std::uint64_t master_seed, std::uint64_t index) {
  return Stream(derive_seed(master_seed, index));
}

}  // namespace wpt
