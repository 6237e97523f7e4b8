#include "wpt/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "wpt/errors.hpp"

namespace wpt {

DiscreteChannel::DiscreteChannel(std::vector<double> levels,
                                 std::vector<double> probs)
    : levels_(std::move(levels)), probs_(std::move(probs)) {
  if (levels_.empty()) throw ConfigError("channel needs at least one level");
  if (levels_.size() != probs_.size())
    throw ConfigError("channel levels and probs differ in length");
  for (std::size_t n = 0; n < levels_.size(); ++n) {
    if (!(levels_[n] > 0.0) || !std::isfinite(levels_[n]))
      throw ConfigError("channel gains must be positive and finite");
    if (n > 0 && !(levels_[n] > levels_[n - 1]))
      throw ConfigError("channel gains must be strictly increasing");
    if (!(probs_[n] >= 0.0) || !std::isfinite(probs_[n]))
      throw ConfigError("channel probabilities must be non-negative");
  }
  const double total = std::accumulate(probs_.begin(), probs_.end(), 0.0);
  if (!(total > 0.0)) throw ConfigError("channel probabilities sum to zero");
  for (double& q : probs_) q /= total;

  cdf_.resize(probs_.size());
  std::partial_sum(probs_.begin(), probs_.end(), cdf_.begin());
  cdf_.back() = 1.0;
}

double DiscreteChannel::mean_gain() const {
  return std::inner_product(levels_.begin(), levels_.end(), probs_.begin(),
                            0.0);
}

std::size_t DiscreteChannel::index_for(double u) const {
  auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.end()) --it;
  return static_cast<std::size_t>(it - cdf_.begin());
}

nlohmann::json DiscreteChannel::to_json() const {
  return {{"levels", levels_}, {"probs", probs_}};
}

DiscreteChannel DiscreteChannel::from_json(const nlohmann::json& j) {
  try {
    return DiscreteChannel(j.at("levels").get<std::vector<double>>(),
                           j.at("probs").get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad channel object: ") + e.what());
  }
}

double truncation_point(const FadingLaw& law) {
  return std::visit(
      [](const auto& l) -> double {
        using L = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<L, ExponentialLaw>) {
          if (!(l.mean > 0.0)) throw ConfigError("exponential mean must be > 0");
          return -l.mean * std::log1p(-kTruncationQuantile);
        } else {
          if (!(l.value > 0.0))
            throw ConfigError("deterministic gain must be > 0");
          return l.value;
        }
      },
      law);
}

DiscreteChannel discretize(const FadingLaw& law, std::size_t levels) {
  if (levels == 0) throw ConfigError("discretization needs N >= 1");
  const double g_max = truncation_point(law);
  const double width = g_max / static_cast<double>(levels);

  std::vector<double> gains(levels);
  std::vector<double> probs(levels, 0.0);
  for (std::size_t n = 0; n < levels; ++n)
    gains[n] = (static_cast<double>(n) + 0.5) * width;

  if (const auto* expo = std::get_if<ExponentialLaw>(&law)) {
    // P(a < G <= b) = e^{-a/mean} - e^{-b/mean}
    auto survival = [&](double x) { return std::exp(-x / expo->mean); };
    for (std::size_t n = 0; n < levels; ++n) {
      const double lo = static_cast<double>(n) * width;
      const double hi = n + 1 == levels ? g_max : lo + width;
      probs[n] = survival(lo) - survival(hi);
    }
    probs.back() += survival(g_max);
  } else {
    gains.back() = std::get<DeterministicLaw>(law).value;
    probs.back() = 1.0;
  }
  return DiscreteChannel(std::move(gains), std::move(probs));
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index) {
  return mix64(mix64(master_seed) ^ mix64(index + 0x632be59bd9b4e019ULL));
}

}  // namespace wpt
