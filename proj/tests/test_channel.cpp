#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "wpt/channel.hpp"
#include "wpt/errors.hpp"

using namespace wpt;

namespace {

// Composite Simpson rule; independent of the closed-form CDF used by
// discretize().
template <class F>
double simpson(F f, double a, double b, int intervals = 2000) {
  const double h = (b - a) / intervals;
  double acc = f(a) + f(b);
  for (int i = 1; i < intervals; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

double sum(std::span<const double> xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0);
}

}  // namespace

TEST_CASE("deterministic law with one level is a single-state channel") {
  const auto ch = discretize(DeterministicLaw{1.0}, 1);
  REQUIRE(ch.size() == 1);
  CHECK(ch.level(0) == 1.0);
  CHECK(ch.prob(0) == 1.0);
}

TEST_CASE("deterministic law with several levels keeps the atom on top") {
  const auto ch = discretize(DeterministicLaw{2.0}, 4);
  REQUIRE(ch.size() == 4);
  CHECK(ch.level(3) == 2.0);
  CHECK(ch.prob(3) == 1.0);
  CHECK(ch.prob(0) == 0.0);
  CHECK(ch.mean_gain() == doctest::Approx(2.0));
}

TEST_CASE("exponential law, two levels") {
  const auto ch = discretize(ExponentialLaw{1.0}, 2);
  const double g_max = -std::log(0.001);
  const double width = g_max / 2;
  CHECK(ch.level(0) == doctest::Approx(1.7269388197455342).epsilon(1e-12));
  CHECK(ch.level(1) == doctest::Approx(5.180816459236603).epsilon(1e-12));

  // Bin mass by quadrature of the density, tail mass 0.001 onto the top bin.
  const double q1 = simpson([](double x) { return std::exp(-x); }, 0.0, width);
  CHECK(ch.prob(0) == doctest::Approx(q1).epsilon(1e-9));
  CHECK(ch.prob(0) == doctest::Approx(0.9683772233983162).epsilon(1e-12));
  CHECK(ch.prob(1) == doctest::Approx(0.03162277660168378).epsilon(1e-10));
}

TEST_CASE("exponential law, twenty levels matches quadrature of the density") {
  const auto ch = discretize(ExponentialLaw{1.0}, 20);
  const double g_max = -std::log(0.001);
  const double width = g_max / 20;
  REQUIRE(ch.size() == 20);
  CHECK(std::abs(sum(ch.probs()) - 1.0) < 1e-12);
  for (std::size_t n = 0; n < 20; ++n) {
    const double lo = n * width;
    double mass = simpson([](double x) { return std::exp(-x); }, lo, lo + width);
    if (n == 19) mass += 0.001;
    CHECK(ch.prob(n) == doctest::Approx(mass).epsilon(1e-9));
    CHECK(ch.level(n) == doctest::Approx(lo + width / 2));
  }
}

TEST_CASE("discretized channels satisfy the channel invariants") {
  for (double mean : {0.3, 1.0, 4.0}) {
    for (std::size_t n : {1u, 2u, 7u, 50u, 300u}) {
      const auto ch = discretize(ExponentialLaw{mean}, n);
      REQUIRE(ch.size() == n);
      CHECK(std::abs(sum(ch.probs()) - 1.0) < 1e-12);
      for (std::size_t i = 0; i < n; ++i) {
        CHECK(ch.level(i) > 0.0);
        CHECK(ch.prob(i) >= 0.0);
        if (i > 0) CHECK(ch.level(i) > ch.level(i - 1));
      }
    }
  }
}

TEST_CASE("discretized mean approaches the continuous mean") {
  auto error = [](std::size_t n) {
    return std::abs(discretize(ExponentialLaw{1.0}, n).mean_gain() - 1.0);
  };
  CHECK(error(100) < error(5));
}

TEST_CASE("discretize rejects bad input") {
  CHECK_THROWS_AS(discretize(ExponentialLaw{1.0}, 0), ConfigError);
  CHECK_THROWS_AS(discretize(ExponentialLaw{0.0}, 4), ConfigError);
  CHECK_THROWS_AS(discretize(DeterministicLaw{-1.0}, 1), ConfigError);
}

TEST_CASE("explicit channels are validated and renormalized") {
  const DiscreteChannel ch({0.5, 1.5}, {1.0, 3.0});
  CHECK(ch.prob(0) == doctest::Approx(0.25));
  CHECK_THROWS_AS(DiscreteChannel({}, {}), ConfigError);
  CHECK_THROWS_AS(DiscreteChannel({1.0, 2.0}, {1.0}), ConfigError);
  CHECK_THROWS_AS(DiscreteChannel({2.0, 1.0}, {0.5, 0.5}), ConfigError);
  CHECK_THROWS_AS(DiscreteChannel({0.0, 1.0}, {0.5, 0.5}), ConfigError);
  CHECK_THROWS_AS(DiscreteChannel({1.0, 2.0}, {-0.1, 1.1}), ConfigError);
  CHECK_THROWS_AS(DiscreteChannel({1.0, 2.0}, {0.0, 0.0}), ConfigError);
}

TEST_CASE("JSON form round-trips") {
  const auto ch = discretize(ExponentialLaw{1.0}, 6);
  const auto back = DiscreteChannel::from_json(
      nlohmann::json::parse(ch.to_json().dump()));
  for (std::size_t n = 0; n < ch.size(); ++n) {
    CHECK(back.level(n) == ch.level(n));
    CHECK(back.prob(n) == doctest::Approx(ch.prob(n)).epsilon(1e-15));
  }
  CHECK_THROWS_AS(DiscreteChannel::from_json({{"levels", {1.0}}}), ConfigError);
}

TEST_CASE("sampling a single-level channel always returns that level") {
  const auto ch = discretize(DeterministicLaw{1.0}, 1);
  for (std::uint64_t seed : {0ull, 1ull, 99ull}) {
    Stream rng(seed);
    for (int i = 0; i < 1000; ++i) REQUIRE(ch.sample(rng) == 0);
  }
}

TEST_CASE("sampling frequencies of a fair two-level channel") {
  const DiscreteChannel ch({1.0, 2.0}, {0.5, 0.5});
  Stream rng(42);
  const int draws = 1'000'000;
  int first = 0;
  for (int i = 0; i < draws; ++i) first += ch.sample(rng) == 0;
  const double freq = static_cast<double>(first) / draws;
  CHECK(freq >= 0.498);
  CHECK(freq <= 0.502);
}

TEST_CASE("sample mean of the Rayleigh channel is within 3 standard errors") {
  const auto ch = discretize(ExponentialLaw{1.0}, 20);
  const double mu = ch.mean_gain();
  double var = 0.0;
  for (std::size_t n = 0; n < ch.size(); ++n)
    var += ch.prob(n) * (ch.level(n) - mu) * (ch.level(n) - mu);
  Stream rng(7);
  const int draws = 1'000'000;
  double acc = 0.0;
  for (int i = 0; i < draws; ++i) acc += ch.level(ch.sample(rng));
  CHECK(std::abs(acc / draws - mu) < 3.0 * std::sqrt(var / draws));
}

TEST_CASE("zero-mass levels are never drawn") {
  const DiscreteChannel ch({1.0, 2.0, 3.0}, {0.5, 0.0, 0.5});
  Stream rng(5);
  for (int i = 0; i < 100000; ++i) REQUIRE(ch.sample(rng) != 1);
  CHECK(ch.index_for(0.0) == 0);
  CHECK(ch.index_for(0.5) == 2);
  CHECK(ch.index_for(std::nextafter(1.0, 0.0)) == 2);
}

TEST_CASE("streams with equal seeds draw identical sequences") {
  const auto ch = discretize(ExponentialLaw{1.0}, 20);
  Stream a = make_stream(1234, 17);
  Stream b = make_stream(1234, 17);
  Stream c = make_stream(1234, 18);
  int differ = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto x = ch.sample(a);
    REQUIRE(x == ch.sample(b));
    differ += x != ch.sample(c);
  }
  CHECK(differ > 0);
  CHECK(derive_seed(1, 2) == derive_seed(1, 2));
  CHECK(derive_seed(1, 2) != derive_seed(2, 1));
}
