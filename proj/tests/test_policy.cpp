#include <doctest.h>

#include <cmath>
#include <random>

#include "test_support.hpp"
#include "wpt/errors.hpp"
#include "wpt/policy.hpp"

using namespace wpt;
using wpt::testing::random_channel;
using wpt::testing::random_params;
using wpt::testing::unit_channel;
using wpt::testing::unit_params;

namespace {

// Numerical maximum of the two-slot action value at slot T-1, by golden
// section search on the concave map alpha -> bits now + expected bits at T.
double two_slot_value(const SystemParams& p, const DiscreteChannel& ch,
                      double energy, double gain) {
  auto f = [&](double a) {
    double v = std::pow(a * gain * energy / p.energy_coeff, 1.0 / p.order);
    for (std::size_t n = 0; n < ch.size(); ++n)
      v += ch.prob(n) * std::pow((1.0 - a) * ch.level(n) * energy /
                                     p.energy_coeff,
                                 1.0 / p.order);
    return v;
  };
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double a = hi - phi * (hi - lo), b = lo + phi * (hi - lo);
    if (f(a) < f(b)) lo = a; else hi = b;
  }
  return f(0.5 * (lo + hi));
}

}  // namespace

TEST_CASE("params validation") {
  CHECK_NOTHROW(unit_params().validate());
  SystemParams p = unit_params();
  p.horizon = 1;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = unit_params();
  p.order = 1.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p.order = 1.0 + 1e-7;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = unit_params();
  p.efficiency = 1.2;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = unit_params();
  p.ap_power = 0.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = unit_params();
  p.energy_coeff = -1.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
  CHECK_THROWS_AS(QTable(SystemParams{1, 1, 1, 1, 2}, unit_channel()),
                  ConfigError);
}

TEST_CASE("deterministic channel: q(t) = sqrt(T - t)") {
  const QTable q(unit_params(10), unit_channel());
  CHECK(q(9) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(q(8) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
  CHECK(q(5) == doctest::Approx(std::sqrt(5.0)).epsilon(1e-14));
  for (int t = 0; t <= 10; ++t) CHECK(std::abs(q(t) - std::sqrt(10.0 - t)) < 1e-10);
  CHECK(q.values().size() == 10);
}

TEST_CASE("q(T-1) for a two-level channel") {
  const DiscreteChannel ch({0.5, 1.5}, {0.5, 0.5});
  const QTable q(SystemParams{6, 1, 1, 1, 2}, ch);
  CHECK(q(5) == doctest::Approx(0.5 * std::sqrt(0.5) + 0.5 * std::sqrt(1.5)));
  CHECK(q(5) == doctest::Approx(0.96593).epsilon(1e-5));
}

TEST_CASE("q(T-1) and the slot T-1 value against numeric maximization, m = 3") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const auto ch = random_channel(rng, 1 + trial % 5);
    const auto p = random_params(rng, 5, 3.0);
    const QTable q(p, ch);
    double direct = 0.0;
    for (std::size_t n = 0; n < ch.size(); ++n)
      direct += ch.prob(n) * std::cbrt(ch.level(n));
    CHECK(q(4) == doctest::Approx(direct).epsilon(1e-13));
    const double e = 2.5, g = ch.level(0);
    CHECK(value(4, e, g, q) ==
          doctest::Approx(two_slot_value(p, ch, e, g)).epsilon(1e-9));
  }
}

TEST_CASE("alpha_star") {
  const QTable q(unit_params(10), unit_channel());
  CHECK(alpha_star(10, 0.3, q) == 1.0);
  CHECK(alpha_star(5, 1.0, q) == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
  for (int t = 1; t <= 10; ++t)
    CHECK(std::abs(alpha_star(t, 1.0, q) - 1.0 / (10 - t + 1)) < 1e-10);
  const auto unit_q = QTable::from_values({1.0, 1.0}, 2.0, 1.0);
  CHECK(alpha_star(1, 4.0, unit_q) == doctest::Approx(0.8));
  CHECK_THROWS_AS(alpha_star(3, 0.0, q), ConfigError);
  CHECK_THROWS_AS(alpha_star(3, -1.0, q), ConfigError);
}

TEST_CASE("alpha_star lies in (0, 1) before the deadline") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto ch = random_channel(rng, 4);
    const auto p = random_params(rng, 12, 1.5 + trial % 4);
    const QTable q(p, ch);
    for (int t = 1; t < p.horizon; ++t)
      for (double g : ch.levels()) {
        const double a = alpha_star(t, g, q);
        CHECK(a > 0.0);
        CHECK(a < 1.0);
      }
    CHECK(alpha_star(p.horizon, ch.level(0), q) == 1.0);
  }
}

TEST_CASE("value function") {
  const SystemParams p{10, 1.0, 1.0, 0.25, 3.0};
  const auto ch = unit_channel();
  const QTable q(p, ch);
  CHECK(value(3, 0.0, 1.0, q) == 0.0);
  CHECK(value(10, p.energy_coeff, 1.0, q) == doctest::Approx(1.0));

  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.01, 10.0);
  for (int i = 0; i < 200; ++i) {
    const int t = 1 + i % 10;
    const double e = u(rng), g = u(rng), c = u(rng);
    CHECK(value(t, c * e, g, q) ==
          doctest::Approx(std::pow(c, 1.0 / 3.0) * value(t, e, g, q))
              .epsilon(1e-12));
  }
}

TEST_CASE("expected stop value") {
  const QTable q(unit_params(10), unit_channel());
  CHECK(expected_stop_value(4, 0.0, q) == 0.0);
  CHECK(expected_stop_value(6, 5.0, q) == doctest::Approx(5.0).epsilon(1e-12));

  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 50.0);
  for (int trial = 0; trial < 20; ++trial) {
    const auto ch = random_channel(rng, 1 + trial % 6);
    const auto p = random_params(rng, 15, 1.5 + 0.5 * (trial % 5));
    const QTable qq(p, ch);
    for (int t = 1; t <= p.horizon; ++t) {
      const double e = u(rng);
      double avg = 0.0;
      for (std::size_t n = 0; n < ch.size(); ++n)
        avg += ch.prob(n) * value(t, e, ch.level(n), qq);
      CHECK(expected_stop_value(t, e, qq) == doctest::Approx(avg).epsilon(1e-12));
    }
  }
}

TEST_CASE("concavity witness: grid maximum of the action value") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.1, 20.0);
  const int points = 10000;
  for (int trial = 0; trial < 10; ++trial) {
    const auto ch = random_channel(rng, 3);
    const auto p = random_params(rng, 8, trial % 2 ? 3.0 : 2.0);
    const QTable q(p, ch);
    const int t = 1 + trial % (p.horizon - 1);
    const double e = u(rng), g = ch.level(trial % 3);
    double best = -1.0, best_alpha = 0.0;
    for (int j = 0; j < points; ++j) {
      const double a = static_cast<double>(j) / (points - 1);
      double v = bits_for_energy(p, a * e, g);
      for (std::size_t n = 0; n < ch.size(); ++n)
        v += ch.prob(n) * value(t + 1, (1.0 - a) * e, ch.level(n), q);
      if (v > best) {
        best = v;
        best_alpha = a;
      }
    }
    CHECK(std::abs(best_alpha - alpha_star(t, g, q)) <= 1.0 / (points - 1));
    CHECK(value(t, e, g, q) == doctest::Approx(best).epsilon(1e-3));
  }
}

TEST_CASE("Q is strictly decreasing in t") {
  std::mt19937_64 rng(1);
  for (double m : {1.5, 2.0, 3.0, 5.0}) {
    for (int trial = 0; trial < 5; ++trial) {
      const auto ch = random_channel(rng, 1 + trial * 3);
      const auto p = random_params(rng, 1000, m);
      const QTable q(p, ch);
      int violations = 0;
      for (int t = 0; t < p.horizon; ++t) violations += !(q(t) > q(t + 1));
      CHECK(violations == 0);
    }
  }
}

TEST_CASE("threshold: deterministic channel gives gamma(t) = e (T - t)") {
  for (double e : {1.0, 0.3, 7.5}) {
    const SystemParams p{10, e, 1.0, 1.0, 2.0};
    const auto ch = unit_channel();
    const QTable q(p, ch);
    for (int t = 1; t < 10; ++t) {
      const auto sol = solve_gamma(t, q, ch, p);
      CHECK(std::abs(sol.gamma - e * (10 - t)) < 1e-10 * std::max(1.0, e * 10));
      CHECK(sol.iterations <= 200);
    }
  }
  const QTable q(unit_params(), unit_channel());
  CHECK(solve_gamma(9, q, unit_channel(), unit_params()).gamma ==
        doctest::Approx(1.0).epsilon(1e-11));
}

TEST_CASE("threshold residual on random instances") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 40; ++trial) {
    const auto ch = random_channel(rng, 1 + trial % 8);
    const auto p = random_params(rng, 2 + trial * 3, 1.2 + 0.4 * (trial % 10));
    const PolicyTables tables(p, ch);
    for (int t = 1; t < p.horizon; ++t) {
      const double gamma = tables.gamma(t);
      CHECK(gamma > 0.0);
      const double ratio = tables.q()(t - 1) / tables.q()(t);
      CHECK(std::abs(threshold_lhs(gamma, p, ch) - ratio) < 1e-9);
    }
    CHECK(tables.gamma(p.horizon) == 0.0);
  }
}

TEST_CASE("threshold solver rejects a corrupted Q table") {
  const auto ch = unit_channel();
  const auto p = unit_params(4);
  const auto flat = QTable::from_values({1.0, 1.0, 1.0, 1.0}, 2.0, 1.0);
  CHECK_THROWS_AS(solve_gamma(2, flat, ch, p), InvariantViolation);
  const auto rising = QTable::from_values({1.0, 2.0, 1.5, 1.0}, 2.0, 1.0);
  CHECK_THROWS_AS(solve_gamma(1, rising, ch, p), InvariantViolation);
  const QTable q(p, ch);
  CHECK_THROWS_AS(solve_gamma(0, q, ch, p), ConfigError);
  CHECK_THROWS_AS(solve_gamma(4, q, ch, p), ConfigError);
}

TEST_CASE("should_stop") {
  const PolicyTables tables(unit_params(10), unit_channel());
  CHECK(should_stop(10, 0.0, tables));
  CHECK(should_stop(6, 5.0, tables));
  CHECK_FALSE(should_stop(5, 4.0, tables));
  CHECK_FALSE(should_stop(1, 0.0, tables));
}

TEST_CASE("tables JSON has T entries of Q and T-1 thresholds") {
  const PolicyTables small(unit_params(2), unit_channel());
  const auto j = small.to_json();
  CHECK(j["Q"].size() == 2);
  CHECK(j["gamma"].size() == 1);
  const PolicyTables tables(unit_params(10), unit_channel());
  const auto gammas = tables.to_json()["gamma"].get<std::vector<double>>();
  REQUIRE(gammas.size() == 9);
  for (int i = 0; i < 9; ++i) CHECK(std::abs(gammas[i] - (9 - i)) < 1e-10);
}
