#include <doctest.h>

#include <cmath>
#include <numbers>

#include "generators.hpp"
#include "skiswitch/errors.hpp"
#include "skiswitch/schedulers.hpp"

using namespace skiswitch;

namespace {

constexpr double kE = std::numbers::e;

// Integral of a piecewise-constant rent over [0, t], summed segment by segment.
double rent_integral(const std::vector<RentStep>& steps, double t) {
  double total = 0.0;
  for (std::size_t v = 0; v < steps.size(); ++v) {
    const double start = steps[v].t;
    const double end = v + 1 < steps.size() ? steps[v + 1].t : t;
    if (start >= t) break;
    total += steps[v].rent * (std::min(end, t) - start);
  }
  return total;
}

// Grows a decreasing rent path whose every step lands before the OFF time in force.
std::vector<RentStep> adaptive_path(Rng& rng, double buy, std::size_t n) {
  std::vector<RentStep> steps{{0.0, gen::uniform(rng, 0.5, 4.0)}};
  while (steps.size() < n) {
    const double off = adaptive_off_time(RentHistory(steps), buy);
    const double t = gen::uniform(rng, steps.back().t, off);
    if (!(t > steps.back().t) || !(t < off)) break;
    steps.push_back({t, steps.back().rent * gen::uniform(rng, 0.2, 0.95)});
  }
  return steps;
}

}  // namespace

TEST_SUITE("schedulers") {
  TEST_CASE("deterministic OFF time") {
    CHECK(doa_off_time(1.0, 4.0, 10.0) == 4.0);
    CHECK(doa_off_time(1.0, 0.0, 10.0) == 0.0);
    CHECK(doa_off_time(0.1, 4.0, 10.0) == 10.0);
    CHECK(doa_off_time(0.0, 4.0, 10.0) == 10.0);
  }

  TEST_CASE("randomized OFF-time distribution") {
    CHECK(roa_off_cdf(1.0, 4.0, 0.0) == 0.0);
    CHECK(roa_off_cdf(1.0, 4.0, 4.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(roa_off_cdf(1.0, 4.0, 2.0) == doctest::Approx((std::exp(0.5) - 1.0) / (kE - 1.0)).epsilon(1e-14));
    CHECK(roa_off_cdf(1.0, 4.0, 2.0) == doctest::Approx(0.37754).epsilon(1e-5));
    CHECK(roa_off_cdf(1.0, 4.0, 9.0) == 1.0);
    CHECK(roa_off_time(1.0, 4.0, 0.0) == 0.0);
    CHECK(roa_off_time(1.0, 4.0, 1.0) == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(roa_off_time(1.0, 4.0, 0.5) == doctest::Approx(4.0 * std::log(1.85914)).epsilon(1e-5));
    CHECK(roa_off_time(1.0, 4.0, 0.5) == doctest::Approx(2.48049).epsilon(1e-5));
    CHECK_THROWS_AS(roa_off_time(1.0, 4.0, 1.5), DomainError);
  }

  TEST_CASE("randomized OFF time round trip and support") {
    Rng rng(41);
    for (int n = 0; n < 20000; ++n) {
      const double r = gen::uniform(rng, 1e-3, 10.0);
      const double b = gen::uniform(rng, 1e-3, 10.0);
      const double mu = gen::uniform(rng, 1e-9, 1.0 - 1e-9);
      const double t = roa_off_time(r, b, mu);
      CHECK(t >= 0.0);
      CHECK(t <= b / r);
      CHECK(roa_off_cdf(r, b, t) == doctest::Approx(mu).epsilon(1e-9));
    }
  }

  TEST_CASE("randomized OFF-time distribution is monotone and continuous") {
    Rng rng(42);
    for (int n = 0; n < 500; ++n) {
      const double r = gen::uniform(rng, 1e-2, 10.0);
      const double b = gen::uniform(rng, 1e-2, 10.0);
      double prev = 0.0;
      for (int k = 0; k <= 400; ++k) {
        const double t = 2.0 * (b / r) * k / 400.0;
        const double p = roa_off_cdf(r, b, t);
        CHECK(p >= prev);
        prev = p;
      }
      const double edge = b / r;
      CHECK(roa_off_cdf(r, b, edge * (1 - 1e-12)) == doctest::Approx(1.0).epsilon(1e-9));
      CHECK(roa_off_cdf(r, b, edge * (1 + 1e-12)) == 1.0);
    }
  }

  TEST_CASE("adaptive OFF time on the three-step path") {
    const double b = 4.0;
    CHECK(adaptive_off_time(RentHistory({{0, 2}}), b) == 2.0);
    CHECK(adaptive_off_time(RentHistory({{0, 2}, {1, 1}}), b) == 3.0);
    CHECK(adaptive_off_time(RentHistory({{0, 2}, {1, 1}, {2, 0.5}}), b) == 4.0);

    AdaptiveOffTimer timer(2.0, b);
    CHECK(timer.off_time() == 2.0);
    CHECK(timer.observe(1.0, 1.0));
    CHECK(timer.off_time() == 3.0);
    CHECK(timer.observe(2.0, 0.5));
    CHECK(timer.off_time() == 4.0);
    CHECK_FALSE(timer.observe(2.5, 0.5));
    CHECK_FALSE(timer.observe(2.6, 0.7));
    CHECK_FALSE(timer.observe(4.0, 0.1));
    CHECK(timer.off_time() == 4.0);
  }

  TEST_CASE("adaptive rule rejects invalid paths") {
    CHECK_THROWS_AS(RentHistory({{0, 1}, {1, 2}}), DomainError);
    CHECK_THROWS_AS(RentHistory({{0, 1}, {1, 1}}), DomainError);
    CHECK_THROWS_AS(RentHistory({{0.5, 1}}), DomainError);
    CHECK_THROWS_AS(adaptive_off_time(RentHistory({{0, 2}, {3, 1}}), 4.0), DomainError);
    RentHistory h({{0, 2}});
    CHECK_THROWS_AS(h.push({1, 3}), DomainError);
  }

  TEST_CASE("adaptive OFF time grows and keeps accumulated rent equal to the buy price") {
    Rng rng(43);
    for (int n = 0; n < 2000; ++n) {
      const double b = gen::uniform(rng, 0.5, 10.0);
      const auto steps = adaptive_path(rng, b, gen::index(rng, 1, 8));
      double prev = -1.0;
      for (std::size_t k = 1; k <= steps.size(); ++k) {
        const std::vector<RentStep> prefix(steps.begin(), steps.begin() + static_cast<long>(k));
        const double off = adaptive_off_time(RentHistory(prefix), b);
        CHECK(off > prev);
        CHECK(rent_integral(prefix, off) == doctest::Approx(b).epsilon(1e-9));
        CHECK(RentHistory(prefix).accumulated(off) == doctest::Approx(b).epsilon(1e-9));
        prev = off;
      }
    }
  }

  TEST_CASE("fixed and threshold baselines") {
    CHECK(baseline_fixed(7.0, 10.0) == 7.0);
    CHECK(baseline_fixed(0.0, 10.0) == 0.0);
    CHECK(baseline_fixed(10.0, 10.0) == 10.0);
    CHECK(baseline_threshold(50, 100, 40));
    CHECK_FALSE(baseline_threshold(30, 100, 40));
    CHECK_FALSE(baseline_threshold(40, 100, 40));
    CHECK_THROWS_AS(baseline_threshold(40, 0, 40), ConfigError);
  }

  TEST_CASE("realized cost") {
    CHECK(realized_cost(1.0, 4.0, 4.0, 2.0) == 2.0);
    CHECK(realized_cost(1.0, 4.0, 4.0, 6.0) == 8.0);
    CHECK(realized_cost(1.0, 4.0, 4.0, 4.0) == 8.0);
  }

  TEST_CASE("deterministic worst case is two just past b over r") {
    Rng rng(44);
    for (int n = 0; n < 300; ++n) {
      const double T = 10.0;
      const double r = gen::uniform(rng, 0.1, 5.0);
      const double b = gen::uniform(rng, 0.01, r * T);
      const double t = doa_off_time(r, b, T);
      double worst = 0.0;
      double arg = 0.0;
      for (int k = 1; k <= 20000; ++k) {
        const double u = T * k / 20000.0;
        const double ratio = realized_cost(r, b, t, u) / std::min(r * u, b);
        if (ratio > worst) {
          worst = ratio;
          arg = u;
        }
      }
      CHECK(worst <= 2.0 + 1e-12);
      CHECK(worst >= 2.0 - 1e-12);
      CHECK(arg >= b / r);
      CHECK(arg <= b / r + T / 20000.0 + 1e-12);
    }
  }

  TEST_CASE("policy strings") {
    CHECK(PolicySpec::parse("doa").kind == PolicyKind::Doa);
    CHECK(PolicySpec::parse("roa").kind == PolicyKind::Roa);
    CHECK(PolicySpec::parse("adaptive").kind == PolicyKind::Adaptive);
    CHECK(PolicySpec::parse("fixed:7").parameter == 7.0);
    CHECK(PolicySpec::parse("threshold:50").kind == PolicyKind::Threshold);
    for (const char* bad : {"", "bogus", "fixed", "fixed:x", "threshold:101", "doa:1", "fixed:-1"}) {
      CHECK_THROWS_AS(PolicySpec::parse(bad), ConfigError);
    }
    Rng rng(45);
    for (int n = 0; n < 500; ++n) {
      const PolicySpec p = gen::policy(rng, gen::uniform(rng, 1.0, 20.0));
      CHECK(PolicySpec::parse(p.to_string()) == p);
    }
  }
}
