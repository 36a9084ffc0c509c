#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "fixtures.hpp"
#include "generators.hpp"
#include "skiswitch/energy.hpp"
#include "skiswitch/errors.hpp"

using namespace skiswitch;

TEST_SUITE("energy") {
  TEST_CASE("power draw") {
    const BsParams s = fixture::sbs(1);
    CHECK(bs_power(s, 0, 1.0) == 10.0);
    CHECK(bs_power(s, 7, 1.0) == 10.0);
    CHECK(bs_power(s, 5, 0.9) == doctest::Approx(9.5).epsilon(1e-15));
    CHECK(bs_power(s, 0, 0.0) == 0.0);
    CHECK(bs_power(s, 25, 0.5) == bs_power(s, 10, 0.5));
  }

  TEST_CASE("harvest degenerate parameters") {
    Rng rng(3);
    for (int k = 0; k < 100; ++k) {
      CHECK(step_harvest({0.0, 0.2}, 1.0, rng) == 0.0);
      CHECK(step_harvest({20.0, 0.0}, 1.0, rng) == 0.0);
    }
    CHECK_THROWS_AS(step_harvest({20.0, 0.2}, 0.0, rng), DomainError);
  }

  TEST_CASE("harvest moments") {
    Rng rng(4);
    const int n = 1'000'000;
    double sum = 0.0;
    double sum_sq = 0.0;
    for (int k = 0; k < n; ++k) {
      const double h = step_harvest({20.0, 0.2}, 1.0, rng);
      const double count = h / 0.2;
      CHECK_MESSAGE(std::abs(count - std::round(count)) < 1e-9, "harvest is a whole number of quanta");
      sum += h;
      sum_sq += count * count;
    }
    const double mean = sum / n;
    CHECK(mean == doctest::Approx(4.0).epsilon(0.01));
    const double count_mean = mean / 0.2;
    const double count_var = sum_sq / n - count_mean * count_mean;
    // Poisson: variance equals the mean (20); the sampling sd of the variance is about 0.03.
    CHECK(count_var == doctest::Approx(count_mean).epsilon(0.01));
  }

  TEST_CASE("storage update") {
    CHECK(update_storage(99.9, 0.4, 0.0, 100.0) == 100.0);
    CHECK(update_storage(99.9, 0.4, 0.95, 100.0) == doctest::Approx(99.35).epsilon(1e-14));
    CHECK(update_storage(0.0, 0.0, 0.0, 100.0) == 0.0);
    CHECK_THROWS_AS(update_storage(0.5, 0.2, 0.95, 100.0), DomainError);
  }

  TEST_CASE("depletion check") {
    CHECK(check_depletion(0.5, 9.5, 0.1, 0.2));
    CHECK_FALSE(check_depletion(0.0, 0.0, 0.1, 0.0));
    CHECK_FALSE(check_depletion(0.95, 9.5, 0.1, 0.0));
    CHECK_FALSE(check_depletion(9.5 * 0.1, 9.5, 0.1, 0.0));
    CHECK(check_depletion(0.9, 9.5, 0.1, 0.0));
  }

  TEST_CASE("sampled traces are per-SBS streams") {
    const HarvestTrace a = HarvestTrace::sample({20.0, 0.2}, 3, 50, 0.1, 11, 0);
    const HarvestTrace b = HarvestTrace::sample({20.0, 0.2}, 5, 50, 0.1, 11, 0);
    const HarvestTrace c = HarvestTrace::sample({20.0, 0.2}, 3, 50, 0.1, 11, 1);
    for (std::size_t s = 0; s < 3; ++s) CHECK(a.sbs(s) == b.sbs(s));
    CHECK_FALSE(a == c);
  }

  TEST_CASE("trace csv round trip") {
    const auto dir = std::filesystem::temp_directory_path() / "skiswitch_energy_test";
    std::filesystem::create_directories(dir);
    const HarvestTrace a = HarvestTrace::sample({20.0, 0.2}, 2, 40, 0.1, 5, 3);
    a.write_csv(dir / "trace.csv");
    const HarvestTrace b = HarvestTrace::load_csv(dir / "trace.csv", 2, 40, 0.1);
    for (std::size_t s = 0; s < 2; ++s) {
      for (std::size_t k = 0; k < 40; ++k) CHECK(b.at(s, k) == doctest::Approx(a.at(s, k)).epsilon(1e-15));
    }
    {
      std::ofstream bad(dir / "bad.csv");
      bad << "time,sbs_id,joules\n0.0,3,1.0\n";
    }
    CHECK_THROWS_AS(HarvestTrace::load_csv(dir / "bad.csv", 2, 40, 0.1), ConfigError);
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("storage stays bounded under random slot sequences") {
    Rng rng(21);
    for (int n = 0; n < 2000; ++n) {
      const double cap = gen::uniform(rng, 1.0, 100.0);
      double e = gen::uniform(rng, 0.0, cap);
      double total_in = e;
      double total_out = 0.0;
      for (int k = 0; k < 50; ++k) {
        const double h = gen::uniform(rng, 0.0, 2.0);
        const double p = gen::uniform(rng, 0.0, 10.0);
        const double need = p * 0.1;
        total_in += h;
        if (check_depletion(e, p, 0.1, h)) {
          e = update_storage(e, h, 0.0, cap);
        } else {
          e = update_storage(e, h, need, cap);
          total_out += need;
        }
        CHECK(e >= 0.0);
        CHECK(e <= cap);
      }
      CHECK(total_out <= total_in + 1e-9);
    }
  }
}
