#include <doctest.h>

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "generators.hpp"
#include "oracles.hpp"
#include "skiswitch/engine.hpp"
#include "skiswitch/errors.hpp"

using namespace skiswitch;

namespace {

ScenarioConfig one_cell(const char* policy) {
  ScenarioConfig cfg;
  cfg.n_sbs = 1;
  cfg.n_ue = 10;
  cfg.horizon_periods = 1;
  cfg.path_loss.sbs_intercept = 105.0;
  cfg.policy = PolicySpec::parse(policy);
  return cfg;
}

// First replication in which every SBS serves somebody at the period start.
Replication covered(const ScenarioConfig& cfg, std::uint64_t master = 3) {
  for (std::uint64_t i = 0; i < 500; ++i) {
    Replication rep = make_replication(cfg, master, i);
    std::vector<double> e(cfg.n_sbs, cfg.initial_energy);
    PeriodSimulator sim(cfg, rep, 0, e);
    bool all = true;
    for (const auto& p : sim.prices()) all = all && p.used;
    if (all) return rep;
  }
  throw std::runtime_error("no fully covered replication");
}

Replication with_harvest(Replication rep, double joules_per_slot) {
  std::vector<std::vector<double>> slots(rep.harvest.num_sbs(),
                                         std::vector<double>(rep.harvest.num_slots(), joules_per_slot));
  rep.harvest = HarvestTrace(rep.harvest.dt(), std::move(slots));
  return rep;
}

double cell_power(const PeriodSimulator& sim) { return sim.evaluate(1, 0).power[1]; }

bool same(const PeriodResult& a, const PeriodResult& b) {
  if (a.sbs.size() != b.sbs.size()) return false;
  for (std::size_t i = 0; i < a.sbs.size(); ++i) {
    const auto& x = a.sbs[i];
    const auto& y = b.sbs[i];
    if (x.rent_cost != y.rent_cost || x.bought != y.bought || x.off_time != y.off_time ||
        x.depleted_at != y.depleted_at || x.energy_end != y.energy_end || x.switch_count != y.switch_count) {
      return false;
    }
  }
  return a.total_cost == b.total_cost && a.delay_per_sbs == b.delay_per_sbs;
}

}  // namespace

TEST_SUITE("engine") {
  TEST_CASE("immediate OFF costs exactly the buy price") {
    ScenarioConfig cfg = one_cell("fixed:0");
    const Replication rep = covered(cfg);
    const auto results = run_horizon(cfg, rep);
    REQUIRE(results.size() == 1);
    const auto& s = results[0].sbs[0];
    CHECK(s.used);
    CHECK(s.buy > 0.0);
    CHECK(results[0].total_cost == s.buy);
    CHECK(s.on_time == 0.0);
    CHECK(s.bought);
    CHECK(s.off_time == 0.0);
  }

  TEST_CASE("never OFF with plenty of energy rents for the whole period") {
    ScenarioConfig cfg = one_cell("fixed:10");
    cfg.initial_energy = 100.0;
    const Replication rep = with_harvest(covered(cfg), 10.0);
    const auto results = run_horizon(cfg, rep);
    const auto& s = results[0].sbs[0];
    double by_hand = 0.0;
    for (int k = 0; k < 100; ++k) by_hand += s.rent * 0.1;
    CHECK(results[0].total_cost == doctest::Approx(s.rent * 10.0).epsilon(1e-12));
    CHECK(results[0].total_cost == doctest::Approx(by_hand).epsilon(1e-15));
    CHECK_FALSE(s.bought);
    CHECK_FALSE(s.depleted_at.has_value());
    CHECK(s.on_time == doctest::Approx(10.0).epsilon(1e-12));
  }

  TEST_CASE("depletion after exactly ten slots") {
    ScenarioConfig cfg = one_cell("fixed:10");
    cfg.harvest.rate = 0.0;
    const Replication rep = covered(cfg);
    std::vector<double> probe(1, cfg.initial_energy);
    const double power = cell_power(PeriodSimulator(cfg, rep, 0, probe));
    std::vector<double> energy(1, power * cfg.dt * 10.0);
    const PeriodResult r = run_period(cfg, rep, 0, energy);
    const auto& s = r.sbs[0];
    REQUIRE(s.depleted_at.has_value());
    CHECK(*s.depleted_at == doctest::Approx(10 * cfg.dt).epsilon(1e-12));
    CHECK(s.rent_cost == doctest::Approx(10 * cfg.dt * s.rent).epsilon(1e-12));
    CHECK_FALSE(s.bought);
    CHECK(r.total_cost == s.rent_cost);
    CHECK(energy[0] == doctest::Approx(0.0).epsilon(1e-12));
  }

  TEST_CASE("tie between a voluntary OFF and depletion") {
    for (TieRule rule : {TieRule::VoluntaryFirst, TieRule::DepletionFirst}) {
      ScenarioConfig cfg = one_cell("fixed:1");
      cfg.harvest.rate = 0.0;
      cfg.tie_rule = rule;
      const Replication rep = covered(cfg);
      std::vector<double> probe(1, cfg.initial_energy);
      const double power = cell_power(PeriodSimulator(cfg, rep, 0, probe));
      std::vector<double> energy(1, power * cfg.dt * 10.0);
      const PeriodResult r = run_period(cfg, rep, 0, energy);
      const auto& s = r.sbs[0];
      if (rule == TieRule::VoluntaryFirst) {
        CHECK(s.bought);
        CHECK(s.off_time == doctest::Approx(1.0).epsilon(1e-12));
        CHECK_FALSE(s.depleted_at.has_value());
        CHECK(r.total_cost == doctest::Approx(s.rent_cost + s.buy).epsilon(1e-15));
      } else {
        CHECK_FALSE(s.bought);
        CHECK(s.depleted_at == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(r.total_cost == s.rent_cost);
      }
    }
  }

  TEST_CASE("single cell matches the slot-by-slot reference") {
    Rng rng(51);
    int compared = 0;
    for (int n = 0; n < 150; ++n) {
      ScenarioConfig cfg = one_cell("fixed:0");
      cfg.policy = PolicySpec::scheduled({std::round(gen::uniform(rng, 0.0, 10.0) * 10.0) / 10.0});
      cfg.harvest.rate = gen::uniform(rng, 0.0, 60.0);
      cfg.initial_energy = gen::uniform(rng, 0.0, 100.0);
      cfg.tie_rule = gen::coin(rng) ? TieRule::VoluntaryFirst : TieRule::DepletionFirst;
      cfg.seed = rng();
      const Replication rep = make_replication(cfg, cfg.seed, 0);
      std::vector<double> energy(1, cfg.initial_energy);
      PeriodSimulator sim(cfg, rep, 0, energy);
      if (!sim.prices()[0].used) continue;
      auto state = sim.initial_state();
      sim.run(state);
      const PeriodResult r = sim.finish(state);
      const auto ref = oracle::single_cell(sim.prices()[0].rent, sim.prices()[0].buy, cell_power(sim),
                                           rep.harvest.sbs(0), cfg.initial_energy, cfg.capacity, cfg.dt,
                                           sim.planned_off_steps()[0], cfg.tie_rule == TieRule::VoluntaryFirst);
      CHECK(r.total_cost == doctest::Approx(ref.cost).epsilon(1e-12));
      CHECK(r.sbs[0].bought == ref.bought);
      CHECK(r.sbs[0].depleted_at.has_value() == (ref.depleted_step >= 0));
      CHECK(r.sbs[0].energy_end == doctest::Approx(ref.energy_end).epsilon(1e-9));
      ++compared;
    }
    CHECK(compared > 50);
  }

  TEST_CASE("one-period horizon equals a single period") {
    ScenarioConfig cfg;
    cfg.horizon_periods = 1;
    const Replication rep = make_replication(cfg, 8, 2);
    std::vector<double> energy(cfg.n_sbs, cfg.initial_energy);
    const PeriodResult single = run_period(cfg, rep, 0, energy);
    const auto horizon = run_horizon(cfg, rep);
    REQUIRE(horizon.size() == 1);
    CHECK(same(single, horizon[0]));
  }

  TEST_CASE("energy carries over a period spent OFF") {
    ScenarioConfig cfg;
    cfg.horizon_periods = 2;
    cfg.policy = PolicySpec::parse("fixed:0");
    for (double e0 : {10.0, 60.0, 95.0}) {
      cfg.initial_energy = e0;
      const Replication rep = make_replication(cfg, 4, 0);
      const auto results = run_horizon(cfg, rep);
      for (std::size_t i = 0; i < cfg.n_sbs; ++i) {
        const auto& h = rep.harvest.sbs(i);
        const double total = std::accumulate(h.begin(), h.begin() + 100, 0.0);
        CHECK(results[0].sbs[i].energy_end == doctest::Approx(std::min(e0 + total, cfg.capacity)).epsilon(1e-12));
        CHECK(results[0].sbs[i].energy_consumed == 0.0);
      }
    }
  }

  TEST_CASE("same seed, same results") {
    ScenarioConfig cfg;
    cfg.policy = PolicySpec::parse("roa");
    const auto a = run_horizon(cfg, 3);
    const auto b = run_horizon(cfg, 3);
    REQUIRE(a.size() == b.size());
    for (std::size_t p = 0; p < a.size(); ++p) CHECK(same(a[p], b[p]));
  }

  TEST_CASE("instantaneous rent follows the live association") {
    ScenarioConfig cfg;
    cfg.n_sbs = 2;
    cfg.n_ue = 20;
    cfg.path_loss.sbs_intercept = 110.0;
    const Replication rep = covered(cfg);
    const Topology& t = rep.topology;
    const NetworkState both = associate({true, true, true}, t);
    const NetworkState alone = associate({true, true, false}, t);
    const double r_both = instantaneous_rent(1, both, t, cfg.weights, cfg.power.q, cfg.file_bits);
    const double r_alone = instantaneous_rent(1, alone, t, cfg.weights, cfg.power.q, cfg.file_bits);
    if (both.load(1) != alone.load(1)) CHECK(r_both != r_alone);
    CHECK(instantaneous_rent(1, both, t, {0.0, 0.0, 0.05}, cfg.power.q, cfg.file_bits) == 0.0);
  }

  TEST_CASE("unused cells stay OFF at no cost") {
    ScenarioConfig cfg;
    cfg.n_sbs = 6;
    cfg.n_ue = 4;
    for (std::uint64_t i = 0; i < 20; ++i) {
      const auto results = run_horizon(cfg, i);
      for (const auto& p : results) {
        for (const auto& s : p.sbs) {
          if (s.used) continue;
          CHECK(s.rent_cost == 0.0);
          CHECK_FALSE(s.bought);
          CHECK(s.on_time == 0.0);
          CHECK(s.switch_count == 0);
        }
      }
    }
  }

  TEST_CASE("adaptive policy postpones its OFF time as rent falls") {
    ScenarioConfig cfg;
    cfg.n_sbs = 1;
    cfg.n_ue = 10;
    cfg.horizon_periods = 1;
    cfg.path_loss.sbs_intercept = 105.0;
    cfg.weights.alpha_p = 0.0001;
    cfg.policy = PolicySpec::parse("adaptive");
    cfg.initial_energy = 100.0;
    cfg.tx_schedule = {{1.0, dbm_to_watts(25.0)}, {3.0, dbm_to_watts(29.0)}};
    const Replication rep = with_harvest(covered(cfg), 10.0);
    std::vector<double> rents;
    StepObserver obs = [&](const StepRecord& s) {
      if (s.sigma && (rents.empty() || s.rent_rate != rents.back())) rents.push_back(s.rent_rate);
    };
    const auto results = run_horizon(cfg, rep, &obs);
    const auto& s = results[0].sbs[0];
    for (std::size_t k = 1; k < rents.size(); ++k) CHECK(rents[k] < rents[k - 1]);
    const double doa = doa_off_time(s.rent, s.buy, cfg.period);
    if (rents.size() > 1 && s.off_time) CHECK(*s.off_time > doa - cfg.dt);
  }

  TEST_CASE("scenario validation") {
    ScenarioConfig cfg;
    cfg.dt = 0.3;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.n_sbs = 64;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.policy = PolicySpec::parse("fixed:11");
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = {};
    cfg.tx_schedule = {{2.0, 0.2}, {1.0, 0.2}};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    CHECK_NOTHROW(ScenarioConfig{}.validate());
  }

  TEST_CASE("random scenarios keep storage bounded and honour the service constraint") {
    Rng rng(52);
    for (int n = 0; n < 150; ++n) {
      const ScenarioConfig cfg = gen::scenario(rng);
      const Replication rep = make_replication(cfg, cfg.seed, 0);
      std::vector<double> energy(cfg.n_sbs, cfg.initial_energy);
      for (std::size_t p = 0; p < cfg.horizon_periods; ++p) {
        PeriodSimulator sim(cfg, rep, p, energy);
        std::vector<StepRecord> records;
        StepObserver obs = [&](const StepRecord& s) { records.push_back(s); };
        auto state = sim.initial_state();
        sim.run(state, &obs);
        const PeriodResult r = sim.finish(state);
        std::vector<double> last = energy;
        for (const auto& rec : records) {
          const std::size_t i = rec.sbs_id - 1;
          CHECK(rec.energy >= 0.0);
          CHECK(rec.energy <= cfg.capacity);
          if (!rec.sigma) CHECK(rec.energy >= last[i]);
          last[i] = rec.energy;
          const auto& s = r.sbs[i];
          const double local = rec.t - static_cast<double>(p) * cfg.period;
          const bool before_depletion = !s.depleted_at || local < *s.depleted_at - 1e-9;
          if (s.used && before_depletion) CHECK((rec.sigma || s.bought));
          if (s.depleted_at && local >= *s.depleted_at - 1e-9) CHECK_FALSE(rec.sigma);
        }
        for (std::size_t i = 0; i < cfg.n_sbs; ++i) {
          const auto& s = r.sbs[i];
          CHECK(s.energy_consumed <= energy[i] + s.energy_harvested + 1e-9);
          if (cfg.policy.kind != PolicyKind::Threshold) CHECK(s.switch_count <= 1);
          if (cfg.policy.kind != PolicyKind::Threshold) {
            const double stop = std::min(s.off_time.value_or(cfg.period), s.depleted_at.value_or(cfg.period));
            CHECK(s.on_time <= stop + 1e-9);
          }
        }
        for (std::size_t i = 0; i < cfg.n_sbs; ++i) energy[i] = r.sbs[i].energy_end;
      }
    }
  }
}
