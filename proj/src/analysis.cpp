#include "skiswitch/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "skiswitch/errors.hpp"
#include "skiswitch/oracle.hpp"
#include "skiswitch/parallel.hpp"
#include "skiswitch/pricing.hpp"

namespace skiswitch {

namespace {

constexpr double kRatio = std::numbers::e / (std::numbers::e - 1.0);

void require_rent_covers_buy(double rent, double buy, double period) {
  if (!(rent > 0.0) || !(buy > 0.0)) throw DomainError("ROA analysis needs positive rent and buy");
  if (rent * period < buy) {
    throw DomainError("rent * period < buy: renting for the whole period is cheaper than buying, "
                      "so the SBS should never switch OFF and ROA does not apply");
  }
}

std::size_t grid_count(double period, double grid_dt) {
  if (!(grid_dt > 0.0)) throw DomainError("grid_dt must be positive");
  return static_cast<std::size_t>(std::llround(period / grid_dt));
}

// Deterministic schedule that goes OFF at t_off unless the period ends first.
double scheduled_cost(double rent, double buy, double t_off, double u, double period) {
  if (t_off >= period) return rent * u;
  return realized_cost(rent, buy, t_off, u);
}

}  // namespace

double expected_roa_cost(double rent, double buy, double u, double period) {
  require_rent_covers_buy(rent, buy, period);
  if (u < 0.0 || u > period) throw DomainError("u must lie in [0, period]");
  return u < buy / rent ? rent * u * kRatio : buy * kRatio;
}

McEstimate mc_expected_cost(double rent, double buy, double u, std::size_t n_samples, Rng& rng) {
  if (n_samples < 1) throw DomainError("need at least one sample");
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t k = 0; k < n_samples; ++k) {
    const double t = roa_off_time(rent, buy, uniform(rng));
    const double c = realized_cost(rent, buy, t, u);
    sum += c;
    sum_sq += c * c;
  }
  const double n = static_cast<double>(n_samples);
  const double mean = sum / n;
  const double var = n > 1 ? std::max(0.0, (sum_sq - n * mean * mean) / (n - 1.0)) : 0.0;
  return {mean, std::sqrt(var / n)};
}

double expected_off_duration(double rent, double buy, double period) {
  if (!(rent > 0.0) || buy < 0.0) throw DomainError("needs positive rent and non-negative buy");
  if (rent * period < buy) {
    throw DomainError("rent * period < buy: the SBS never switches OFF voluntarily");
  }
  return period - (buy / rent) / (std::numbers::e - 1.0);
}

ScanResult worst_case_ratio_scan(const ScanPolicy& policy, double rent, double buy, double period,
                                 double grid_dt) {
  const std::size_t n = grid_count(period, grid_dt);
  double t_off = period;
  if (const auto* f = std::get_if<FixedScan>(&policy)) t_off = f->t_off;
  if (std::holds_alternative<DoaScan>(policy)) t_off = doa_off_time(rent, buy, period);
  ScanResult best{-std::numeric_limits<double>::infinity(), 0.0};
  for (std::size_t k = 1; k <= n; ++k) {
    const double u = k == n ? period : static_cast<double>(k) * grid_dt;
    const double opt = offline_cost(rent, buy, u, period);
    const double alg = std::holds_alternative<RoaScan>(policy) ? expected_roa_cost(rent, buy, u, period)
                                                               : scheduled_cost(rent, buy, t_off, u, period);
    const double ratio = alg / opt;
    if (ratio > best.max_ratio) best = {ratio, u};
  }
  return best;
}

double adaptive_realized_cost(const RentHistory& path, double buy, double u, double period) {
  const double t_bar = adaptive_effective_off_time(path, buy);
  if (t_bar >= period || u < t_bar) return path.accumulated(u);
  return path.accumulated(t_bar) + buy;
}

ScanResult worst_case_ratio_scan(const RentHistory& path, double buy, double period, double grid_dt) {
  const std::size_t n = grid_count(period, grid_dt);
  ScanResult best{-std::numeric_limits<double>::infinity(), 0.0};
  for (std::size_t k = 1; k <= n; ++k) {
    const double u = k == n ? period : static_cast<double>(k) * grid_dt;
    const double opt = std::min(path.accumulated(u), buy);
    const double ratio = adaptive_realized_cost(path, buy, u, period) / opt;
    if (ratio > best.max_ratio) best = {ratio, u};
  }
  return best;
}

RatioReport summarize_ratios(std::vector<double> ratios, std::size_t degenerate) {
  RatioReport r;
  r.degenerate = degenerate;
  r.ratios = std::move(ratios);
  if (r.ratios.empty()) return r;
  std::vector<double> sorted = r.ratios;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  r.median = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  r.worst = sorted.back();
  r.min = sorted.front();
  r.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(n);
  if (n >= 100) {
    double ss = 0.0;
    for (double x : sorted) ss += (x - r.mean) * (x - r.mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    r.ci_half_width = 1.96 * sd / std::sqrt(static_cast<double>(n));
  }
  return r;
}

std::vector<double> snapped_roa_off_times(const PeriodSimulator& sim, const Replication& rep,
                                          double grid_dt) {
  const double T = sim.period_length();
  std::vector<double> times(sim.num_sbs(), T);
  for (std::size_t i = 0; i < sim.num_sbs(); ++i) {
    const PriceTag& p = sim.prices()[i];
    double t = T;
    if (p.buy == 0.0) {
      t = 0.0;
    } else if (p.rent > 0.0) {
      t = roa_off_time(p.rent, p.buy, rep.roa_draws.at(0).at(i));
    }
    times[i] = t >= T ? T : std::floor(t / grid_dt + 1e-9) * grid_dt;
  }
  return times;
}

RatioReport empirical_cr_study(const ScenarioConfig& base, std::size_t n_runs, double grid_dt,
                               std::uint64_t seed, std::vector<CrRecord>* records, std::size_t threads) {
  ScenarioConfig cfg = base;
  cfg.horizon_periods = 1;
  cfg.policy = PolicySpec::parse("roa");
  cfg.validate();

  std::vector<CrRecord> all(n_runs);
  parallel_for(n_runs, threads, [&](std::size_t i) {
    const Replication rep = make_replication(cfg, seed, i);
    const std::vector<double> energy(cfg.n_sbs, cfg.initial_energy);

    PeriodSimulator oracle_sim(cfg, rep, 0, energy);
    const OracleResult best = offline_exhaustive(oracle_sim, grid_dt);

    ScenarioConfig online_cfg = cfg;
    online_cfg.policy = PolicySpec::scheduled(snapped_roa_off_times(oracle_sim, rep, grid_dt));
    PeriodSimulator online(online_cfg, rep, 0, energy);
    PeriodSimulator::State state = online.initial_state();
    online.run(state);
    const PeriodResult result = online.finish(state);

    CrRecord& rec = all[i];
    rec.replication = i;
    rec.online_cost = result.total_cost;
    rec.optimal_cost = best.cost;
    rec.online_off_times = online_cfg.policy.off_times;
    rec.optimal_off_times = best.off_times;
    rec.ratio = best.cost > 0.0 ? result.total_cost / best.cost
                : result.total_cost > 0.0 ? std::numeric_limits<double>::infinity()
                                          : std::numeric_limits<double>::quiet_NaN();
  });

  std::vector<double> ratios;
  std::size_t degenerate = 0;
  for (const CrRecord& rec : all) {
    if (std::isnan(rec.ratio)) {
      ++degenerate;
    } else {
      ratios.push_back(rec.ratio);
    }
  }
  if (records) *records = std::move(all);
  return summarize_ratios(std::move(ratios), degenerate);
}

}  // namespace skiswitch
