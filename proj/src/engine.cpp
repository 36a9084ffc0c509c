#include "skiswitch/engine.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <unordered_map>

#include "skiswitch/errors.hpp"

namespace skiswitch {

namespace {

// Masks up to this many SBSs are cached in a dense table.
constexpr std::size_t kDenseCacheBits = 16;

std::size_t step_of(double t, double dt) {
  return static_cast<std::size_t>(std::max(0.0, std::ceil(t / dt - 1e-9)));
}

std::size_t planned_step(double t, double period, double dt, std::size_t n_steps) {
  if (t >= period * (1.0 - 1e-12)) return n_steps;
  return std::min(step_of(t, dt), n_steps);
}

}  // namespace

void ScenarioConfig::validate() const {
  if (!(period > 0.0) || !std::isfinite(period)) throw ConfigError("scenario.period", "must be positive");
  if (!(dt > 0.0) || dt > period) throw ConfigError("scenario.dt", "must lie in (0, period]");
  const double ratio = period / dt;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio) {
    throw ConfigError("scenario.dt", "must divide the period evenly");
  }
  if (horizon_periods < 1) throw ConfigError("scenario.horizon_periods", "must be at least 1");
  if (n_sbs > 63) throw ConfigError("topology.n_sbs", "at most 63 SBSs are supported");
  if (n_ue < 1) throw ConfigError("topology.n_ue", "at least one UE is required");
  if (!(area.width > 0.0) || !(area.height > 0.0)) throw ConfigError("topology.area", "must be positive");
  if (!(power.q >= 0.0 && power.q <= 1.0)) throw ConfigError("energy.q", "must lie in [0, 1]");
  if (!(harvest.rate >= 0.0)) throw ConfigError("energy.rate", "must be non-negative");
  if (!(harvest.quantum >= 0.0)) throw ConfigError("energy.quantum", "must be non-negative");
  if (!(capacity > 0.0)) throw ConfigError("energy.capacity", "must be positive");
  if (!(initial_energy >= 0.0) || initial_energy > capacity) {
    throw ConfigError("energy.initial", "must lie in [0, capacity]");
  }
  if (!(file_bits > 0.0)) throw ConfigError("traffic.file_bits", "must be positive");
  weights.validate();
  if (policy.kind == PolicyKind::Fixed && policy.parameter > period) {
    throw ConfigError("policy.algorithm", "fixed OFF time exceeds the period");
  }
  if (policy.kind == PolicyKind::Scheduled && policy.off_times.size() != n_sbs) {
    throw ConfigError("policy.algorithm", "scheduled policy needs one OFF time per SBS");
  }
  for (std::size_t k = 0; k < tx_schedule.size(); ++k) {
    if (!(tx_schedule[k].time >= 0.0) || !(tx_schedule[k].sbs_tx_power > 0.0)) {
      throw ConfigError("radio.sbs_tx_schedule", "needs non-negative times and positive powers");
    }
    if (k > 0 && !(tx_schedule[k].time > tx_schedule[k - 1].time)) {
      throw ConfigError("radio.sbs_tx_schedule", "times must strictly increase");
    }
  }
}

std::size_t ScenarioConfig::steps_per_period() const {
  return static_cast<std::size_t>(std::llround(period / dt));
}

Topology topology_at(const ScenarioConfig& cfg, const Topology& base, double t) {
  const TxPowerChange* active = nullptr;
  for (const TxPowerChange& c : cfg.tx_schedule) {
    if (c.time <= t + 1e-12) active = &c;
  }
  return active ? base.with_sbs_tx_power(active->sbs_tx_power) : base;
}

Replication make_replication(const ScenarioConfig& cfg, std::uint64_t master_seed, std::uint64_t index) {
  cfg.validate();
  auto topology = [&]() {
    if (cfg.topology_file) {
      std::ifstream in(*cfg.topology_file);
      if (!in) throw ConfigError("topology.file", "cannot open " + cfg.topology_file->string());
      nlohmann::json doc;
      try {
        in >> doc;
      } catch (const nlohmann::json::exception& e) {
        throw ConfigError("topology.file", e.what());
      }
      Topology t = topology_from_json(doc);
      if (t.num_sbs() != cfg.n_sbs || t.num_ue() != cfg.n_ue) {
        throw ConfigError("topology.file", "node counts differ from topology.n_sbs / topology.n_ue");
      }
      return t;
    }
    Rng rng = make_stream(master_seed, {index, stream::kTopology});
    return place_nodes(cfg.area, cfg.n_sbs, cfg.n_ue, cfg.radio, cfg.path_loss, rng);
  }();

  HarvestTrace harvest =
      cfg.harvest_trace_file
          ? HarvestTrace::load_csv(*cfg.harvest_trace_file, cfg.n_sbs, cfg.total_steps(), cfg.dt)
          : HarvestTrace::sample(cfg.harvest, cfg.n_sbs, cfg.total_steps(), cfg.dt, master_seed, index);

  std::vector<std::vector<double>> draws(cfg.horizon_periods, std::vector<double>(cfg.n_sbs));
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  for (std::size_t s = 0; s < cfg.n_sbs; ++s) {
    Rng rng = make_stream(master_seed, {index, stream::kRoaDraw, s});
    for (std::size_t p = 0; p < cfg.horizon_periods; ++p) draws[p][s] = uniform(rng);
  }
  return Replication{index, std::move(topology), std::move(harvest), std::move(draws)};
}

struct PeriodSimulator::Epoch {
  std::size_t start = 0;
  Topology topology;
  std::vector<std::unique_ptr<StateEval>> dense;
  std::unordered_map<std::uint64_t, std::unique_ptr<StateEval>> sparse;
};

PeriodSimulator::PeriodSimulator(const ScenarioConfig& cfg, const Replication& rep, std::size_t period,
                                 std::vector<double> energy)
    : cfg_(cfg), rep_(rep), period_(period), n_steps_(cfg.steps_per_period()),
      slot_offset_(period * cfg.steps_per_period()) {
  const std::size_t J = rep.topology.num_sbs();
  if (energy.size() != J) throw DomainError("energy vector does not match the SBS count");
  if (rep.harvest.num_sbs() != J || (J > 0 && rep.harvest.num_slots() < slot_offset_ + n_steps_)) {
    throw DomainError("harvest trace does not cover the period");
  }
  const double start_time = static_cast<double>(period) * cfg.period;

  auto add_epoch = [&](std::size_t start, double t) {
    auto e = std::make_unique<Epoch>(Epoch{start, topology_at(cfg, rep.topology, t), {}, {}});
    if (J <= kDenseCacheBits) e->dense.resize(std::size_t{1} << J);
    epochs_.push_back(std::move(e));
  };
  add_epoch(0, start_time);
  for (const TxPowerChange& c : cfg.tx_schedule) {
    const double local = c.time - start_time;
    if (local <= 1e-12 || local >= cfg.period) continue;
    const std::size_t step = step_of(local, cfg.dt);
    if (step >= n_steps_) continue;
    if (step == epochs_.back()->start) {
      epochs_.back()->topology = topology_at(cfg, rep.topology, c.time);
    } else {
      add_epoch(step, c.time);
    }
  }

  const Topology& topo0 = epochs_.front()->topology;
  prices_ = freeze_prices(topo0, cfg.weights, cfg.power.q, cfg.file_bits, cfg.period, start_time);
  const StateEval& all_on = evaluate(J >= 64 ? ~0ULL : (std::uint64_t{1} << J) - 1, 0);
  frozen_power_.resize(J);
  for (std::size_t i = 0; i < J; ++i) frozen_power_[i] = all_on.power[i + 1];

  off_step_.assign(J, n_steps_);
  for (std::size_t i = 0; i < J; ++i) {
    const PriceTag& p = prices_[i];
    double t = cfg.period;
    switch (cfg.policy.kind) {
      case PolicyKind::Doa: t = doa_off_time(p.rent, p.buy, cfg.period); break;
      case PolicyKind::Roa:
        if (p.buy == 0.0) {
          t = 0.0;
        } else if (p.rent > 0.0) {
          t = roa_off_time(p.rent, p.buy, rep.roa_draws.at(period).at(i));
        }
        break;
      case PolicyKind::Fixed: t = baseline_fixed(cfg.policy.parameter, cfg.period); break;
      case PolicyKind::Scheduled: t = cfg.policy.off_times.at(i); break;
      case PolicyKind::Adaptive:
      case PolicyKind::Threshold: break;
    }
    off_step_[i] = planned_step(t, cfg.period, cfg.dt, n_steps_);
  }

  State& s = initial_;
  s.energy = std::move(energy);
  s.on.resize(J);
  for (std::size_t i = 0; i < J; ++i) s.on[i] = prices_[i].used;
  s.latched.assign(J, 0);
  s.bought.assign(J, 0);
  s.depleted_at.assign(J, -1.0);
  s.off_time.assign(J, -1.0);
  s.rent_cost.assign(J, 0.0);
  s.on_steps.assign(J, 0);
  s.switches.assign(J, 0);
  s.consumed.assign(J, 0.0);
  s.harvested.assign(J, 0.0);
  if (cfg.policy.kind == PolicyKind::Adaptive) {
    s.timers.resize(J);
    for (std::size_t i = 0; i < J; ++i) {
      if (prices_[i].rent > 0.0) s.timers[i] = AdaptiveOffTimer(prices_[i].rent, prices_[i].buy);
    }
  }
}

PeriodSimulator::~PeriodSimulator() = default;
PeriodSimulator::PeriodSimulator(PeriodSimulator&&) noexcept = default;

std::size_t PeriodSimulator::epoch_at(std::size_t step) const {
  std::size_t e = 0;
  while (e + 1 < epochs_.size() && epochs_[e + 1]->start <= step) ++e;
  return e;
}

const StateEval& PeriodSimulator::evaluate(std::uint64_t mask, std::size_t step) const {
  Epoch& epoch = *epochs_[epoch_at(step)];
  std::unique_ptr<StateEval>* slot = nullptr;
  if (!epoch.dense.empty()) {
    slot = &epoch.dense[mask];
  } else {
    slot = &epoch.sparse[mask];
  }
  if (*slot) return **slot;

  const Topology& topo = epoch.topology;
  std::vector<bool> sigma(topo.num_bs(), false);
  sigma[0] = true;
  for (std::size_t j = 1; j < topo.num_bs(); ++j) sigma[j] = (mask >> (j - 1)) & 1U;
  const NetworkState ns = associate(sigma, topo);

  auto eval = std::make_unique<StateEval>();
  const std::size_t B = topo.num_bs();
  eval->load.resize(B);
  eval->delay.resize(B);
  eval->power.resize(B);
  eval->rent.assign(B, 0.0);
  std::size_t served = 0;
  for (std::size_t j = 0; j < B; ++j) {
    eval->load[j] = ns.load(j);
    served += eval->load[j];
    if (eval->load[j] > 0 && !sigma[j]) {
      throw InvariantViolation("UEs associated with OFF BS " + std::to_string(j));
    }
    eval->delay[j] = bs_delay(j, ns, topo, cfg_.file_bits);
    eval->power[j] = bs_power(topo.bs(j), eval->load[j], cfg_.power.q);
    if (j > 0) eval->rent[j] = cfg_.weights.alpha_d * eval->delay[j] + cfg_.weights.alpha_p * eval->power[j];
    eval->total_delay += eval->delay[j];
  }
  if (served != topo.num_ue()) throw InvariantViolation("association does not partition the UEs");
  *slot = std::move(eval);
  return **slot;
}

namespace {

std::uint64_t mask_of(const std::vector<char>& sigma) {
  std::uint64_t m = 0;
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    if (sigma[i]) m |= std::uint64_t{1} << i;
  }
  return m;
}

}  // namespace

std::vector<char> PeriodSimulator::policy_wants(State& state) const {
  const std::size_t J = num_sbs();
  const std::size_t k = state.step;
  std::vector<char> want(J, 0);
  switch (cfg_.policy.kind) {
    case PolicyKind::Threshold:
      for (std::size_t i = 0; i < J; ++i) {
        want[i] = baseline_threshold(state.energy[i], cfg_.capacity, cfg_.policy.parameter);
      }
      break;
    case PolicyKind::Adaptive: {
      const double t = static_cast<double>(k) * cfg_.dt;
      const StateEval* current = nullptr;
      if (k > 0 && cfg_.cost_mode == CostMode::Original) current = &evaluate(mask_of(state.on), k);
      for (std::size_t i = 0; i < J; ++i) {
        if (!(prices_[i].rent > 0.0)) {
          want[i] = 1;
          continue;
        }
        if (current && state.on[i]) state.timers[i].observe(t, current->rent[i + 1]);
        want[i] = k < planned_step(state.timers[i].off_time(), cfg_.period, cfg_.dt, n_steps_);
      }
      break;
    }
    default:
      for (std::size_t i = 0; i < J; ++i) want[i] = k < off_step_[i];
  }
  return want;
}

std::vector<char> PeriodSimulator::deplete(State& state, std::vector<char> sigma, std::size_t step,
                                           const std::vector<double>& harvest) const {
  const double t = static_cast<double>(step) * cfg_.dt;
  for (bool changed = true; changed;) {
    changed = false;
    const StateEval& eval = evaluate(mask_of(sigma), step);
    for (std::size_t i = 0; i < sigma.size(); ++i) {
      if (!sigma[i]) continue;
      const double power = cfg_.cost_mode == CostMode::Frozen ? frozen_power_[i] : eval.power[i + 1];
      if (check_depletion(state.energy[i], power, cfg_.dt, harvest[i])) {
        sigma[i] = 0;
        state.depleted_at[i] = t;
        changed = true;
      }
    }
  }
  return sigma;
}

void PeriodSimulator::advance(State& state, const std::vector<char>& want_on, const StepObserver* observer) const {
  const std::size_t J = num_sbs();
  const std::size_t k = state.step;
  if (k >= n_steps_) throw DomainError("period already finished");
  if (want_on.size() != J) throw DomainError("want vector does not match the SBS count");
  const double t = static_cast<double>(k) * cfg_.dt;
  const bool latching = cfg_.policy.kind != PolicyKind::Threshold;

  std::vector<double> harvest(J);
  for (std::size_t i = 0; i < J; ++i) harvest[i] = rep_.harvest.at(i, slot_offset_ + k);

  std::vector<char> active(J), voluntary(J, 0), sigma(J, 0);
  for (std::size_t i = 0; i < J; ++i) {
    active[i] = prices_[i].used && state.depleted_at[i] < 0.0 && !state.latched[i];
    if (active[i] && state.on[i] && !want_on[i]) voluntary[i] = 1;
  }

  if (cfg_.tie_rule == TieRule::VoluntaryFirst) {
    for (std::size_t i = 0; i < J; ++i) sigma[i] = active[i] && want_on[i];
    sigma = deplete(state, std::move(sigma), k, harvest);
  } else {
    for (std::size_t i = 0; i < J; ++i) sigma[i] = active[i] && (want_on[i] || state.on[i]);
    sigma = deplete(state, std::move(sigma), k, harvest);
    for (std::size_t i = 0; i < J; ++i) {
      if (state.depleted_at[i] >= 0.0) voluntary[i] = 0;
      if (voluntary[i]) sigma[i] = 0;
    }
    sigma = deplete(state, std::move(sigma), k, harvest);
  }

  for (std::size_t i = 0; i < J; ++i) {
    if (!voluntary[i]) continue;
    if (!state.bought[i]) {
      state.bought[i] = 1;
      state.cost += prices_[i].buy;
    }
    if (state.off_time[i] < 0.0) state.off_time[i] = t;
    if (latching) state.latched[i] = 1;
  }

  const StateEval& eval = evaluate(mask_of(sigma), k);
  const bool frozen = cfg_.cost_mode == CostMode::Frozen;
  for (std::size_t i = 0; i < J; ++i) {
    double rate = 0.0;
    double consumed = 0.0;
    if (sigma[i]) {
      rate = frozen ? prices_[i].rent : eval.rent[i + 1];
      consumed = (frozen ? frozen_power_[i] : eval.power[i + 1]) * cfg_.dt;
      state.rent_cost[i] += rate * cfg_.dt;
      state.cost += rate * cfg_.dt;
      state.on_steps[i] += 1;
    }
    state.energy[i] = update_storage(state.energy[i], harvest[i], consumed, cfg_.capacity);
    state.consumed[i] += consumed;
    state.harvested[i] += harvest[i];
    if (sigma[i] != state.on[i]) state.switches[i] += 1;
    if (observer) {
      (*observer)({static_cast<double>(period_) * cfg_.period + t, i + 1, sigma[i] != 0, state.energy[i],
                   eval.load[i + 1], rate});
    }
  }
  state.on = std::move(sigma);
  state.delay_integral += eval.total_delay * cfg_.dt;
  state.step = k + 1;
}

void PeriodSimulator::run(State& state, const StepObserver* observer) const {
  while (state.step < n_steps_) advance(state, policy_wants(state), observer);
}

PeriodResult PeriodSimulator::finish(const State& state) const {
  const std::size_t J = num_sbs();
  PeriodResult r;
  r.period = period_;
  r.sbs.reserve(J);
  double on_time_sum = 0.0;
  for (std::size_t i = 0; i < J; ++i) {
    SbsPeriodResult s;
    s.sbs = i + 1;
    s.used = prices_[i].used;
    s.rent = prices_[i].rent;
    s.buy = prices_[i].buy;
    s.rent_cost = state.rent_cost[i];
    s.bought = state.bought[i];
    s.on_time = static_cast<double>(state.on_steps[i]) * cfg_.dt;
    if (state.off_time[i] >= 0.0) s.off_time = state.off_time[i];
    if (state.depleted_at[i] >= 0.0) s.depleted_at = state.depleted_at[i];
    s.switch_count = state.switches[i];
    s.energy_consumed = state.consumed[i];
    s.energy_harvested = state.harvested[i];
    s.energy_end = state.energy[i];

    r.rent_cost += s.rent_cost;
    r.total_cost += s.rent_cost + (s.bought ? s.buy : 0.0);
    r.buy_count += s.bought;
    r.used_sbs += s.used;
    if (s.used) on_time_sum += s.on_time;
    r.switch_count += s.switch_count;
    r.depleted_count += s.depleted_at.has_value();
    r.energy_consumed += s.energy_consumed;
    r.energy_harvested += s.energy_harvested;
    r.sbs.push_back(s);
  }
  if (J > 0) {
    r.unused_sbs_fraction = static_cast<double>(J - r.used_sbs) / static_cast<double>(J);
    r.delay_per_sbs = state.delay_integral / cfg_.period / static_cast<double>(J);
  }
  if (r.used_sbs > 0) r.mean_on_time = on_time_sum / static_cast<double>(r.used_sbs);
  return r;
}

PeriodResult run_period(const ScenarioConfig& cfg, const Replication& rep, std::size_t period,
                        std::vector<double>& energy, const StepObserver* observer) {
  PeriodSimulator sim(cfg, rep, period, energy);
  PeriodSimulator::State state = sim.initial_state();
  sim.run(state, observer);
  energy = state.energy;
  return sim.finish(state);
}

std::vector<PeriodResult> run_horizon(const ScenarioConfig& cfg, const Replication& rep,
                                      const StepObserver* observer) {
  cfg.validate();
  std::vector<double> energy(rep.topology.num_sbs(), cfg.initial_energy);
  std::vector<PeriodResult> results;
  results.reserve(cfg.horizon_periods);
  for (std::size_t p = 0; p < cfg.horizon_periods; ++p) {
    results.push_back(run_period(cfg, rep, p, energy, observer));
  }
  return results;
}

std::vector<PeriodResult> run_horizon(const ScenarioConfig& cfg, std::uint64_t replication_index) {
  const Replication rep = make_replication(cfg, cfg.seed, replication_index);
  return run_horizon(cfg, rep);
}

double instantaneous_rent(std::size_t bs, const NetworkState& state, const Topology& topo,
                          const CostWeights& w, double q, double file_bits) {
  return rent_price(bs, state, topo, w, q, file_bits);
}

SbsPeriodResult run_isolated_sbs(const ScenarioConfig& cfg, const PriceTag& price, double frozen_power,
                                 const std::vector<double>& harvest, double initial_energy,
                                 double off_time) {
  const std::size_t n = cfg.steps_per_period();
  if (harvest.size() < n) throw DomainError("harvest slice shorter than the period");
  SbsPeriodResult r;
  r.sbs = price.sbs;
  r.used = price.used;
  r.rent = price.rent;
  r.buy = price.buy;
  const std::size_t off_step = planned_step(off_time, cfg.period, cfg.dt, n);
  double e = initial_energy;
  bool on = price.used;
  bool done = !price.used;
  std::size_t on_steps = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * cfg.dt;
    const double h = harvest[k];
    bool sigma = false;
    if (!done) {
      const bool depleted = check_depletion(e, frozen_power, cfg.dt, h);
      const bool wants_off = k >= off_step;
      if (wants_off && !(depleted && cfg.tie_rule == TieRule::DepletionFirst)) {
        r.bought = true;
        r.off_time = t;
        done = true;
      } else if (depleted) {
        r.depleted_at = t;
        done = true;
      } else {
        sigma = true;
      }
    }
    double consumed = 0.0;
    if (sigma) {
      consumed = frozen_power * cfg.dt;
      r.rent_cost += price.rent * cfg.dt;
      ++on_steps;
    }
    e = update_storage(e, h, consumed, cfg.capacity);
    r.energy_consumed += consumed;
    r.energy_harvested += h;
    if (sigma != on) ++r.switch_count;
    on = sigma;
  }
  r.on_time = static_cast<double>(on_steps) * cfg.dt;
  r.energy_end = e;
  return r;
}

}  // namespace skiswitch
