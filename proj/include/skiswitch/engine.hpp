#pragma once

// Time-stepped simulation of self-powered small cells over one or more periods.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "skiswitch/energy.hpp"
#include "skiswitch/network.hpp"
#include "skiswitch/pricing.hpp"
#include "skiswitch/schedulers.hpp"

namespace skiswitch {

/// Original: rent r_j(sigma(t)) and power follow the live association.
/// Frozen: rent and power stay at their period-start all-ON values.
enum class CostMode { Original, Frozen };

/// Which rule wins when a voluntary OFF and a depletion fall in the same slot.
enum class TieRule { VoluntaryFirst, DepletionFirst };

/// From `time` on, every SBS transmits at `sbs_tx_power` watts.
struct TxPowerChange {
  double time = 0.0;
  double sbs_tx_power = 0.0;

  bool operator==(const TxPowerChange&) const = default;
};

struct ScenarioConfig {
  double period = 10.0;  // T, seconds
  std::size_t horizon_periods = 2;
  double dt = 0.1;  // seconds
  Area area;
  std::size_t n_sbs = 6;
  std::size_t n_ue = 16;
  RadioParams radio;
  PathLossModel path_loss;
  HarvestParams harvest;
  PowerModelParams power;
  CostWeights weights;
  double file_bits = 1e5;
  double initial_energy = 60.0;  // joules
  double capacity = 100.0;       // joules
  std::uint64_t seed = 1;
  PolicySpec policy;
  CostMode cost_mode = CostMode::Original;
  TieRule tie_rule = TieRule::VoluntaryFirst;
  std::vector<TxPowerChange> tx_schedule;  // sorted by time
  std::optional<std::filesystem::path> topology_file;
  std::optional<std::filesystem::path> harvest_trace_file;

  /// Throws ConfigError naming the first offending field.
  void validate() const;
  std::size_t steps_per_period() const;
  std::size_t total_steps() const { return steps_per_period() * horizon_periods; }
  bool operator==(const ScenarioConfig&) const = default;
};

/// Everything random about one replication, drawn up front so that every
/// policy faces the same topology, arrivals and uniform draws.
struct Replication {
  std::uint64_t index = 0;
  Topology topology;
  HarvestTrace harvest;
  std::vector<std::vector<double>> roa_draws;  // [period][sbs]
};

Replication make_replication(const ScenarioConfig& cfg, std::uint64_t master_seed, std::uint64_t index);

struct SbsPeriodResult {
  std::size_t sbs = 0;  // BS index
  bool used = true;
  double rent = 0.0;  // frozen price
  double buy = 0.0;
  double rent_cost = 0.0;
  bool bought = false;
  double on_time = 0.0;
  std::optional<double> off_time;     // voluntary
  std::optional<double> depleted_at;  // u_j
  std::size_t switch_count = 0;
  double energy_consumed = 0.0;
  double energy_harvested = 0.0;
  double energy_end = 0.0;
};

struct PeriodResult {
  std::size_t period = 0;
  std::vector<SbsPeriodResult> sbs;
  double total_cost = 0.0;
  double rent_cost = 0.0;
  std::size_t buy_count = 0;
  std::size_t used_sbs = 0;
  double unused_sbs_fraction = 0.0;
  double mean_on_time = 0.0;  // over used SBSs
  std::size_t switch_count = 0;
  std::size_t depleted_count = 0;
  double energy_consumed = 0.0;
  double energy_harvested = 0.0;
  double delay_per_sbs = 0.0;  // time-averaged network delay divided by the SBS count
};

struct StepRecord {
  double t = 0.0;
  std::size_t sbs_id = 0;
  bool sigma = false;
  double energy = 0.0;
  std::size_t assoc_count = 0;
  double rent_rate = 0.0;
};

using StepObserver = std::function<void(const StepRecord&)>;

/// Per-association quantities for one ON/OFF mask.
struct StateEval {
  std::vector<std::size_t> load;  // per BS
  std::vector<double> delay;      // per BS, seconds
  std::vector<double> power;      // per BS, watts
  std::vector<double> rent;       // per BS, cost per second (0 for the MBS)
  double total_delay = 0.0;
};

/// One period of one replication. The mutable part lives in `State`, which is
/// cheap to copy so that search procedures can branch from any step.
class PeriodSimulator {
 public:
  struct State {
    std::size_t step = 0;
    std::vector<double> energy;
    std::vector<char> on;        // current sigma per SBS (index j - 1)
    std::vector<char> latched;   // voluntarily OFF, stays OFF
    std::vector<char> bought;
    std::vector<double> depleted_at;  // < 0 when not depleted
    std::vector<double> off_time;     // < 0 when never voluntarily OFF
    std::vector<double> rent_cost;
    std::vector<std::size_t> on_steps;
    std::vector<std::size_t> switches;
    std::vector<double> consumed;
    std::vector<double> harvested;
    std::vector<AdaptiveOffTimer> timers;
    double delay_integral = 0.0;
    double cost = 0.0;
  };

  /// `energy` holds the stored joules per SBS at the period start.
  PeriodSimulator(const ScenarioConfig& cfg, const Replication& rep, std::size_t period,
                  std::vector<double> energy);
  ~PeriodSimulator();
  PeriodSimulator(PeriodSimulator&&) noexcept;
  PeriodSimulator(const PeriodSimulator&) = delete;
  PeriodSimulator& operator=(const PeriodSimulator&) = delete;

  const State& initial_state() const { return initial_; }
  std::size_t num_sbs() const { return prices_.size(); }
  std::size_t num_steps() const { return n_steps_; }
  double dt() const { return cfg_.dt; }
  double period_length() const { return cfg_.period; }
  const ScenarioConfig& config() const { return cfg_; }
  const std::vector<PriceTag>& prices() const { return prices_; }
  /// Planned voluntary OFF step per SBS for schedule-based policies; num_steps() means never.
  const std::vector<std::size_t>& planned_off_steps() const { return off_step_; }

  /// What the configured policy wants for each SBS at the current step.
  std::vector<char> policy_wants(State& state) const;

  /// Advances one slot with the given ON wishes (index j - 1).
  void advance(State& state, const std::vector<char>& want_on, const StepObserver* observer = nullptr) const;

  /// Runs the configured policy to the end of the period.
  void run(State& state, const StepObserver* observer = nullptr) const;

  PeriodResult finish(const State& state) const;

  /// Association quantities for a mask over SBSs at the given step (bit j - 1 = SBS j ON).
  const StateEval& evaluate(std::uint64_t mask, std::size_t step) const;

 private:
  struct Epoch;
  std::size_t epoch_at(std::size_t step) const;
  std::vector<char> deplete(State& state, std::vector<char> sigma, std::size_t step,
                            const std::vector<double>& harvest) const;

  const ScenarioConfig& cfg_;
  const Replication& rep_;
  std::size_t period_;
  std::size_t n_steps_;
  std::size_t slot_offset_;
  std::vector<PriceTag> prices_;
  std::vector<double> frozen_power_;
  std::vector<std::size_t> off_step_;
  std::vector<std::unique_ptr<Epoch>> epochs_;
  State initial_;
};

/// Runs one period with the configured policy.
PeriodResult run_period(const ScenarioConfig& cfg, const Replication& rep, std::size_t period,
                        std::vector<double>& energy, const StepObserver* observer = nullptr);

/// Chains periods, carrying stored energy across boundaries.
std::vector<PeriodResult> run_horizon(const ScenarioConfig& cfg, const Replication& rep,
                                      const StepObserver* observer = nullptr);
std::vector<PeriodResult> run_horizon(const ScenarioConfig& cfg, std::uint64_t replication_index = 0);

/// Rent rate of SBS `bs` on an arbitrary live state.
double instantaneous_rent(std::size_t bs, const NetworkState& state, const Topology& topo,
                          const CostWeights& w, double q, double file_bits);

/// One SBS on its own with frozen prices: the independent per-SBS subproblem.
SbsPeriodResult run_isolated_sbs(const ScenarioConfig& cfg, const PriceTag& price, double frozen_power,
                                 const std::vector<double>& harvest, double initial_energy,
                                 double off_time);

/// Topology of the given replication at time `t`, after any scheduled transmit-power change.
Topology topology_at(const ScenarioConfig& cfg, const Topology& base, double t);

}  // namespace skiswitch
