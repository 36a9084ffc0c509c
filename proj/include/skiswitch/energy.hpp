#pragma once

// BS power draw, Poisson energy arrivals and bounded storage dynamics.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "skiswitch/network.hpp"
#include "skiswitch/random.hpp"

namespace skiswitch {

struct PowerModelParams {
  double q = 0.9;  // weight of the fixed term, in [0, 1]

  bool operator==(const PowerModelParams&) const = default;
};

struct HarvestParams {
  double rate = 20.0;    // arrivals per second
  double quantum = 0.2;  // joules per arrival

  bool operator==(const HarvestParams&) const = default;
};

/// Per-SBS storage state for one replication.
struct EnergyState {
  std::vector<double> stored;                      // joules, per SBS
  double capacity = 100.0;                         // joules
  double initial = 60.0;                           // joules
  std::vector<std::optional<double>> depleted_at;  // seconds, per SBS, reset every period

  static EnergyState uniform(std::size_t n_sbs, double initial, double capacity);
};

/// (n/M)(1-q)P_op + q P_op. Loads above M are clamped to M with a one-time warning.
double bs_power(const BsParams& params, std::size_t n_users, double q);

/// Energy collected over `dt`: quantum * Poisson(rate * dt).
double step_harvest(const HarvestParams& params, double dt, Rng& rng);

/// min(e + harvested - consumed, cap). Throws DomainError when consumption
/// exceeds what is available; the caller must run `check_depletion` first.
double update_storage(double e, double harvested, double consumed, double cap);

/// True iff the SBS cannot fund the next slot: e + harvested < power * dt.
bool check_depletion(double e, double power, double dt, double harvested);

/// Per-slot harvested joules for each SBS over a whole run.
class HarvestTrace {
 public:
  HarvestTrace() = default;
  HarvestTrace(double dt, std::vector<std::vector<double>> per_sbs);

  /// Samples `n_slots` slots per SBS, SBS s using its own stream (seed, replication, s).
  static HarvestTrace sample(const HarvestParams& params, std::size_t n_sbs, std::size_t n_slots,
                             double dt, std::uint64_t seed, std::uint64_t replication);

  /// CSV with header `time,sbs_id,joules`; sbs_id is the BS index (1-based).
  /// Arrivals are credited to slot floor(time / dt). Rows may be sparse.
  static HarvestTrace load_csv(const std::filesystem::path& path, std::size_t n_sbs,
                               std::size_t n_slots, double dt);
  void write_csv(const std::filesystem::path& path) const;

  double dt() const { return dt_; }
  std::size_t num_sbs() const { return slots_.size(); }
  std::size_t num_slots() const { return slots_.empty() ? 0 : slots_.front().size(); }
  double at(std::size_t sbs, std::size_t slot) const { return slots_[sbs][slot]; }
  const std::vector<double>& sbs(std::size_t s) const { return slots_[s]; }
  bool operator==(const HarvestTrace&) const = default;

 private:
  double dt_ = 0.0;
  std::vector<std::vector<double>> slots_;
};

}  // namespace skiswitch
