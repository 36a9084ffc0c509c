#include "skiswitch/energy.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "skiswitch/errors.hpp"

namespace skiswitch {

namespace {

// Absorbs round-off from repeatedly subtracting per-slot consumption.
constexpr double kEnergyTolerance = 1e-9;

std::atomic<bool> g_overload_warned{false};

}  // namespace

EnergyState EnergyState::uniform(std::size_t n_sbs, double initial, double capacity) {
  EnergyState s;
  s.stored.assign(n_sbs, initial);
  s.capacity = capacity;
  s.initial = initial;
  s.depleted_at.assign(n_sbs, std::nullopt);
  return s;
}

double bs_power(const BsParams& params, std::size_t n_users, double q) {
  if (n_users > params.max_users) {
    if (!g_overload_warned.exchange(true)) {
      std::clog << "warning: BS " << params.id << " serves " << n_users << " users, above its limit of "
                << params.max_users << "; clamping utilization at 1\n";
    }
    n_users = params.max_users;
  }
  const double utilization = static_cast<double>(n_users) / static_cast<double>(params.max_users);
  return utilization * (1.0 - q) * params.op_power_max + q * params.op_power_max;
}

double step_harvest(const HarvestParams& params, double dt, Rng& rng) {
  if (!(dt > 0.0)) throw DomainError("harvest interval must be positive");
  if (params.rate <= 0.0 || params.quantum <= 0.0) return 0.0;
  std::poisson_distribution<long> arrivals(params.rate * dt);
  return params.quantum * static_cast<double>(arrivals(rng));
}

double update_storage(double e, double harvested, double consumed, double cap) {
  const double available = e + harvested;
  if (consumed > available + kEnergyTolerance * std::max(1.0, available)) {
    throw DomainError("consumption exceeds stored plus harvested energy");
  }
  return std::clamp(available - consumed, 0.0, cap);
}

bool check_depletion(double e, double power, double dt, double harvested) {
  const double need = power * dt;
  return e + harvested < need - kEnergyTolerance * std::max(1.0, need);
}

HarvestTrace::HarvestTrace(double dt, std::vector<std::vector<double>> per_sbs)
    : dt_(dt), slots_(std::move(per_sbs)) {
  for (const auto& s : slots_) {
    if (s.size() != num_slots()) throw ConfigError("energy.trace", "ragged harvest trace");
  }
}

HarvestTrace HarvestTrace::sample(const HarvestParams& params, std::size_t n_sbs, std::size_t n_slots,
                                  double dt, std::uint64_t seed, std::uint64_t replication) {
  std::vector<std::vector<double>> slots(n_sbs, std::vector<double>(n_slots, 0.0));
  for (std::size_t s = 0; s < n_sbs; ++s) {
    Rng rng = make_stream(seed, {replication, stream::kHarvest, s});
    for (double& h : slots[s]) h = step_harvest(params, dt, rng);
  }
  return HarvestTrace(dt, std::move(slots));
}

HarvestTrace HarvestTrace::load_csv(const std::filesystem::path& path, std::size_t n_sbs,
                                    std::size_t n_slots, double dt) {
  std::ifstream in(path);
  if (!in) throw ConfigError("energy.trace_file", "cannot open " + path.string());
  std::vector<std::vector<double>> slots(n_sbs, std::vector<double>(n_slots, 0.0));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (line_no == 1 && line.rfind("time", 0) == 0) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double time = 0.0;
    long sbs_id = 0;
    double joules = 0.0;
    if (!(row >> time >> sbs_id >> joules)) {
      throw ConfigError("energy.trace_file", path.string() + ":" + std::to_string(line_no) +
                                                 ": expected time,sbs_id,joules");
    }
    if (sbs_id < 1 || static_cast<std::size_t>(sbs_id) > n_sbs) {
      throw ConfigError("energy.trace_file", path.string() + ":" + std::to_string(line_no) +
                                                 ": sbs_id out of range");
    }
    if (time < 0.0 || joules < 0.0) {
      throw ConfigError("energy.trace_file", path.string() + ":" + std::to_string(line_no) +
                                                 ": negative time or energy");
    }
    const auto slot = static_cast<std::size_t>(std::floor(time / dt + 1e-9));
    if (slot < n_slots) slots[static_cast<std::size_t>(sbs_id) - 1][slot] += joules;
  }
  return HarvestTrace(dt, std::move(slots));
}

void HarvestTrace::write_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.precision(17);
  out << "time,sbs_id,joules\n";
  for (std::size_t k = 0; k < num_slots(); ++k) {
    for (std::size_t s = 0; s < num_sbs(); ++s) {
      if (slots_[s][k] > 0.0) out << static_cast<double>(k) * dt_ << ',' << s + 1 << ',' << slots_[s][k] << '\n';
    }
  }
}

}  // namespace skiswitch
