#pragma once

// Offline optimum over per-SBS OFF times on a time grid, with full knowledge
// of the period's energy arrivals.

#include <cstdint>
#include <vector>

#include "skiswitch/engine.hpp"

namespace skiswitch {

struct OracleResult {
  std::vector<double> off_times;  // per SBS; the period length means never OFF (or depleted first)
  double cost = 0.0;
  std::uint64_t nominal_evaluations = 0;  // (T / grid + 1) ^ (SBSs in use)
  std::uint64_t visited_leaves = 0;
};

/// Minimizes the period cost of `sim` over OFF times in {0, grid_dt, ..., T}.
/// Ties go to the lexicographically smallest OFF-time vector. Throws
/// BudgetExceeded when the nominal search space exceeds `budget`.
OracleResult offline_exhaustive(const PeriodSimulator& sim, double grid_dt,
                                std::uint64_t budget = 1'000'000);

}  // namespace skiswitch
