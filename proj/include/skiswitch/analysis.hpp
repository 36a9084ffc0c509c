#pragma once

// Competitive analysis: closed-form and sampled ROA costs, worst-case ratio
// scans, and empirical ratios against the offline optimum.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "skiswitch/engine.hpp"
#include "skiswitch/random.hpp"
#include "skiswitch/schedulers.hpp"

namespace skiswitch {

/// Expected ROA cost when the SBS depletes at u: r u e/(e-1) below b/r, b e/(e-1) above.
/// Requires rent * period >= buy.
double expected_roa_cost(double rent, double buy, double u, double period);

struct McEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
};

/// Sample mean of the realized ROA cost over `n_samples` OFF-time draws.
McEstimate mc_expected_cost(double rent, double buy, double u, std::size_t n_samples, Rng& rng);

/// Expected time an ROA-scheduled SBS spends OFF in a period: T - (b/r)/(e-1).
double expected_off_duration(double rent, double buy, double period);

struct DoaScan {};
struct RoaScan {};
struct FixedScan {
  double t_off = 0.0;
};
using ScanPolicy = std::variant<DoaScan, RoaScan, FixedScan>;

struct ScanResult {
  double max_ratio = 0.0;
  double argmax_u = 0.0;
};

/// max over u in {grid_dt, 2 grid_dt, ..., T} of policy cost / offline cost.
ScanResult worst_case_ratio_scan(const ScanPolicy& policy, double rent, double buy, double period,
                                 double grid_dt);

/// Same scan for the adaptive rule on a known decreasing rent path.
ScanResult worst_case_ratio_scan(const RentHistory& path, double buy, double period, double grid_dt);

/// Cost of the adaptive rule on `path` when the SBS depletes at u.
double adaptive_realized_cost(const RentHistory& path, double buy, double u, double period);

struct RatioReport {
  std::vector<double> ratios;  // per kept replication, in replication order
  double median = 0.0;
  double worst = 0.0;
  double mean = 0.0;
  double min = 0.0;
  std::optional<double> ci_half_width;  // 95 %, only with at least 100 ratios
  std::size_t degenerate = 0;           // replications where both costs were zero
};

RatioReport summarize_ratios(std::vector<double> ratios, std::size_t degenerate = 0);

struct CrRecord {
  std::uint64_t replication = 0;
  double online_cost = 0.0;
  double optimal_cost = 0.0;
  double ratio = 0.0;  // NaN for degenerate replications
  std::vector<double> online_off_times;
  std::vector<double> optimal_off_times;
};

/// ROA (OFF times snapped down to the grid) against the exhaustive optimum over
/// one period of each replication.
RatioReport empirical_cr_study(const ScenarioConfig& cfg, std::size_t n_runs, double grid_dt,
                               std::uint64_t seed, std::vector<CrRecord>* records = nullptr,
                               std::size_t threads = 1);

/// The per-SBS OFF times ROA uses in `sim`, snapped down to multiples of grid_dt.
std::vector<double> snapped_roa_off_times(const PeriodSimulator& sim, const Replication& rep,
                                          double grid_dt);

}  // namespace skiswitch
