#pragma once

// OFF-time policies for a single small cell facing a rent-or-buy choice.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace skiswitch {

/// Outcome of a policy for one SBS and one period.
struct Decision {
  std::optional<double> off_time;  // absent: never voluntarily OFF
  bool bought = false;             // x_j
};

/// Rent in effect from time `t` on.
struct RentStep {
  double t = 0.0;
  double rent = 0.0;
};

/// Piecewise-constant, strictly decreasing rent path starting at t = 0.
class RentHistory {
 public:
  RentHistory() = default;
  explicit RentHistory(std::vector<RentStep> steps);

  const std::vector<RentStep>& steps() const { return steps_; }
  std::size_t size() const { return steps_.size(); }
  bool empty() const { return steps_.empty(); }

  /// Appends a step; throws DomainError unless it keeps the path valid.
  void push(RentStep step);
  /// Rent in effect at time t.
  double rent_at(double t) const;
  /// Integral of the rent over [0, t].
  double accumulated(double t) const;

 private:
  std::vector<RentStep> steps_;
};

/// b / r clamped to [0, period]; period when the rent is zero.
double doa_off_time(double rent, double buy, double period);

/// P(t_off <= t) = (e^{(r/b)t} - 1) / (e - 1) on [0, b/r], 1 beyond.
double roa_off_cdf(double rent, double buy, double t);

/// Inverse of `roa_off_cdf`: (b/r) ln(1 + mu (e - 1)).
double roa_off_time(double rent, double buy, double mu);

/// OFF time for the last entry of a decreasing rent path, chosen so the rent
/// accumulated up to it equals `buy`. Throws DomainError on an invalid path or
/// on a step that arrives after the OFF time scheduled before it.
double adaptive_off_time(const RentHistory& history, double buy);

/// Incremental form of `adaptive_off_time` used while a period unfolds.
class AdaptiveOffTimer {
 public:
  AdaptiveOffTimer() = default;
  AdaptiveOffTimer(double initial_rent, double buy);

  /// Registers a rent observed at time t. Steps at or after the current OFF
  /// time, and rents that do not strictly decrease, are ignored. Returns true
  /// when the OFF time moved.
  bool observe(double t, double rent, double rel_tol = 1e-9);

  double off_time() const { return off_time_; }
  const RentHistory& history() const { return history_; }

 private:
  RentHistory history_;
  double buy_ = 0.0;
  double off_time_ = 0.0;
};

/// Effective OFF time when the whole rent path is known in advance.
double adaptive_effective_off_time(const RentHistory& path, double buy);

/// Same OFF time for every SBS.
double baseline_fixed(double t_fix, double period);

/// ON iff the stored energy exceeds k_percent of the capacity.
bool baseline_threshold(double e, double cap, double k_percent);

/// Realized cost when the SBS would be OFF at `t_off` and depletes at `u`:
/// r u if u < t_off, else r t_off + b.
double realized_cost(double rent, double buy, double t_off, double u);

enum class PolicyKind { Doa, Roa, Adaptive, Fixed, Threshold, Scheduled };

struct PolicySpec {
  PolicyKind kind = PolicyKind::Roa;
  double parameter = 0.0;        // t_fix for Fixed, K percent for Threshold
  std::vector<double> off_times;  // Scheduled only, per SBS; >= period means never

  /// "doa", "roa", "adaptive", "fixed:<t>", "threshold:<K>". Throws ConfigError.
  static PolicySpec parse(std::string_view text);
  static PolicySpec scheduled(std::vector<double> off_times);
  std::string to_string() const;
  bool operator==(const PolicySpec&) const = default;
};

}  // namespace skiswitch
