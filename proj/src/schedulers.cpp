#include "skiswitch/schedulers.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

#include "skiswitch/errors.hpp"

namespace skiswitch {

namespace {

constexpr double kE = std::numbers::e;

void check_step(const std::vector<RentStep>& steps, const RentStep& next) {
  if (!(next.rent >= 0.0) || !std::isfinite(next.rent)) throw DomainError("rent must be finite and non-negative");
  if (steps.empty()) {
    if (next.t != 0.0) throw DomainError("rent path must start at t = 0");
    return;
  }
  if (!(next.t > steps.back().t)) throw DomainError("rent step times must strictly increase");
  if (!(next.rent < steps.back().rent)) throw DomainError("rent steps must strictly decrease");
}

double parse_number(std::string_view text, std::string_view what) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw ConfigError("algorithm", "bad " + std::string(what) + " '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

RentHistory::RentHistory(std::vector<RentStep> steps) {
  for (const RentStep& s : steps) push(s);
}

void RentHistory::push(RentStep step) {
  check_step(steps_, step);
  steps_.push_back(step);
}

double RentHistory::rent_at(double t) const {
  if (steps_.empty()) return 0.0;
  auto it = std::upper_bound(steps_.begin(), steps_.end(), t,
                             [](double x, const RentStep& s) { return x < s.t; });
  return it == steps_.begin() ? steps_.front().rent : std::prev(it)->rent;
}

double RentHistory::accumulated(double t) const {
  double total = 0.0;
  for (std::size_t k = 0; k < steps_.size(); ++k) {
    const double begin = steps_[k].t;
    if (t <= begin) break;
    const double end = k + 1 < steps_.size() ? std::min(t, steps_[k + 1].t) : t;
    total += steps_[k].rent * (end - begin);
  }
  return total;
}

double doa_off_time(double rent, double buy, double period) {
  if (rent < 0.0 || buy < 0.0) throw DomainError("rent and buy must be non-negative");
  if (rent == 0.0) return period;
  return std::clamp(buy / rent, 0.0, period);
}

double roa_off_cdf(double rent, double buy, double t) {
  if (!(rent > 0.0) || !(buy > 0.0)) throw DomainError("ROA needs positive rent and buy");
  const double horizon = buy / rent;
  if (t <= 0.0) return 0.0;
  if (t >= horizon) return 1.0;
  return std::expm1(t / horizon) / (kE - 1.0);
}

double roa_off_time(double rent, double buy, double mu) {
  if (!(rent > 0.0) || !(buy > 0.0)) throw DomainError("ROA needs positive rent and buy");
  if (mu < 0.0 || mu > 1.0) throw DomainError("mu must lie in [0, 1]");
  const double horizon = buy / rent;
  return std::min(horizon, horizon * std::log1p(mu * (kE - 1.0)));
}

double adaptive_off_time(const RentHistory& history, double buy) {
  const auto& steps = history.steps();
  if (steps.empty()) throw DomainError("rent history is empty");
  if (!(steps.front().rent > 0.0)) throw DomainError("adaptive rule needs positive rent");
  // Partial sum of t_(v')(r_(v') - r_(v'+1)); also tracks the OFF time of every prefix.
  double weighted = 0.0;
  double off = buy / steps.front().rent;
  for (std::size_t v = 1; v < steps.size(); ++v) {
    if (!(steps[v].t < off)) throw DomainError("rent step arrives after the scheduled OFF time");
    if (!(steps[v].rent > 0.0)) throw DomainError("adaptive rule needs positive rent");
    weighted += steps[v].t * (steps[v - 1].rent - steps[v].rent);
    off = (buy - weighted) / steps[v].rent;
  }
  return off;
}

AdaptiveOffTimer::AdaptiveOffTimer(double initial_rent, double buy)
    : history_({{0.0, initial_rent}}), buy_(buy), off_time_(adaptive_off_time(history_, buy)) {}

bool AdaptiveOffTimer::observe(double t, double rent, double rel_tol) {
  if (history_.empty() || !(t < off_time_) || !(t > history_.steps().back().t)) return false;
  const double last = history_.steps().back().rent;
  if (!(rent > 0.0) || !(rent < last - rel_tol * last)) return false;
  history_.push({t, rent});
  off_time_ = adaptive_off_time(history_, buy_);
  return true;
}

double adaptive_effective_off_time(const RentHistory& path, double buy) {
  if (path.empty()) throw DomainError("rent history is empty");
  AdaptiveOffTimer timer(path.steps().front().rent, buy);
  for (std::size_t v = 1; v < path.size(); ++v) timer.observe(path.steps()[v].t, path.steps()[v].rent, 0.0);
  return timer.off_time();
}

double baseline_fixed(double t_fix, double period) {
  if (t_fix < 0.0 || t_fix > period) throw DomainError("fixed OFF time must lie in [0, period]");
  return t_fix;
}

bool baseline_threshold(double e, double cap, double k_percent) {
  if (!(cap > 0.0)) throw ConfigError("energy.capacity", "capacity must be positive");
  return 100.0 * e / cap > k_percent;
}

double realized_cost(double rent, double buy, double t_off, double u) {
  return u < t_off ? rent * u : rent * t_off + buy;
}

PolicySpec PolicySpec::parse(std::string_view text) {
  PolicySpec spec;
  const auto colon = text.find(':');
  const std::string_view name = text.substr(0, colon);
  const std::string_view arg = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
  const bool has_arg = colon != std::string_view::npos;
  if (name == "doa" || name == "roa" || name == "adaptive") {
    if (has_arg) throw ConfigError("algorithm", "'" + std::string(name) + "' takes no parameter");
    spec.kind = name == "doa" ? PolicyKind::Doa : name == "roa" ? PolicyKind::Roa : PolicyKind::Adaptive;
  } else if (name == "fixed") {
    if (!has_arg) throw ConfigError("algorithm", "expected fixed:<seconds>");
    spec.kind = PolicyKind::Fixed;
    spec.parameter = parse_number(arg, "fixed OFF time");
    if (spec.parameter < 0.0) throw ConfigError("algorithm", "fixed OFF time must be non-negative");
  } else if (name == "threshold") {
    if (!has_arg) throw ConfigError("algorithm", "expected threshold:<percent>");
    spec.kind = PolicyKind::Threshold;
    spec.parameter = parse_number(arg, "threshold");
    if (spec.parameter < 0.0 || spec.parameter > 100.0) {
      throw ConfigError("algorithm", "threshold must lie in [0, 100]");
    }
  } else {
    throw ConfigError("algorithm", "unknown policy '" + std::string(text) +
                                       "' (expected doa, roa, adaptive, fixed:<t> or threshold:<K>)");
  }
  return spec;
}

PolicySpec PolicySpec::scheduled(std::vector<double> off_times) {
  PolicySpec spec;
  spec.kind = PolicyKind::Scheduled;
  spec.off_times = std::move(off_times);
  return spec;
}

std::string PolicySpec::to_string() const {
  std::ostringstream out;
  out.precision(17);
  switch (kind) {
    case PolicyKind::Doa: return "doa";
    case PolicyKind::Roa: return "roa";
    case PolicyKind::Adaptive: return "adaptive";
    case PolicyKind::Fixed: out << "fixed:" << parameter; break;
    case PolicyKind::Threshold: out << "threshold:" << parameter; break;
    case PolicyKind::Scheduled: out << "scheduled"; break;
  }
  return out.str();
}

}  // namespace skiswitch
