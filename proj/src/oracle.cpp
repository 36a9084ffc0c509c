#include "skiswitch/oracle.hpp"

#include <cmath>
#include <limits>

#include "skiswitch/errors.hpp"

namespace skiswitch {

namespace {

struct Search {
  explicit Search(const PeriodSimulator& s) : sim(s) {}

  const PeriodSimulator& sim;
  std::size_t stride = 1;  // simulation steps per grid point
  std::vector<std::size_t> used;
  std::vector<std::vector<PeriodSimulator::State>> scratch;  // per depth
  std::vector<double> current;
  double best_cost = std::numeric_limits<double>::infinity();
  std::vector<double> best_times;
  std::uint64_t leaves = 0;

  bool pending(const PeriodSimulator::State& s, std::size_t i) const {
    return s.on[i] && !s.latched[i] && s.depleted_at[i] < 0.0;
  }

  // Off times come from the state once the period is over.
  void leaf(const PeriodSimulator::State& s) {
    ++leaves;
    if (!(s.cost < best_cost)) return;
    best_cost = s.cost;
    for (std::size_t i = 0; i < current.size(); ++i) {
      current[i] = s.off_time[i] >= 0.0 ? s.off_time[i] : sim.period_length();
    }
    best_times = current;
  }

  // Runs from a grid point to the next one (or the end) with the given wishes.
  void descend(PeriodSimulator::State& s, std::vector<char>& want, std::size_t depth) {
    const std::size_t n = sim.num_steps();
    const std::size_t stop = std::min(n, s.step + stride);
    while (s.step < stop) {
      sim.advance(s, want);
      if (s.cost > best_cost) return;
    }
    if (s.step >= n) {
      leaf(s);
      return;
    }
    branch(s, depth + 1);
  }

  void branch(const PeriodSimulator::State& s, std::size_t depth) {
    std::vector<std::size_t> open;
    for (std::size_t i : used) {
      if (pending(s, i)) open.push_back(i);
    }
    auto& pool = scratch.at(depth);
    if (pool.empty()) pool.resize(1);
    const std::size_t J = sim.num_sbs();
    // Subsets in lexicographic order of OFF times: switching an SBS OFF now
    // sorts before keeping it ON, earlier SBSs first.
    const std::uint64_t subsets = std::uint64_t{1} << open.size();
    for (std::uint64_t c = 0; c < subsets; ++c) {
      std::vector<char> want(J, 1);
      for (std::size_t b = 0; b < open.size(); ++b) {
        const bool off_now = !((c >> (open.size() - 1 - b)) & 1U);
        if (off_now) want[open[b]] = 0;
      }
      pool[0] = s;
      descend(pool[0], want, depth);
    }
  }
};

}  // namespace

OracleResult offline_exhaustive(const PeriodSimulator& sim, double grid_dt, std::uint64_t budget) {
  const double dt = sim.dt();
  const double ratio = grid_dt / dt;
  if (!(grid_dt > 0.0) || std::abs(ratio - std::round(ratio)) > 1e-9 * ratio || std::round(ratio) < 1.0) {
    throw DomainError("grid_dt must be a positive multiple of the simulation step");
  }
  const double grid_points = sim.period_length() / grid_dt;
  if (std::abs(grid_points - std::round(grid_points)) > 1e-9 * grid_points) {
    throw DomainError("grid_dt must divide the period");
  }

  if (sim.config().policy.kind == PolicyKind::Threshold) {
    throw DomainError("the oracle needs a simulator whose OFF decisions latch");
  }
  Search search(sim);
  search.scratch.resize(static_cast<std::size_t>(std::llround(grid_points)) + 2);
  search.stride = static_cast<std::size_t>(std::llround(ratio));
  const PeriodSimulator::State& init = sim.initial_state();
  for (std::size_t i = 0; i < sim.num_sbs(); ++i) {
    if (sim.prices()[i].used) search.used.push_back(i);
  }

  OracleResult result;
  const auto base = static_cast<std::uint64_t>(std::llround(grid_points)) + 1;
  const double required = std::pow(static_cast<double>(base), static_cast<double>(search.used.size()));
  if (required > static_cast<double>(budget)) {
    const double cap = static_cast<double>(std::numeric_limits<std::uint64_t>::max());
    throw BudgetExceeded(required >= cap ? std::numeric_limits<std::uint64_t>::max()
                                         : static_cast<std::uint64_t>(required),
                         budget);
  }
  std::uint64_t nominal = 1;
  for (std::size_t k = 0; k < search.used.size(); ++k) nominal *= base;
  result.nominal_evaluations = nominal;

  search.current.assign(sim.num_sbs(), sim.period_length());
  if (sim.num_steps() == 0) {
    result.off_times = search.current;
    return result;
  }
  search.branch(init, 0);
  result.cost = search.best_cost;
  result.off_times = search.best_times;
  result.visited_leaves = search.leaves;
  return result;
}

}  // namespace skiswitch
