#include "skiswitch/experiment.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <system_error>

#include "skiswitch/analysis.hpp"
#include "skiswitch/errors.hpp"
#include "skiswitch/parallel.hpp"

namespace skiswitch {

namespace {

// Shortest text that reads back to the same double.
std::string num(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

/// Collects output files under temporary names and renames them on commit.
class OutputSet {
 public:
  explicit OutputSet(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + dir_.string() + ": " + ec.message());
  }
  ~OutputSet() {
    if (committed_) return;
    for (const auto& [tmp, _] : files_) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
    }
  }
  OutputSet(const OutputSet&) = delete;
  OutputSet& operator=(const OutputSet&) = delete;

  void write(const std::string& name, const std::string& content) {
    const auto final_path = dir_ / name;
    const auto tmp = dir_ / ("." + name + ".tmp");
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    files_.emplace_back(tmp, final_path);
    out << content;
    out.close();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }

  void commit() {
    for (const auto& [tmp, final_path] : files_) {
      std::error_code ec;
      std::filesystem::rename(tmp, final_path, ec);
      if (ec) throw std::runtime_error("cannot move " + tmp.string() + " to " + final_path.string() + ": " + ec.message());
    }
    committed_ = true;
  }

 private:
  std::filesystem::path dir_;
  std::vector<std::pair<std::filesystem::path, std::filesystem::path>> files_;
  bool committed_ = false;
};

struct Stat {
  double mean = 0.0;
  double ci95 = 0.0;
};

Stat stat_of(const std::vector<double>& xs) {
  Stat s;
  if (xs.empty()) return s;
  const double n = static_cast<double>(xs.size());
  for (double x : xs) s.mean += x;
  s.mean /= n;
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.ci95 = 1.96 * std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  return s;
}

nlohmann::json price_json(const std::vector<PeriodResult>& periods, double period_length) {
  nlohmann::json out = nlohmann::json::array();
  for (const PeriodResult& p : periods) {
    for (const SbsPeriodResult& s : p.sbs) {
      out.push_back({{"period", p.period}, {"sbs", s.sbs}, {"rent", s.rent}, {"buy", s.buy}, {"used", s.used},
                     {"frozen_at", static_cast<double>(p.period) * period_length}});
    }
  }
  return out;
}

struct Group {
  std::string sweep_value;
  PolicySpec policy;
  ScenarioConfig cfg;
  std::vector<std::vector<PeriodResult>> runs;  // per replication
};

void run_sweep(const ExperimentSpec& spec, const RunOptions& options, OutputSet& out) {
  std::vector<std::string> values = spec.sweep_values;
  if (spec.sweep_key.empty()) values = {""};

  std::vector<Group> groups;
  for (const std::string& v : values) {
    ScenarioConfig cfg = spec.base;
    cfg.seed = spec.seed;
    if (!spec.sweep_key.empty()) set_scenario_key(cfg, spec.sweep_key, v);
    for (const PolicySpec& p : spec.policies) {
      Group g{v, p, cfg, {}};
      g.cfg.policy = p;
      g.cfg.validate();
      g.runs.resize(spec.replications);
      groups.push_back(std::move(g));
    }
  }

  std::ostringstream trace;
  if (options.trace) trace << "sweep_value,policy,t,sbs_id,sigma,energy,assoc_count,rent_rate\n";

  // One replication draw serves every policy at a sweep value.
  const std::size_t per_value = spec.policies.size();
  for (std::size_t v = 0; v < values.size(); ++v) {
    const ScenarioConfig& cfg = groups[v * per_value].cfg;
    parallel_for(spec.replications, spec.threads, [&](std::size_t r) {
      const Replication rep = make_replication(cfg, spec.seed, r);
      for (std::size_t p = 0; p < per_value; ++p) {
        Group& g = groups[v * per_value + p];
        g.runs[r] = run_horizon(g.cfg, rep);
      }
    });
    if (options.trace) {
      const Replication rep = make_replication(cfg, spec.seed, 0);
      for (std::size_t p = 0; p < per_value; ++p) {
        const Group& g = groups[v * per_value + p];
        const std::string prefix = csv_field(g.sweep_value) + "," + csv_field(g.policy.to_string()) + ",";
        const StepObserver obs = [&](const StepRecord& s) {
          trace << prefix << num(s.t) << ',' << s.sbs_id << ',' << (s.sigma ? 1 : 0) << ',' << num(s.energy) << ','
                << s.assoc_count << ',' << num(s.rent_rate) << '\n';
        };
        run_horizon(g.cfg, rep, &obs);
      }
    }
  }

  std::ostringstream results;
  const auto& cols = results_columns();
  for (std::size_t c = 0; c < cols.size(); ++c) results << (c ? "," : "") << cols[c];
  results << '\n';

  nlohmann::json summary;
  summary["name"] = spec.name;
  summary["kind"] = "sweep";
  summary["seed"] = spec.seed;
  summary["replications"] = spec.replications;
  summary["sweep_key"] = spec.sweep_key;
  summary["config"] = serialize(spec);
  summary["groups"] = nlohmann::json::array();

  std::ostringstream aggregates;
  aggregates << "sweep_key,sweep_value,policy,replications,total_cost_mean,total_cost_ci95,rent_cost_mean,"
                "buy_count_mean,mean_on_time_mean,switch_count_mean,unused_sbs_fraction_mean,"
                "energy_consumed_mean,delay_per_sbs_mean\n";

  for (const Group& g : groups) {
    std::map<std::string, std::vector<double>> per_rep;
    for (std::size_t r = 0; r < g.runs.size(); ++r) {
      double total = 0.0, rent = 0.0, buys = 0.0, on = 0.0, sw = 0.0, unused = 0.0, energy = 0.0, delay = 0.0;
      for (const PeriodResult& p : g.runs[r]) {
        results << csv_field(spec.sweep_key) << ',' << csv_field(g.sweep_value) << ',' << csv_field(g.policy.to_string())
                << ',' << r << ',' << p.period << ',' << num(p.total_cost) << ',' << num(p.rent_cost) << ','
                << p.buy_count << ',' << p.used_sbs << ',' << num(p.unused_sbs_fraction) << ','
                << num(p.mean_on_time) << ',' << p.switch_count << ',' << p.depleted_count << ','
                << num(p.energy_consumed) << ',' << num(p.energy_harvested) << ',' << num(p.delay_per_sbs) << '\n';
        total += p.total_cost;
        rent += p.rent_cost;
        buys += static_cast<double>(p.buy_count);
        on += p.mean_on_time;
        sw += static_cast<double>(p.switch_count);
        unused += p.unused_sbs_fraction;
        energy += p.energy_consumed;
        delay += p.delay_per_sbs;
      }
      const double n_periods = static_cast<double>(g.runs[r].size());
      per_rep["total_cost"].push_back(total);
      per_rep["rent_cost"].push_back(rent);
      per_rep["buy_count"].push_back(buys);
      per_rep["mean_on_time"].push_back(on / n_periods);
      per_rep["switch_count"].push_back(sw);
      per_rep["unused_sbs_fraction"].push_back(unused / n_periods);
      per_rep["energy_consumed"].push_back(energy);
      per_rep["delay_per_sbs"].push_back(delay / n_periods);
    }
    nlohmann::json group;
    group["sweep_value"] = g.sweep_value;
    group["policy"] = g.policy.to_string();
    nlohmann::json metrics;
    for (const auto& [name, xs] : per_rep) {
      const Stat s = stat_of(xs);
      metrics[name] = {{"mean", s.mean}, {"ci95", s.ci95}};
    }
    group["metrics"] = metrics;
    group["price_tags"] = price_json(g.runs.front(), g.cfg.period);
    summary["groups"].push_back(group);

    const Stat total = stat_of(per_rep["total_cost"]);
    aggregates << csv_field(spec.sweep_key) << ',' << csv_field(g.sweep_value) << ','
               << csv_field(g.policy.to_string()) << ',' << g.runs.size() << ',' << num(total.mean) << ','
               << num(total.ci95) << ',' << num(stat_of(per_rep["rent_cost"]).mean) << ','
               << num(stat_of(per_rep["buy_count"]).mean) << ',' << num(stat_of(per_rep["mean_on_time"]).mean)
               << ',' << num(stat_of(per_rep["switch_count"]).mean) << ','
               << num(stat_of(per_rep["unused_sbs_fraction"]).mean) << ','
               << num(stat_of(per_rep["energy_consumed"]).mean) << ','
               << num(stat_of(per_rep["delay_per_sbs"]).mean) << '\n';
  }

  out.write("results.csv", results.str());
  out.write("aggregates.csv", aggregates.str());
  out.write("summary.json", summary.dump(2) + "\n");
  const Replication first = make_replication(groups.front().cfg, spec.seed, 0);
  out.write("topology.json", topology_to_json(first.topology).dump(2) + "\n");
  if (options.trace) out.write("trace.csv", trace.str());
}

void run_cr_study(const ExperimentSpec& spec, OutputSet& out) {
  ScenarioConfig cfg = spec.base;
  cfg.seed = spec.seed;
  std::vector<CrRecord> records;
  const RatioReport report = empirical_cr_study(cfg, spec.replications, spec.grid_dt, spec.seed, &records,
                                                spec.threads);

  auto join = [](const std::vector<double>& xs) {
    std::string s;
    for (double x : xs) s += (s.empty() ? "" : " ") + num(x);
    return s;
  };
  std::ostringstream csv;
  csv << "replication,online_cost,optimal_cost,ratio,online_off_times,optimal_off_times\n";
  for (const CrRecord& r : records) {
    csv << r.replication << ',' << num(r.online_cost) << ',' << num(r.optimal_cost) << ','
        << (std::isnan(r.ratio) ? std::string("") : num(r.ratio)) << ',' << join(r.online_off_times) << ','
        << join(r.optimal_off_times) << '\n';
  }

  nlohmann::json summary;
  summary["name"] = spec.name;
  summary["kind"] = "cr_study";
  summary["seed"] = spec.seed;
  summary["replications"] = spec.replications;
  summary["grid_dt"] = spec.grid_dt;
  summary["config"] = serialize(spec);
  summary["kept"] = report.ratios.size();
  summary["degenerate"] = report.degenerate;
  summary["median"] = report.median;
  summary["worst"] = report.worst;
  summary["mean"] = report.mean;
  summary["min"] = report.min;
  if (report.ci_half_width) summary["ci95"] = *report.ci_half_width;

  out.write("ratios.csv", csv.str());
  out.write("summary.json", summary.dump(2) + "\n");
  const Replication first = make_replication(cfg, spec.seed, 0);
  out.write("topology.json", topology_to_json(first.topology).dump(2) + "\n");
}

}  // namespace

const std::vector<std::string>& results_columns() {
  static const std::vector<std::string> cols = {
      "sweep_key",       "sweep_value",   "policy",         "replication",    "period",
      "total_cost",      "rent_cost",     "buy_count",      "used_sbs",       "unused_sbs_fraction",
      "mean_on_time",    "switch_count",  "depleted_count", "energy_consumed", "energy_harvested",
      "delay_per_sbs"};
  return cols;
}

void run_experiment(const ExperimentSpec& spec, const RunOptions& options) {
  spec.validate();
  OutputSet out(options.out_dir);
  if (spec.kind == ExperimentKind::CrStudy) {
    run_cr_study(spec, out);
  } else {
    run_sweep(spec, options, out);
  }
  out.commit();
}

}  // namespace skiswitch
