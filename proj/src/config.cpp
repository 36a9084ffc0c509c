#include "skiswitch/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "skiswitch/errors.hpp"

namespace skiswitch {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  while (true) {
    const auto comma = s.find(',');
    const std::string_view item = trim(s.substr(0, comma));
    if (!item.empty()) out.emplace_back(item);
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

// Shortest text that reads back to the same double.
std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text, std::string_view key) {
  text = trim(text);
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (text.empty() || ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw ConfigError(std::string(key), "expected a number, got '" + std::string(text) + "'");
  }
  return v;
}

std::uint64_t parse_count(std::string_view text, std::string_view key) {
  text = trim(text);
  std::uint64_t v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (text.empty() || ec != std::errc() || ptr != end) {
    throw ConfigError(std::string(key), "expected a non-negative integer, got '" + std::string(text) + "'");
  }
  return v;
}

struct KeyDef {
  std::function<void(ScenarioConfig&, std::string_view, std::string_view)> set;
  std::function<std::optional<std::string>(const ScenarioConfig&)> get;
};

template <class Field>
KeyDef number_key(Field field) {
  return {[field](ScenarioConfig& c, std::string_view v, std::string_view k) { field(c) = parse_double(v, k); },
          [field](const ScenarioConfig& c) -> std::optional<std::string> {
            return fmt(field(const_cast<ScenarioConfig&>(c)));
          }};
}

template <class Field>
KeyDef count_key(Field field) {
  return {[field](ScenarioConfig& c, std::string_view v, std::string_view k) {
            field(c) = static_cast<std::size_t>(parse_count(v, k));
          },
          [field](const ScenarioConfig& c) -> std::optional<std::string> {
            return std::to_string(field(const_cast<ScenarioConfig&>(c)));
          }};
}

template <class Field>
KeyDef power_key(Field field) {
  return {[field](ScenarioConfig& c, std::string_view v, std::string_view k) { field(c) = parse_power(v, k); },
          [field](const ScenarioConfig& c) -> std::optional<std::string> {
            return fmt(field(const_cast<ScenarioConfig&>(c))) + " W";
          }};
}

template <class Field>
KeyDef path_key(Field field) {
  return {[field](ScenarioConfig& c, std::string_view v, std::string_view) {
            v = trim(v);
            if (v.empty()) {
              field(c).reset();
            } else {
              field(c) = std::filesystem::path(std::string(v));
            }
          },
          [field](const ScenarioConfig& c) -> std::optional<std::string> {
            const auto& p = field(const_cast<ScenarioConfig&>(c));
            if (!p) return std::nullopt;
            return p->string();
          }};
}

const std::map<std::string, KeyDef, std::less<>>& scenario_keys() {
  static const std::map<std::string, KeyDef, std::less<>> keys = [] {
    std::map<std::string, KeyDef, std::less<>> k;
    using C = ScenarioConfig;
    k["scenario.period"] = number_key([](C& c) -> double& { return c.period; });
    k["scenario.dt"] = number_key([](C& c) -> double& { return c.dt; });
    k["scenario.horizon_periods"] = count_key([](C& c) -> std::size_t& { return c.horizon_periods; });
    k["scenario.cost_mode"] = {
        [](C& c, std::string_view v, std::string_view key) {
          v = trim(v);
          if (v == "original") {
            c.cost_mode = CostMode::Original;
          } else if (v == "frozen") {
            c.cost_mode = CostMode::Frozen;
          } else {
            throw ConfigError(std::string(key), "expected 'original' or 'frozen'");
          }
        },
        [](const C& c) -> std::optional<std::string> {
          return c.cost_mode == CostMode::Original ? "original" : "frozen";
        }};
    k["scenario.tie_rule"] = {
        [](C& c, std::string_view v, std::string_view key) {
          v = trim(v);
          if (v == "voluntary_first") {
            c.tie_rule = TieRule::VoluntaryFirst;
          } else if (v == "depletion_first") {
            c.tie_rule = TieRule::DepletionFirst;
          } else {
            throw ConfigError(std::string(key), "expected 'voluntary_first' or 'depletion_first'");
          }
        },
        [](const C& c) -> std::optional<std::string> {
          return c.tie_rule == TieRule::VoluntaryFirst ? "voluntary_first" : "depletion_first";
        }};

    k["topology.n_sbs"] = count_key([](C& c) -> std::size_t& { return c.n_sbs; });
    k["topology.n_ue"] = count_key([](C& c) -> std::size_t& { return c.n_ue; });
    k["topology.area_width"] = number_key([](C& c) -> double& { return c.area.width; });
    k["topology.area_height"] = number_key([](C& c) -> double& { return c.area.height; });
    k["topology.file"] = path_key([](C& c) -> std::optional<std::filesystem::path>& { return c.topology_file; });

    k["radio.mbs_tx_power"] = power_key([](C& c) -> double& { return c.radio.mbs_tx_power; });
    k["radio.sbs_tx_power"] = power_key([](C& c) -> double& { return c.radio.sbs_tx_power; });
    k["radio.mbs_op_power"] = power_key([](C& c) -> double& { return c.radio.mbs_op_power; });
    k["radio.sbs_op_power"] = power_key([](C& c) -> double& { return c.radio.sbs_op_power; });
    k["radio.noise_power"] = power_key([](C& c) -> double& { return c.radio.noise_power; });
    k["radio.mbs_bandwidth"] = number_key([](C& c) -> double& { return c.radio.mbs_bandwidth; });
    k["radio.sbs_bandwidth"] = number_key([](C& c) -> double& { return c.radio.sbs_bandwidth; });
    k["radio.mbs_max_users"] = count_key([](C& c) -> std::size_t& { return c.radio.mbs_max_users; });
    k["radio.sbs_max_users"] = count_key([](C& c) -> std::size_t& { return c.radio.sbs_max_users; });
    k["radio.sbs_tx_schedule"] = {
        [](C& c, std::string_view v, std::string_view key) {
          c.tx_schedule.clear();
          for (const std::string& item : split_list(v)) {
            const auto colon = item.find(':');
            if (colon == std::string::npos) {
              throw ConfigError(std::string(key), "expected entries of the form <seconds>: <power>");
            }
            c.tx_schedule.push_back({parse_double(std::string_view(item).substr(0, colon), key),
                                     parse_power(std::string_view(item).substr(colon + 1), key)});
          }
        },
        [](const C& c) -> std::optional<std::string> {
          std::string out;
          for (const TxPowerChange& t : c.tx_schedule) {
            if (!out.empty()) out += ", ";
            out += fmt(t.time) + ": " + fmt(t.sbs_tx_power) + " W";
          }
          return out;
        }};

    k["path_loss.mbs_intercept"] = number_key([](C& c) -> double& { return c.path_loss.mbs_intercept; });
    k["path_loss.mbs_slope"] = number_key([](C& c) -> double& { return c.path_loss.mbs_slope; });
    k["path_loss.sbs_intercept"] = number_key([](C& c) -> double& { return c.path_loss.sbs_intercept; });
    k["path_loss.sbs_slope"] = number_key([](C& c) -> double& { return c.path_loss.sbs_slope; });
    k["path_loss.min_distance"] = number_key([](C& c) -> double& { return c.path_loss.min_distance; });

    k["energy.rate"] = number_key([](C& c) -> double& { return c.harvest.rate; });
    k["energy.quantum"] = number_key([](C& c) -> double& { return c.harvest.quantum; });
    k["energy.q"] = number_key([](C& c) -> double& { return c.power.q; });
    k["energy.initial"] = number_key([](C& c) -> double& { return c.initial_energy; });
    k["energy.capacity"] = number_key([](C& c) -> double& { return c.capacity; });
    k["energy.trace_file"] =
        path_key([](C& c) -> std::optional<std::filesystem::path>& { return c.harvest_trace_file; });

    k["cost.alpha_d"] = number_key([](C& c) -> double& { return c.weights.alpha_d; });
    k["cost.alpha_p"] = number_key([](C& c) -> double& { return c.weights.alpha_p; });
    k["cost.alpha_b"] = number_key([](C& c) -> double& { return c.weights.alpha_b; });

    k["traffic.file_bits"] = number_key([](C& c) -> double& { return c.file_bits; });
    return k;
  }();
  return keys;
}

const std::vector<std::string>& experiment_keys() {
  static const std::vector<std::string> keys = {
      "experiment.name",    "experiment.kind",         "experiment.sweep_key", "experiment.sweep_values",
      "experiment.policies", "experiment.replications", "experiment.seed",      "experiment.out_dir",
      "experiment.threads", "experiment.grid_dt"};
  return keys;
}

void set_experiment_key(ExperimentSpec& spec, std::string_view key, std::string_view value) {
  const std::string_view v = trim(value);
  if (key == "experiment.name") {
    if (v.empty()) throw ConfigError(std::string(key), "must not be empty");
    spec.name = std::string(v);
  } else if (key == "experiment.kind") {
    if (v == "sweep") {
      spec.kind = ExperimentKind::Sweep;
    } else if (v == "cr_study") {
      spec.kind = ExperimentKind::CrStudy;
    } else {
      throw ConfigError(std::string(key), "expected 'sweep' or 'cr_study'");
    }
  } else if (key == "experiment.sweep_key") {
    spec.sweep_key = std::string(v);
  } else if (key == "experiment.sweep_values") {
    spec.sweep_values = split_list(v);
  } else if (key == "experiment.policies") {
    spec.policies.clear();
    for (const std::string& p : split_list(v)) spec.policies.push_back(PolicySpec::parse(p));
  } else if (key == "experiment.replications") {
    spec.replications = static_cast<std::size_t>(parse_count(v, key));
  } else if (key == "experiment.seed") {
    spec.seed = parse_count(v, key);
  } else if (key == "experiment.out_dir") {
    if (v.empty()) {
      spec.out_dir.reset();
    } else {
      spec.out_dir = std::filesystem::path(std::string(v));
    }
  } else if (key == "experiment.threads") {
    spec.threads = static_cast<std::size_t>(parse_count(v, key));
  } else if (key == "experiment.grid_dt") {
    spec.grid_dt = parse_double(v, key);
  }
}

}  // namespace

double parse_power(std::string_view text, std::string_view key) {
  text = trim(text);
  auto ends_with = [&](std::string_view suffix) {
    return text.size() >= suffix.size() && text.substr(text.size() - suffix.size()) == suffix;
  };
  if (ends_with("dBm")) return dbm_to_watts(parse_double(text.substr(0, text.size() - 3), key));
  if (ends_with("W")) {
    const double w = parse_double(text.substr(0, text.size() - 1), key);
    if (!(w > 0.0)) throw ConfigError(std::string(key), "power must be positive");
    return w;
  }
  throw ConfigError(std::string(key), "power needs a unit suffix (dBm or W), got '" + std::string(text) + "'");
}

bool is_scenario_key(std::string_view key) { return scenario_keys().count(key) > 0; }

void set_scenario_key(ScenarioConfig& cfg, std::string_view key, std::string_view value) {
  const auto it = scenario_keys().find(key);
  if (it == scenario_keys().end()) throw ConfigError(std::string(key), "unknown key");
  it->second.set(cfg, value, key);
}

void ExperimentSpec::validate() const {
  base.validate();
  if (replications < 1) throw ConfigError("experiment.replications", "must be at least 1");
  if (policies.empty()) throw ConfigError("experiment.policies", "at least one policy is required");
  for (const PolicySpec& p : policies) {
    if (p.kind == PolicyKind::Scheduled) {
      throw ConfigError("experiment.policies", "scheduled policies cannot be configured");
    }
    if (p.kind == PolicyKind::Fixed && p.parameter > base.period) {
      throw ConfigError("experiment.policies", "fixed OFF time exceeds the period");
    }
  }
  if (!sweep_key.empty()) {
    if (!is_scenario_key(sweep_key)) throw ConfigError("experiment.sweep_key", "unknown key '" + sweep_key + "'");
    if (sweep_values.empty()) throw ConfigError("experiment.sweep_values", "a sweep needs at least one value");
    for (const std::string& v : sweep_values) {
      ScenarioConfig probe = base;
      set_scenario_key(probe, sweep_key, v);
      probe.validate();
    }
  } else if (!sweep_values.empty()) {
    throw ConfigError("experiment.sweep_values", "values given without experiment.sweep_key");
  }
  if (kind == ExperimentKind::CrStudy) {
    if (!(grid_dt > 0.0)) throw ConfigError("experiment.grid_dt", "must be positive");
    const double ratio = grid_dt / base.dt;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * ratio || std::round(ratio) < 1.0) {
      throw ConfigError("experiment.grid_dt", "must be a multiple of scenario.dt");
    }
  }
}

ExperimentSpec parse_config_text(std::string_view text, const std::string& origin) {
  ExperimentSpec spec;
  std::map<std::string, std::size_t, std::less<>> seen;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = origin + ":" + std::to_string(line_no);
    if (eq == std::string_view::npos) throw ConfigError("", where + ": expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("", where + ": missing key");
    if (const auto prev = seen.find(key); prev != seen.end()) {
      throw ConfigError(key, where + ": duplicate key (first set on line " + std::to_string(prev->second) + ")");
    }
    seen.emplace(key, line_no);
    try {
      if (is_scenario_key(key)) {
        set_scenario_key(spec.base, key, value);
      } else if (std::find(experiment_keys().begin(), experiment_keys().end(), key) != experiment_keys().end()) {
        set_experiment_key(spec, key, value);
      } else {
        throw ConfigError(key, "unknown key");
      }
    } catch (const ConfigError& e) {
      throw ConfigError::located(where, e);
    }
  }
  spec.base.seed = spec.seed;
  if (!spec.policies.empty()) spec.base.policy = spec.policies.front();
  spec.validate();
  return spec;
}

ExperimentSpec parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  ExperimentSpec spec = parse_config_text(text.str(), path.string());
  const std::filesystem::path dir = path.parent_path();
  auto resolve = [&](std::optional<std::filesystem::path>& p) {
    if (p && p->is_relative()) p = dir / *p;
  };
  resolve(spec.base.topology_file);
  resolve(spec.base.harvest_trace_file);
  return spec;
}

std::string serialize(const ExperimentSpec& spec) {
  std::ostringstream out;
  out << "experiment.name = " << spec.name << '\n';
  out << "experiment.kind = " << (spec.kind == ExperimentKind::Sweep ? "sweep" : "cr_study") << '\n';
  if (!spec.sweep_key.empty()) {
    out << "experiment.sweep_key = " << spec.sweep_key << '\n';
    out << "experiment.sweep_values = ";
    for (std::size_t i = 0; i < spec.sweep_values.size(); ++i) out << (i ? ", " : "") << spec.sweep_values[i];
    out << '\n';
  }
  out << "experiment.policies = ";
  for (std::size_t i = 0; i < spec.policies.size(); ++i) out << (i ? ", " : "") << spec.policies[i].to_string();
  out << '\n';
  out << "experiment.replications = " << spec.replications << '\n';
  out << "experiment.seed = " << spec.seed << '\n';
  if (spec.out_dir) out << "experiment.out_dir = " << spec.out_dir->string() << '\n';
  out << "experiment.threads = " << spec.threads << '\n';
  out << "experiment.grid_dt = " << fmt(spec.grid_dt) << '\n';
  for (const auto& [key, def] : scenario_keys()) {
    if (const auto v = def.get(spec.base)) out << key << " = " << *v << '\n';
  }
  return out.str();
}

namespace {

struct Preset {
  const char* name;
  const char* text;
};

// Keys a preset omits keep the ScenarioConfig defaults.
const Preset kPresets[] = {
    {"fig3",
     "experiment.name = fig3\n"
     "experiment.policies = roa\n"
     "experiment.replications = 1\n"
     "topology.n_sbs = 15\n"
     "topology.n_ue = 30\n"},
    {"fig4",
     "experiment.name = fig4\n"
     "experiment.policies = roa, doa, fixed:7\n"
     "experiment.replications = 200\n"
     "experiment.sweep_key = topology.n_sbs\n"
     "experiment.sweep_values = 4, 6, 8\n"
     "topology.n_ue = 15\n"
     "energy.initial = 30\n"
     "cost.alpha_d = 0.05\n"
     "cost.alpha_p = 0.0001\n"
     "cost.alpha_b = 0.05\n"},
    {"fig5",
     "experiment.name = fig5\n"
     "experiment.policies = roa, doa, fixed:7\n"
     "experiment.replications = 200\n"
     "experiment.sweep_key = topology.n_sbs\n"
     "experiment.sweep_values = 2, 4, 6, 8, 10\n"
     "topology.n_ue = 30\n"},
    {"obj-ue",
     "experiment.name = obj-ue\n"
     "experiment.policies = roa, doa, fixed:7\n"
     "experiment.replications = 200\n"
     "experiment.sweep_key = topology.n_ue\n"
     "experiment.sweep_values = 10, 20, 30, 40\n"
     "topology.n_sbs = 6\n"},
    {"fig6",
     "experiment.name = fig6\n"
     "experiment.kind = cr_study\n"
     "experiment.policies = roa\n"
     "experiment.replications = 800\n"
     "experiment.grid_dt = 0.2\n"
     "scenario.dt = 0.2\n"
     "scenario.horizon_periods = 1\n"
     "topology.n_sbs = 3\n"
     "topology.n_ue = 15\n"},
    {"ontime-ptx",
     "experiment.name = ontime-ptx\n"
     "experiment.policies = roa\n"
     "experiment.replications = 200\n"
     "experiment.sweep_key = radio.sbs_tx_power\n"
     "experiment.sweep_values = 22 dBm, 23 dBm, 26 dBm\n"
     "topology.n_sbs = 6\n"
     "cost.alpha_p = 0\n"},
    {"fig7",
     "experiment.name = fig7\n"
     "experiment.policies = roa, doa, threshold:40, threshold:50\n"
     "experiment.replications = 200\n"
     "experiment.sweep_key = topology.n_sbs\n"
     "experiment.sweep_values = 2, 4, 6, 8\n"
     "scenario.horizon_periods = 1\n"},
    {"fig8",
     "experiment.name = fig8\n"
     "experiment.policies = roa\n"
     "experiment.replications = 200\n"
     "experiment.sweep_key = radio.sbs_tx_power\n"
     "experiment.sweep_values = 22 dBm, 23 dBm, 26 dBm\n"
     "topology.n_sbs = 6\n"
     "cost.alpha_p = 0\n"},
    {"fig9",
     "experiment.name = fig9\n"
     "experiment.policies = roa\n"
     "experiment.replications = 200\n"
     "experiment.sweep_key = radio.sbs_op_power\n"
     "experiment.sweep_values = 10 W, 15 W, 20 W\n"
     "cost.alpha_d = 0\n"},
    {"fig10",
     "experiment.name = fig10\n"
     "experiment.policies = roa\n"
     "experiment.replications = 200\n"
     "experiment.sweep_key = radio.mbs_op_power\n"
     "experiment.sweep_values = 20 W, 30 W, 40 W\n"
     "cost.alpha_d = 0\n"},
    {"fig11",
     "experiment.name = fig11\n"
     "experiment.policies = roa\n"
     "experiment.replications = 200\n"
     "experiment.sweep_key = energy.initial\n"
     "experiment.sweep_values = 20, 40, 60\n"
     "cost.alpha_b = 0.15\n"},
    {"theorem-demo",
     "experiment.name = theorem-demo\n"
     "experiment.policies = adaptive, roa, doa\n"
     "experiment.replications = 200\n"
     "scenario.horizon_periods = 1\n"
     "topology.n_sbs = 1\n"
     "topology.n_ue = 10\n"
     "cost.alpha_p = 0.0001\n"
     "radio.sbs_tx_schedule = 0: 23 dBm, 1: 25 dBm, 3: 27 dBm, 5: 29 dBm\n"},
};

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const Preset& p : kPresets) names.emplace_back(p.name);
  return names;
}

std::string preset_text(std::string_view name) {
  for (const Preset& p : kPresets) {
    if (name == p.name) return p.text;
  }
  std::string known;
  for (const Preset& p : kPresets) known += std::string(known.empty() ? "" : ", ") + p.name;
  throw ConfigError("preset", "unknown preset '" + std::string(name) + "' (known: " + known + ")");
}

ExperimentSpec preset(std::string_view name) {
  return parse_config_text(preset_text(name), "preset " + std::string(name));
}

}  // namespace skiswitch
