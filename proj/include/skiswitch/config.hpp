#pragma once

// Experiment description files: flat `key = value` lines with dotted
// namespaces, `#` comments, and explicit units on power values.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "skiswitch/engine.hpp"

namespace skiswitch {

enum class ExperimentKind { Sweep, CrStudy };

struct ExperimentSpec {
  std::string name = "experiment";
  ExperimentKind kind = ExperimentKind::Sweep;
  ScenarioConfig base;
  std::string sweep_key;                // empty: a single point
  std::vector<std::string> sweep_values;
  std::vector<PolicySpec> policies = {PolicySpec{}};
  std::size_t replications = 100;
  std::uint64_t seed = 1;
  std::optional<std::filesystem::path> out_dir;
  std::size_t threads = 1;
  double grid_dt = 0.2;  // oracle grid for cr_study

  void validate() const;
  bool operator==(const ExperimentSpec&) const = default;
};

/// Parses a config document. Omitted keys keep their defaults. Errors carry the
/// offending key and, where known, the line number.
ExperimentSpec parse_config_text(std::string_view text, const std::string& origin = "<config>");
ExperimentSpec parse_config(const std::filesystem::path& path);

/// Writes every key, so that parse_config_text(serialize(s)) == s.
std::string serialize(const ExperimentSpec& spec);

/// Sets one scenario key (`radio.sbs_tx_power`, `topology.n_sbs`, ...) from its text form.
void set_scenario_key(ScenarioConfig& cfg, std::string_view key, std::string_view value);
bool is_scenario_key(std::string_view key);

/// Power with a unit suffix: "23 dBm", "23dBm", "10 W", "0.5W". Returns watts.
double parse_power(std::string_view text, std::string_view key);

/// Built-in experiment definitions (fig3 ... fig11, obj-ue, ontime-ptx, theorem-demo).
std::vector<std::string> preset_names();
ExperimentSpec preset(std::string_view name);
std::string preset_text(std::string_view name);

}  // namespace skiswitch
