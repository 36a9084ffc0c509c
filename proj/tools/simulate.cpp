// Command-line front end: runs one experiment from a config file or preset.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "skiswitch/config.hpp"
#include "skiswitch/errors.hpp"
#include "skiswitch/experiment.hpp"

using namespace skiswitch;

namespace {

constexpr int kUsageError = 2;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulate ON/OFF scheduling of energy-harvesting small cells"};
  std::string config_path;
  std::string preset_name;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> runs;
  std::optional<std::size_t> threads;
  std::string algorithm;
  std::string out_dir;
  bool trace = false;
  bool print_config = false;
  bool list_presets = false;

  auto* config_opt = app.add_option("--config", config_path, "Experiment config file")->check(CLI::ExistingFile);
  app.add_option("--preset", preset_name, "Built-in experiment (fig3 ... fig11, obj-ue, ontime-ptx, theorem-demo)")
      ->excludes(config_opt);
  app.add_option("--seed", seed, "Master seed");
  app.add_option("--runs", runs, "Replications per sweep point");
  app.add_option("--algorithm", algorithm, "Single policy: doa | roa | adaptive | fixed:<t> | threshold:<K>");
  app.add_option("--out-dir", out_dir, "Output directory (default: $SKISWITCH_OUT_DIR or ./out)");
  app.add_option("--threads", threads, "Worker threads");
  app.add_flag("--trace", trace, "Also write a per-step trace.csv for replication 0");
  app.add_flag("--print-config", print_config, "Print the resolved config and exit");
  app.add_flag("--list-presets", list_presets, "List built-in presets and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  if (list_presets) {
    for (const std::string& name : preset_names()) std::cout << name << '\n';
    return 0;
  }

  try {
    if (config_path.empty() && preset_name.empty()) {
      std::cerr << "error: one of --config or --preset is required\n" << app.help();
      return kUsageError;
    }
    ExperimentSpec spec = config_path.empty() ? preset(preset_name) : parse_config(config_path);
    if (seed) {
      spec.seed = *seed;
      spec.base.seed = *seed;
    }
    if (runs) spec.replications = *runs;
    if (threads) spec.threads = *threads;
    if (!algorithm.empty()) {
      spec.policies = {PolicySpec::parse(algorithm)};
      spec.base.policy = spec.policies.front();
    }
    spec.validate();

    if (print_config) {
      std::cout << serialize(spec);
      return 0;
    }

    RunOptions options;
    options.trace = trace;
    if (!out_dir.empty()) {
      options.out_dir = out_dir;
    } else if (spec.out_dir) {
      options.out_dir = *spec.out_dir;
    } else if (const char* env = std::getenv("SKISWITCH_OUT_DIR"); env && *env) {
      options.out_dir = env;
    }
    run_experiment(spec, options);
    std::cout << "wrote results for '" << spec.name << "' to " << options.out_dir.string() << '\n';
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsageError;
  } catch (const BudgetExceeded& e) {
    std::cerr << "refused: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
