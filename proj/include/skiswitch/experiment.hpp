#pragma once

// Runs an ExperimentSpec and writes its result files.

#include <filesystem>
#include <string>
#include <vector>

#include "skiswitch/config.hpp"

namespace skiswitch {

struct RunOptions {
  std::filesystem::path out_dir = "out";
  bool trace = false;
};

/// Column names of results.csv, in order.
const std::vector<std::string>& results_columns();

/// Writes results.csv, aggregates.csv, summary.json and topology.json (plus
/// trace.csv with `trace`) for a sweep, or ratios.csv and summary.json for a
/// ratio study. Files appear atomically; on failure none of them are left behind.
void run_experiment(const ExperimentSpec& spec, const RunOptions& options);

}  // namespace skiswitch
