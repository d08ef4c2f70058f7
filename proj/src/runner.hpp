#pragma once

#include <string>
#include <vector>

#include "config.hpp"

// Executes a run configuration and writes the artifact set into
// config.output_dir:
//
//   manifest.txt     version line, command, seed, and the config-json line
//                    (re-feeding a manifest to the loader reproduces the run)
//   summary.txt      key=value digest of the run
//   <command>.csv    command-specific tables (path.csv, trajectory.csv, ...)
//   plot_*.py        matplotlib scripts, only with emit_plots
//
// Outputs carry no timestamps or machine identifiers: a rerun of the same
// config produces byte-identical data files for any worker count.

namespace tvar {

struct RunResult {
  std::string output_dir;
  std::vector<std::string> files;  // relative names, in write order
  std::string summary_text;        // contents of summary.txt
};

RunResult execute_run(const RunConfig& config);

}  // namespace tvar
