#pragma once

#include <cstdint>
#include <string>

namespace pcf::experiments {

struct ExperimentOptions {
  double scale = 1.0;  // multiplies the desk-scale sample counts
  std::uint64_t seed = 0;
  std::string out_dir;  // when nonempty, metrics.json and CSV artifacts land here
  int n_workers = 4;
};

/// Runs one of {pwa, quadratic, battery, adp} end to end: generate data, fit
/// with the experiment's settings, score on a fresh test set, and (for adp)
/// close the loop. Returns the metrics JSON text.
std::string run_experiment(const std::string& name, const ExperimentOptions& opts = {});

}  // namespace pcf::experiments
