#pragma once

#include "wedgescope/serialization.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace wedge {

struct ExperimentContext {
  std::optional<std::filesystem::path> output_dir;  // overrides config "output_dir"
  std::optional<std::uint64_t> seed;                // overrides config "seed"
  int jobs = 1;
  bool quiet = true;
};

struct ExperimentResult {
  Json resolved_config;
  Json summary;
};

/// Names accepted by run_experiment, in usage order.
const std::vector<std::string>& experiment_names();

/// Parses `config` strictly, runs the named experiment, writes its files plus
/// resolved_config.json into the output directory and returns a summary.
ExperimentResult run_experiment(const std::string& name, const Json& config,
                                const ExperimentContext& ctx);

}  // namespace wedge
