#pragma once

// Run configuration: a scenario document plus its optional `optimizer` and
// `numerics` blocks.

#include <cstdint>
#include <optional>
#include <string>

#include "cumdamage/direct.hpp"
#include "cumdamage/optimize.hpp"
#include "cumdamage/scenario.hpp"

namespace cumdamage::cli {

struct OptimizerSettings {
  std::optional<Range> T;
  std::optional<IntRange> N;
  std::optional<Range> Z;
  GridConfig grid;
  AnnealConfig anneal;
  std::uint64_t reps = 10000;
  std::uint64_t final_reps = 100000;
};

struct RunConfig {
  Scenario scenario;
  OptimizerSettings optimizer;
  direct::NumericsConfig numerics;
  /// Canonical text of everything above, for the manifest hash.
  std::string canonical;
};

RunConfig parse_run_config(const std::string& document);
RunConfig load_run_config(const std::string& path);

/// Default bounds for the requested axes, overridden by the optimizer block.
SearchSpace search_space_for(const RunConfig& config, bool T, bool N, bool Z);

}  // namespace cumdamage::cli
