#pragma once

// Table and case-study reproduction: recomputes published optima and cost
// rates and lays them side by side with the printed values.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "output.hpp"

namespace cumdamage::cli {

struct ReproRow {
  std::string table;
  std::string scenario;
  double c_K = 0.0;
  std::string method;
  std::string quantity;
  std::optional<double> published;
  double computed = 0.0;
  std::optional<double> tolerance;
  /// One-sided check: computed <= published + tolerance.
  bool upper_bound = false;

  /// Empty when there is nothing to compare against.
  std::optional<bool> within() const;
};

struct ReproBundle {
  std::vector<ReproRow> rows;
  /// Extra named CSV files (sweep data behind the case-study figures).
  std::vector<std::pair<std::string, CsvTable>> extras;
};

struct ReproOptions {
  std::string scenario_dir;
  std::uint64_t seed = 1;
  std::size_t workers = 1;
  /// Bank size for simulation-backed optimization.
  std::uint64_t reps = 10000;
  /// Replications for policy evaluations and final re-evaluations.
  std::uint64_t final_reps = 100000;
};

const std::vector<std::string>& reproduce_targets();

/// Throws ValidationError for an unknown target.
ReproBundle reproduce(const std::string& target, const ReproOptions& options);

CsvTable repro_table(const ReproBundle& bundle);

}  // namespace cumdamage::cli
