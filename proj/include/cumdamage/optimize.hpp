#pragma once

// Policy optimization: coarse-to-fine grid search and simulated annealing
// over the active components of (T, N, Z).

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cumdamage/direct.hpp"
#include "cumdamage/scenario.hpp"
#include "cumdamage/simulate.hpp"

namespace cumdamage {

struct Range {
  double low;
  double high;
};

struct IntRange {
  std::uint32_t low;
  std::uint32_t high;
};

/// Bounds on the active policy components. With a strength curve attached,
/// candidates must also satisfy Z <= K(T).
struct SearchSpace {
  std::optional<Range> T;
  std::optional<IntRange> N;
  std::optional<Range> Z;
  std::optional<StrengthCurve> strength;

  /// Throws ValidationError on empty or inverted ranges or Z above K(0).
  void validate() const;
  bool feasible(const Policy& policy) const;
};

/// T in [0.1, 50] mean inter-arrival times, N in [1, 200], Z in
/// [0.05, 1] K(0), for the requested axes.
SearchSpace default_search_space(const Scenario& scenario, bool T, bool N, bool Z);

using Objective = std::function<double(const Policy&)>;

struct TraceEntry {
  Policy policy;
  double value;
  bool accepted;
};

enum class Method { Grid, Anneal };

std::string method_name(Method method);

struct OptimResult {
  Policy best_policy;
  double best_value = 0.0;
  std::uint64_t evaluations = 0;
  std::vector<TraceEntry> trace;
  Method method = Method::Grid;
  std::uint64_t seed = 0;
  /// Best value of the first grid pass (grid search only).
  std::optional<double> coarse_best;
};

struct GridConfig {
  std::uint32_t coarse_points = 60;
  std::uint32_t refine_factor = 10;
  std::uint32_t passes = 3;
  /// Cells of one pass evaluated concurrently; the objective must then be
  /// thread-safe.
  std::size_t workers = 1;
};

/// Ties go to the lexicographically smaller (T, N, Z). Throws
/// InfeasibleSpaceError when no grid cell is feasible.
OptimResult grid_search(const Objective& objective, const SearchSpace& space,
                        const GridConfig& config = {});

struct AnnealConfig {
  /// Defaults to the standard deviation of the initial random evaluations.
  std::optional<double> initial_temp;
  double cooling_ratio = 0.95;
  std::uint32_t steps_per_temp = 30;
  /// Defaults to 1e-4 times the initial temperature.
  std::optional<double> min_temp;
  std::uint32_t initial_samples = 50;
  /// Gaussian step size on T and Z as a fraction of the axis range.
  double step_fraction = 0.05;
};

/// Metropolis search with geometric cooling; returns the best point visited.
OptimResult simulated_annealing(const Objective& objective, const SearchSpace& space,
                                const AnnealConfig& config, std::uint64_t seed);

/// Nearest feasible point for a candidate with Z > K(T): lowers Z to K(T) or
/// moves T back to the time K reaches Z, whichever is closer relative to the
/// axis ranges. Nothing if neither lies within bounds.
std::optional<Policy> project_feasible(const SearchSpace& space, const Policy& policy);

/// Cost rate from the direct engine.
Objective direct_objective(std::shared_ptr<const direct::Evaluator> evaluator);

/// Cost rate from pre-simulated common-random-number paths.
Objective simulation_objective(std::shared_ptr<const ReplicationBank> bank, CostVector costs);

/// Bank horizon covering every policy in `space`.
ReplicationBank::Horizon bank_horizon(const SearchSpace& space);

}  // namespace cumdamage
