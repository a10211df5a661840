#pragma once

// Monte Carlo replacement-cycle simulation.
//
// One replication follows shocks i = 1, 2, ... with arrival times S_i and
// accumulated damage L_i until the first of:
//   - failure: L_i >= K(S_i) at a shock, or the strength decaying onto L_{i-1}
//     between shocks (cause 0);
//   - damage level: Z <= L_i < K(S_i) at a shock (cause 3);
//   - shock count: the N-th shock without failure or Z-crossing (cause 1);
//   - planned time T (cause 2).
// An event falling exactly at T wins over the planned-time trigger, and a
// shock that crosses both Z and the strength counts as a failure.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "cumdamage/scenario.hpp"
#include "cumdamage/stochastic.hpp"

namespace cumdamage {

enum class Cause : int {
  Failure = 0,
  ShockCount = 1,
  PlannedTime = 2,
  DamageLevel = 3,
};

struct LifetimeOutcome {
  double T_R = 0.0;
  Cause I_R = Cause::Failure;
  std::uint64_t shocks_seen = 0;
  double final_damage = 0.0;

  bool operator==(const LifetimeOutcome&) const = default;
};

inline constexpr std::uint64_t kDefaultIterationCap = 1'000'000;

struct SimulationOptions {
  std::size_t workers = 1;
  std::uint64_t iteration_cap = kDefaultIterationCap;
};

/// One replacement cycle. Throws NonterminatingError when more than
/// `iteration_cap` shocks occur.
LifetimeOutcome simulate_lifetime(const Scenario& scenario, const Policy& policy,
                                  RandomStream& stream,
                                  std::uint64_t iteration_cap = kDefaultIterationCap);

/// Per-cause counts and replacement-time sums over a set of replications.
/// Enough to form the cost-rate estimate for any cost vector.
struct Tally {
  std::array<std::uint64_t, 4> count{};  // indexed by Cause
  std::array<double, 4> sum_time{};      // sum of T_R per cause
  double sum_time_sq = 0.0;
  std::uint64_t n = 0;

  void add(const LifetimeOutcome& outcome);
};

struct CostRateEstimate {
  double cost_rate = 0.0;
  double p_T = 0.0;
  double p_N = 0.0;
  double p_Z = 0.0;
  double p_K = 0.0;
  std::array<std::uint64_t, 4> counts{};  // indexed by Cause
  double mean_T_R = 0.0;
  double std_error_cost_rate = 0.0;
  std::uint64_t n_reps = 0;
  std::uint64_t master_seed = 0;
};

/// Ratio estimator (sum of costs / sum of cycle lengths) with a first-order
/// delta-method standard error.
CostRateEstimate make_estimate(const Tally& tally, const CostVector& costs,
                               std::uint64_t master_seed);

/// Outcomes of replications 0..n_reps-1 on streams (master_seed, r).
/// Identical for any worker count.
std::vector<LifetimeOutcome> simulate_outcomes(const Scenario& scenario, const Policy& policy,
                                               std::uint64_t n_reps, std::uint64_t master_seed,
                                               const SimulationOptions& options = {});

CostRateEstimate estimate_cost_rate(const Scenario& scenario, const Policy& policy,
                                    std::uint64_t n_reps, std::uint64_t master_seed,
                                    const SimulationOptions& options = {});

struct CauseProbabilities {
  double p_T;
  double p_N;
  double p_Z;
  double p_K;
};

CauseProbabilities estimate_probabilities(const Scenario& scenario, const Policy& policy,
                                          std::uint64_t n_reps, std::uint64_t master_seed,
                                          const SimulationOptions& options = {});

/// Pre-simulated shock paths for common-random-number evaluation of many
/// policies. Each replication stores (S_i, L_i) until failure or until the
/// horizon covering every admissible policy is passed; a policy is then
/// evaluated per replication by binary search instead of re-simulation, and
/// gives exactly the outcomes of `simulate_lifetime` on the same streams.
class ReplicationBank {
 public:
  /// Every policy evaluated later must have T <= t_max (when set) and
  /// N <= n_max (when set).
  struct Horizon {
    std::optional<double> t_max;
    std::optional<std::uint32_t> n_max;
  };

  ReplicationBank(const Scenario& scenario, std::uint64_t n_reps, std::uint64_t master_seed,
                  Horizon horizon, const SimulationOptions& options = {});

  std::uint64_t size() const noexcept { return paths_.size(); }
  std::uint64_t master_seed() const noexcept { return master_seed_; }
  const Horizon& horizon() const noexcept { return horizon_; }

  bool covers(const Policy& policy) const;

  LifetimeOutcome outcome(std::uint64_t replication, const Policy& policy) const;
  Tally tally(const Policy& policy) const;
  CostRateEstimate estimate(const Policy& policy, const CostVector& costs) const;

 private:
  struct Path {
    std::size_t offset = 0;  // into arrivals_/damages_
    std::uint32_t length = 0;
    // First shock index (1-based) at which the unit fails, 0 if none stored.
    std::uint32_t failure_index = 0;
    bool failure_between_shocks = false;
    double failure_time = 0.0;
  };

  Horizon horizon_;
  std::uint64_t master_seed_;
  std::vector<Path> paths_;
  std::vector<double> arrivals_;
  std::vector<double> damages_;
};

}  // namespace cumdamage
