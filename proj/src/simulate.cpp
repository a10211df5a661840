#include "cumdamage/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "cumdamage/error.hpp"
#include "cumdamage/parallel.hpp"
#include "shock_process.hpp"

namespace cumdamage {

namespace {

LifetimeOutcome run_lifetime(const Scenario& scenario, const Policy& policy, RandomStream& stream,
                             std::uint64_t iteration_cap) {
  detail::ShockProcess process(scenario, stream);
  const StrengthCurve& curve = scenario.strength;
  double t_prev = 0.0;
  double L_prev = 0.0;

  for (std::uint64_t i = 1;; ++i) {
    if (i > iteration_cap) {
      throw NonterminatingError(
          "replication " + std::to_string(stream.replication_index()) + " exceeded " +
              std::to_string(iteration_cap) + " shocks without replacement",
          {stream.replication_index(), i - 1, t_prev, L_prev});
    }
    const auto shock = process.next(i);
    const double S = t_prev + shock.gap;

    // Strength decaying onto the current damage before this shock lands.
    if (const auto tc = crossing_time(curve, L_prev); tc && *tc <= S) {
      if (policy.T && *tc > *policy.T) return {*policy.T, Cause::PlannedTime, i - 1, L_prev};
      return {*tc, Cause::Failure, i - 1, L_prev};
    }
    if (policy.T && S > *policy.T) return {*policy.T, Cause::PlannedTime, i - 1, L_prev};

    const double L = L_prev + shock.damage;
    if (L >= strength_at(curve, S)) return {S, Cause::Failure, i, L};
    if (policy.Z && L >= *policy.Z) return {S, Cause::DamageLevel, i, L};
    if (policy.N && i == *policy.N) return {S, Cause::ShockCount, i, L};

    t_prev = S;
    L_prev = L;
  }
}

}  // namespace

LifetimeOutcome simulate_lifetime(const Scenario& scenario, const Policy& policy,
                                  RandomStream& stream, std::uint64_t iteration_cap) {
  require_valid_policy(scenario, policy);
  return run_lifetime(scenario, policy, stream, iteration_cap);
}

void Tally::add(const LifetimeOutcome& outcome) {
  const auto c = static_cast<std::size_t>(outcome.I_R);
  ++count[c];
  sum_time[c] += outcome.T_R;
  sum_time_sq += outcome.T_R * outcome.T_R;
  ++n;
}

CostRateEstimate make_estimate(const Tally& tally, const CostVector& costs,
                               std::uint64_t master_seed) {
  CostRateEstimate est;
  est.n_reps = tally.n;
  est.master_seed = master_seed;
  est.counts = tally.count;
  if (tally.n == 0) return est;

  const std::array<double, 4> unit_cost = {costs.c_K, costs.c_N, costs.c_T, costs.c_Z};
  double total_cost = 0.0;
  double total_cost_sq = 0.0;
  double total_cost_time = 0.0;
  double total_time = 0.0;
  for (std::size_t c = 0; c < 4; ++c) {
    const auto k = static_cast<double>(tally.count[c]);
    total_cost += unit_cost[c] * k;
    total_cost_sq += unit_cost[c] * unit_cost[c] * k;
    total_cost_time += unit_cost[c] * tally.sum_time[c];
    total_time += tally.sum_time[c];
  }
  const auto n = static_cast<double>(tally.n);
  est.cost_rate = total_cost / total_time;
  est.mean_T_R = total_time / n;
  est.p_K = static_cast<double>(tally.count[0]) / n;
  est.p_N = static_cast<double>(tally.count[1]) / n;
  est.p_T = static_cast<double>(tally.count[2]) / n;
  est.p_Z = static_cast<double>(tally.count[3]) / n;

  if (tally.n > 1) {
    // Residual Y - R X of the ratio estimator, first-order delta method.
    const double R = est.cost_rate;
    const double ss = total_cost_sq - 2.0 * R * total_cost_time + R * R * tally.sum_time_sq;
    const double var_resid = std::max(ss, 0.0) / (n - 1.0);
    est.std_error_cost_rate = std::sqrt(var_resid / n) / est.mean_T_R;
  }
  return est;
}

std::vector<LifetimeOutcome> simulate_outcomes(const Scenario& scenario, const Policy& policy,
                                               std::uint64_t n_reps, std::uint64_t master_seed,
                                               const SimulationOptions& options) {
  if (n_reps < 1) throw ValidationError("n_reps must be at least 1", "n_reps");
  require_valid_policy(scenario, policy);
  std::vector<LifetimeOutcome> outcomes(n_reps);
  parallel_chunks(n_reps, options.workers, [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      RandomStream stream(master_seed, r);
      outcomes[r] = run_lifetime(scenario, policy, stream, options.iteration_cap);
    }
  });
  return outcomes;
}

CostRateEstimate estimate_cost_rate(const Scenario& scenario, const Policy& policy,
                                    std::uint64_t n_reps, std::uint64_t master_seed,
                                    const SimulationOptions& options) {
  Tally tally;
  for (const auto& o : simulate_outcomes(scenario, policy, n_reps, master_seed, options)) {
    tally.add(o);
  }
  return make_estimate(tally, scenario.costs, master_seed);
}

CauseProbabilities estimate_probabilities(const Scenario& scenario, const Policy& policy,
                                          std::uint64_t n_reps, std::uint64_t master_seed,
                                          const SimulationOptions& options) {
  const auto est = estimate_cost_rate(scenario, policy, n_reps, master_seed, options);
  return {est.p_T, est.p_N, est.p_Z, est.p_K};
}

}  // namespace cumdamage
