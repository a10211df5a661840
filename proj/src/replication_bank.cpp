#include <algorithm>
#include <stdexcept>

#include "cumdamage/error.hpp"
#include "cumdamage/parallel.hpp"
#include "cumdamage/simulate.hpp"
#include "shock_process.hpp"

namespace cumdamage {

namespace {

struct ChunkStore {
  std::vector<double> arrivals;
  std::vector<double> damages;
};

}  // namespace

ReplicationBank::ReplicationBank(const Scenario& scenario, std::uint64_t n_reps,
                                 std::uint64_t master_seed, Horizon horizon,
                                 const SimulationOptions& options)
    : horizon_(horizon), master_seed_(master_seed), paths_(n_reps) {
  if (n_reps < 1) throw ValidationError("n_reps must be at least 1", "n_reps");
  const std::size_t workers = std::min<std::size_t>(resolve_workers(options.workers), n_reps);
  const std::size_t chunk = (n_reps + workers - 1) / workers;
  std::vector<ChunkStore> stores(workers);

  parallel_chunks(n_reps, workers, [&](std::size_t begin, std::size_t end) {
    ChunkStore& store = stores[begin / chunk];
    for (std::size_t r = begin; r < end; ++r) {
      RandomStream stream(master_seed, r);
      detail::ShockProcess process(scenario, stream);
      Path& path = paths_[r];
      path.offset = store.arrivals.size();
      double t_prev = 0.0;
      double L_prev = 0.0;
      for (std::uint64_t i = 1;; ++i) {
        if (i > options.iteration_cap) {
          throw NonterminatingError("replication " + std::to_string(r) + " exceeded " +
                                        std::to_string(options.iteration_cap) +
                                        " shocks without failure or horizon",
                                    {r, i - 1, t_prev, L_prev});
        }
        const auto shock = process.next(i);
        const double S = t_prev + shock.gap;
        if (const auto tc = crossing_time(scenario.strength, L_prev); tc && *tc <= S) {
          path.failure_index = static_cast<std::uint32_t>(i);
          path.failure_between_shocks = true;
          path.failure_time = *tc;
          break;
        }
        const double L = L_prev + shock.damage;
        store.arrivals.push_back(S);
        store.damages.push_back(L);
        ++path.length;
        if (L >= strength_at(scenario.strength, S)) {
          path.failure_index = static_cast<std::uint32_t>(i);
          path.failure_time = S;
          break;
        }
        if ((horizon_.t_max && S > *horizon_.t_max) || (horizon_.n_max && i >= *horizon_.n_max)) {
          break;
        }
        t_prev = S;
        L_prev = L;
      }
    }
  });

  std::size_t total = 0;
  std::vector<std::size_t> base(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    base[w] = total;
    total += stores[w].arrivals.size();
  }
  arrivals_.reserve(total);
  damages_.reserve(total);
  for (auto& s : stores) {
    arrivals_.insert(arrivals_.end(), s.arrivals.begin(), s.arrivals.end());
    damages_.insert(damages_.end(), s.damages.begin(), s.damages.end());
    s = {};
  }
  for (std::size_t r = 0; r < n_reps; ++r) paths_[r].offset += base[r / chunk];
}

bool ReplicationBank::covers(const Policy& policy) const {
  if (horizon_.t_max && !(policy.T && *policy.T <= *horizon_.t_max)) return false;
  if (horizon_.n_max && !(policy.N && *policy.N <= *horizon_.n_max)) return false;
  return true;
}

LifetimeOutcome ReplicationBank::outcome(std::uint64_t replication, const Policy& policy) const {
  const Path& path = paths_.at(replication);
  const double* S = arrivals_.data() + path.offset;
  const double* L = damages_.data() + path.offset;
  const std::uint64_t m = path.length;

  // Earliest event by (shock index, priority); failure beats Z beats N.
  std::uint64_t best_index = 0;
  LifetimeOutcome best;
  bool found = false;
  auto consider = [&](std::uint64_t index, const LifetimeOutcome& o) {
    if (!found || index < best_index) {
      best_index = index;
      best = o;
      found = true;
    }
  };

  if (path.failure_index > 0) {
    const std::uint64_t f = path.failure_index;
    if (path.failure_between_shocks) {
      consider(f, {path.failure_time, Cause::Failure, f - 1, f >= 2 ? L[f - 2] : 0.0});
    } else {
      consider(f, {path.failure_time, Cause::Failure, f, L[f - 1]});
    }
  }
  if (policy.Z) {
    const double* hit = std::lower_bound(L, L + m, *policy.Z);
    if (hit != L + m) {
      const auto k = static_cast<std::uint64_t>(hit - L);
      consider(k + 1, {S[k], Cause::DamageLevel, k + 1, L[k]});
    }
  }
  if (policy.N && *policy.N <= m) {
    const std::uint64_t k = *policy.N - 1;
    consider(k + 1, {S[k], Cause::ShockCount, k + 1, L[k]});
  }

  if (policy.T && (!found || best.T_R > *policy.T)) {
    const auto seen = static_cast<std::uint64_t>(std::upper_bound(S, S + m, *policy.T) - S);
    return {*policy.T, Cause::PlannedTime, seen, seen > 0 ? L[seen - 1] : 0.0};
  }
  if (!found) throw std::logic_error("replication bank horizon does not cover policy");
  return best;
}

Tally ReplicationBank::tally(const Policy& policy) const {
  if (!covers(policy)) {
    throw ValidationError("policy " + describe(policy) + " lies outside the bank horizon",
                          "policy");
  }
  Tally t;
  for (std::uint64_t r = 0; r < paths_.size(); ++r) t.add(outcome(r, policy));
  return t;
}

CostRateEstimate ReplicationBank::estimate(const Policy& policy, const CostVector& costs) const {
  return make_estimate(tally(policy), costs, master_seed_);
}

}  // namespace cumdamage
