#pragma once

// Direct numerical evaluation of expected cost rates for exponential shock
// inter-arrivals and iid exponential damages. Erlang convolutions reduce to
// Poisson sums; the remaining time integrals use adaptive quadrature.

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <utility>
#include <vector>

#include "cumdamage/scenario.hpp"

namespace cumdamage::direct {

struct NumericsConfig {
  std::uint64_t series_cap = 10000;
  double series_tolerance = 1e-12;
  double quadrature_abs_tol = 1e-10;
  double quadrature_rel_tol = 1e-8;
  /// Infinite time integrals stop where the governing Erlang law has this
  /// much mass to the left.
  double horizon_quantile = 1.0 - 1e-10;
  /// Terms appended past every truncation point (convergence audits).
  std::uint64_t extra_series_terms = 0;
  /// Integrate the damage convolution numerically instead of in closed form.
  bool inner_damage_quadrature = false;

  /// Throws ValidationError on out-of-range settings.
  void validate() const;
};

struct Probabilities {
  double p_T = 0.0;
  double p_N = 0.0;
  double p_Z = 0.0;
  double p_K = 0.0;
};

struct Evaluation {
  double cost_rate = 0.0;
  Probabilities probabilities;
  double mean_time = 0.0;
};

/// True when the scenario has exponential inter-arrivals and iid exponential
/// damages.
bool supports(const Scenario& scenario);

/// Any non-empty valid policy. Throws UnsupportedError outside Exp/Exp.
Evaluation evaluate(const Scenario& scenario, const Policy& policy,
                    const NumericsConfig& cfg = {});

double cost_rate_T(const Scenario& scenario, double T, const NumericsConfig& cfg = {});
double cost_rate_N(const Scenario& scenario, std::uint32_t N, const NumericsConfig& cfg = {});
double cost_rate_Z(const Scenario& scenario, double Z, const NumericsConfig& cfg = {});
/// All three components must be active.
double cost_rate_TNZ(const Scenario& scenario, const Policy& policy,
                     const NumericsConfig& cfg = {});

/// Joint policy only. p_K is computed from its own integral and checked
/// against 1 - p_T - p_N - p_Z; a gap above 1e-8 raises NumericalError.
Probabilities replacement_probabilities(const Scenario& scenario, const Policy& policy,
                                        const NumericsConfig& cfg = {});

double mean_time_to_replacement(const Scenario& scenario, const Policy& policy,
                                const NumericsConfig& cfg = {});

/// P[D_j < Z, Z <= D_j + W < K] for D_j the sum of j Exp(mu) damages and W
/// one more, Z <= K. Closed form pois(j; mu Z) (1 - e^{-mu (K - Z)}), or the
/// convolution integral over [0, Z] when `quadrature` is set.
double inner_damage_mass(std::uint64_t j, double mu, double Z, double K, bool quadrature,
                         const NumericsConfig& cfg = {});

/// Evaluator for many policies on one scenario. Policies with both T and Z
/// active share per-(T, Z) series, so sweeping N is cheap. Thread-safe.
class Evaluator {
 public:
  explicit Evaluator(Scenario scenario, NumericsConfig cfg = {});
  ~Evaluator();

  Evaluation operator()(const Policy& policy) const;
  const Scenario& scenario() const noexcept { return scenario_; }

  struct Profile;

 private:
  Scenario scenario_;
  NumericsConfig cfg_;
  mutable std::mutex mutex_;
  mutable std::map<std::pair<double, double>, std::shared_ptr<const Profile>> cache_;
};

}  // namespace cumdamage::direct
