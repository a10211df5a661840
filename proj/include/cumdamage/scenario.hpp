#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cumdamage/stochastic.hpp"
#include "cumdamage/strength.hpp"

namespace cumdamage {

/// Replacement costs. Preventive triggers (planned time, shock count, damage
/// level) are cheaper than corrective replacement at failure.
struct CostVector {
  double c_T;
  double c_N;
  double c_Z;
  double c_K;

  /// Throws ValidationError unless all costs are positive and c_K dominates.
  CostVector(double c_T, double c_N, double c_Z, double c_K);

  CostVector scaled(double k) const { return {k * c_T, k * c_N, k * c_Z, k * c_K}; }
  CostVector with_failure_cost(double c_K_new) const { return {c_T, c_N, c_Z, c_K_new}; }

  bool operator==(const CostVector&) const = default;
};

/// Preventive replacement triple. An empty optional is an inactive trigger.
struct Policy {
  std::optional<double> T;
  std::optional<std::uint32_t> N;
  std::optional<double> Z;

  bool empty() const noexcept { return !T && !N && !Z; }
  bool operator==(const Policy&) const = default;
};

struct Scenario {
  DistributionSpec inter_arrival;
  DamageModel damage;
  StrengthCurve strength;
  CostVector costs;
  std::string label;

  /// Validates every cross-field invariant.
  Scenario(DistributionSpec inter_arrival, DamageModel damage, StrengthCurve strength,
           CostVector costs, std::string label = {});

  /// Mean inter-arrival time.
  double mean_inter_arrival() const { return mean(inter_arrival); }

  Scenario with_costs(const CostVector& c) const;

  bool operator==(const Scenario&) const = default;
};

struct PolicyViolation {
  std::string field;
  std::string message;
};

/// Every policy invariant that fails against the scenario's strength curve.
/// An empty result means the policy is valid.
std::vector<PolicyViolation> validate_policy(const Scenario& scenario, const Policy& policy);

/// Throws ValidationError carrying the first violation, if any.
void require_valid_policy(const Scenario& scenario, const Policy& policy);

inline constexpr int kScenarioSchemaVersion = 1;

/// Parses a scenario document. Besides the scenario keys the document may
/// carry `optimizer` and `numerics` blocks, which are ignored here.
/// Throws ParseError, SchemaError or ValidationError naming the offending path.
Scenario load_scenario(std::string_view document);

/// Reads and parses a scenario file.
Scenario load_scenario_file(const std::string& path);

/// Canonical JSON for a scenario (stable key order, full precision).
std::string dump_scenario(const Scenario& scenario);

/// `{"T": 29.34, "N": null, "Z": null}` with null = inactive; missing keys are inactive.
Policy parse_policy(std::string_view document);
std::string dump_policy(const Policy& policy);

std::string describe(const Policy& policy);

}  // namespace cumdamage
