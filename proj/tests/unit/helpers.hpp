#pragma once

#include <string>

#include "cumdamage/scenario.hpp"

namespace cumdamage::test {

inline Scenario expdecay_exp_exp(double c_K = 2, CostVector costs = {1, 1, 1, 2}) {
  return {Exponential(0.4), IidDamage{Exponential(4)}, ExponentialDecayStrength(100, 0.1),
          costs.with_failure_cost(c_K), "expdecay"};
}

inline Scenario constant_exp_exp(double c_K = 2) {
  return {Exponential(0.5), IidDamage{Exponential(1)}, ConstantStrength(10), {1, 1, 1, c_K},
          "constant"};
}

inline Scenario linear_exp_exp(double c_K = 2, CostVector costs = {1, 1, 1, 2}) {
  return {Exponential(0.5), IidDamage{Exponential(0.5)}, LinearStrength(50, 1),
          costs.with_failure_cost(c_K), "linear"};
}

/// Deterministic(1) arrivals, Deterministic(0.4) damages.
inline Scenario point_mass(double K, CostVector costs = {1, 1, 1, 2}) {
  return {Deterministic(1), IidDamage{Deterministic(0.4)}, ConstantStrength(K), costs, "point"};
}

inline std::string scenario_path(const std::string& name) {
  return std::string(CUMDAMAGE_SCENARIO_DIR) + "/" + name + ".json";
}

}  // namespace cumdamage::test
