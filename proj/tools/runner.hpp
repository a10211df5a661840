#pragma once

// Engine dispatch shared by the CLI commands and the reproduction runners.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "output.hpp"
#include "cumdamage/optimize.hpp"
#include "cumdamage/simulate.hpp"

namespace cumdamage::cli {

enum class Engine { Direct, Simulate };

Engine parse_engine(const std::string& name);
std::string engine_name(Engine engine);
Method parse_method(const std::string& name);

/// Subset of {T, N, Z} to optimize; the rest stay inactive.
struct Axes {
  bool T = false;
  bool N = false;
  bool Z = false;
};

/// Accepts e.g. "TNZ", "T,Z" or "N". Throws ValidationError when empty or
/// unrecognized.
Axes parse_axes(const std::string& text);
std::string axes_name(const Axes& axes);

struct EvaluationReport {
  Policy policy;
  double cost_rate = 0.0;
  double p_T = 0.0;
  double p_N = 0.0;
  double p_Z = 0.0;
  double p_K = 0.0;
  double mean_T_R = 0.0;
  /// Simulation only.
  std::optional<double> std_error;
  std::uint64_t n_reps = 0;
};

EvaluationReport evaluate_policy(const Scenario& scenario, const direct::NumericsConfig& numerics,
                                 const Policy& policy, Engine engine, std::uint64_t reps,
                                 std::uint64_t seed, std::size_t workers);

struct OptimizeSettings {
  Axes axes;
  Method method = Method::Grid;
  Engine engine = Engine::Simulate;
  /// Replications in the common-random-number bank.
  std::uint64_t reps = 10000;
  /// Replications for re-evaluating the incumbent; 0 skips it.
  std::uint64_t final_reps = 100000;
  std::uint64_t seed = 1;
  std::size_t workers = 1;
};

struct OptimizeReport {
  OptimResult result;
  SearchSpace space;
  /// Independent re-evaluation of the best policy on stream seed + 1
  /// (simulate) or the direct evaluation itself (direct).
  std::optional<EvaluationReport> final;
};

OptimizeReport optimize_policy(const RunConfig& config, const OptimizeSettings& settings);

struct SweepRow {
  double c_K = 0.0;
  OptimizeReport report;
};

/// One optimization per failure cost, all on the same common-random-number
/// bank (simulate) so the rows are directly comparable.
std::vector<SweepRow> sweep_failure_cost(const RunConfig& config, const OptimizeSettings& settings,
                                         const std::vector<double>& c_K_values);

/// label,engine,T,N,Z,cost_rate,p_T,p_N,p_Z,p_K,mean_T_R,std_error,n_reps,seed
CsvTable evaluation_table(const std::string& label, Engine engine, std::uint64_t seed,
                          const std::vector<EvaluationReport>& reports);

/// label,engine,method,variables,T,N,Z,value,evaluations,seed,final_cost_rate,final_std_error,final_reps
CsvTable optimize_table(const std::string& label, const OptimizeSettings& settings,
                        const OptimizeReport& report);

/// step,T,N,Z,value,accepted
CsvTable trace_table(const OptimResult& result);

/// c_K,T,N,Z,value,final_cost_rate,final_std_error
CsvTable sweep_table(const std::vector<SweepRow>& rows);

}  // namespace cumdamage::cli
