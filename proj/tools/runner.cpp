#include "runner.hpp"

#include <memory>

#include "cumdamage/error.hpp"

namespace cumdamage::cli {

Engine parse_engine(const std::string& name) {
  if (name == "direct") return Engine::Direct;
  if (name == "simulate") return Engine::Simulate;
  throw ValidationError("unknown engine '" + name + "' (expected direct or simulate)", "--engine");
}

std::string engine_name(Engine engine) {
  return engine == Engine::Direct ? "direct" : "simulate";
}

Method parse_method(const std::string& name) {
  if (name == "grid") return Method::Grid;
  if (name == "anneal") return Method::Anneal;
  throw ValidationError("unknown method '" + name + "' (expected grid or anneal)", "--method");
}

Axes parse_axes(const std::string& text) {
  Axes axes;
  for (char c : text) {
    bool* slot = nullptr;
    if (c == 'T') slot = &axes.T;
    else if (c == 'N') slot = &axes.N;
    else if (c == 'Z') slot = &axes.Z;
    else if (c == ',' || c == ' ') continue;
    else throw ValidationError(std::string("unknown variable '") + c + "'", "--variables");
    if (*slot) throw ValidationError(std::string("variable '") + c + "' repeated", "--variables");
    *slot = true;
  }
  if (!axes.T && !axes.N && !axes.Z) {
    throw ValidationError("at least one of T, N, Z is required", "--variables");
  }
  return axes;
}

std::string axes_name(const Axes& axes) {
  std::string s;
  if (axes.T) s += 'T';
  if (axes.N) s += 'N';
  if (axes.Z) s += 'Z';
  return s;
}

EvaluationReport evaluate_policy(const Scenario& scenario, const direct::NumericsConfig& numerics,
                                 const Policy& policy, Engine engine, std::uint64_t reps,
                                 std::uint64_t seed, std::size_t workers) {
  require_valid_policy(scenario, policy);
  EvaluationReport r;
  r.policy = policy;
  if (engine == Engine::Direct) {
    const direct::Evaluation e = direct::evaluate(scenario, policy, numerics);
    r.cost_rate = e.cost_rate;
    r.p_T = e.probabilities.p_T;
    r.p_N = e.probabilities.p_N;
    r.p_Z = e.probabilities.p_Z;
    r.p_K = e.probabilities.p_K;
    r.mean_T_R = e.mean_time;
    return r;
  }
  if (reps < 2) throw ValidationError("at least 2 replications are required", "--reps");
  const CostRateEstimate e = estimate_cost_rate(scenario, policy, reps, seed, {workers});
  r.cost_rate = e.cost_rate;
  r.p_T = e.p_T;
  r.p_N = e.p_N;
  r.p_Z = e.p_Z;
  r.p_K = e.p_K;
  r.mean_T_R = e.mean_T_R;
  r.std_error = e.std_error_cost_rate;
  r.n_reps = e.n_reps;
  return r;
}

namespace {

/// Objectives for one search space across several cost vectors.
class ObjectiveSource {
 public:
  ObjectiveSource(const RunConfig& config, const SearchSpace& space, const OptimizeSettings& s)
      : config_(config), settings_(s) {
    if (s.engine == Engine::Direct) {
      if (!direct::supports(config.scenario)) {
        throw UnsupportedError("the direct engine requires exponential inter-arrivals and iid exponential damages");
      }
    } else {
      if (s.reps < 2) throw ValidationError("at least 2 replications are required", "--reps");
      bank_ = std::make_shared<const ReplicationBank>(config.scenario, s.reps, s.seed,
                                                      bank_horizon(space),
                                                      SimulationOptions{s.workers});
    }
  }

  Objective objective(const CostVector& costs) const {
    if (bank_) return simulation_objective(bank_, costs);
    return direct_objective(std::make_shared<const direct::Evaluator>(
        config_.scenario.with_costs(costs), config_.numerics));
  }

 private:
  const RunConfig& config_;
  OptimizeSettings settings_;
  std::shared_ptr<const ReplicationBank> bank_;
};

OptimizeReport run_one(const RunConfig& config, const SearchSpace& space,
                       const OptimizeSettings& s, const Objective& objective,
                       const CostVector& costs) {
  OptimizeReport report;
  report.space = space;
  if (s.method == Method::Grid) {
    GridConfig grid = config.optimizer.grid;
    grid.workers = s.workers;
    report.result = grid_search(objective, space, grid);
  } else {
    report.result = simulated_annealing(objective, space, config.optimizer.anneal, s.seed);
  }
  report.result.seed = s.seed;
  const Scenario scenario = config.scenario.with_costs(costs);
  if (s.engine == Engine::Direct) {
    report.final = evaluate_policy(scenario, config.numerics, report.result.best_policy,
                                   Engine::Direct, 0, s.seed, s.workers);
  } else if (s.final_reps > 0) {
    report.final = evaluate_policy(scenario, config.numerics, report.result.best_policy,
                                   Engine::Simulate, s.final_reps, s.seed + 1, s.workers);
  }
  return report;
}

}  // namespace

OptimizeReport optimize_policy(const RunConfig& config, const OptimizeSettings& settings) {
  const SearchSpace space = search_space_for(config, settings.axes.T, settings.axes.N, settings.axes.Z);
  const ObjectiveSource source(config, space, settings);
  return run_one(config, space, settings, source.objective(config.scenario.costs),
                 config.scenario.costs);
}

std::vector<SweepRow> sweep_failure_cost(const RunConfig& config, const OptimizeSettings& settings,
                                         const std::vector<double>& c_K_values) {
  if (c_K_values.empty()) throw ValidationError("no failure costs given", "--cK");
  std::vector<CostVector> costs;
  for (double c_K : c_K_values) costs.push_back(config.scenario.costs.with_failure_cost(c_K));
  const SearchSpace space = search_space_for(config, settings.axes.T, settings.axes.N, settings.axes.Z);
  const ObjectiveSource source(config, space, settings);
  std::vector<SweepRow> rows;
  for (std::size_t i = 0; i < costs.size(); ++i) {
    rows.push_back({c_K_values[i], run_one(config, space, settings, source.objective(costs[i]), costs[i])});
  }
  return rows;
}

namespace {

std::vector<std::string> policy_fields(const Policy& p) {
  return {format_optional(p.T), format_optional(p.N), format_optional(p.Z)};
}

std::string optional_number(const std::optional<double>& v) {
  return v ? format_number(*v) : "";
}

}  // namespace

CsvTable evaluation_table(const std::string& label, Engine engine, std::uint64_t seed,
                          const std::vector<EvaluationReport>& reports) {
  CsvTable t({"label", "engine", "T", "N", "Z", "cost_rate", "p_T", "p_N", "p_Z", "p_K",
              "mean_T_R", "std_error", "n_reps", "seed"});
  for (const auto& r : reports) {
    std::vector<std::string> row{label, engine_name(engine)};
    for (auto& f : policy_fields(r.policy)) row.push_back(std::move(f));
    for (double v : {r.cost_rate, r.p_T, r.p_N, r.p_Z, r.p_K, r.mean_T_R}) {
      row.push_back(format_number(v));
    }
    row.push_back(optional_number(r.std_error));
    row.push_back(std::to_string(r.n_reps));
    row.push_back(engine == Engine::Simulate ? std::to_string(seed) : "");
    t.add_row(std::move(row));
  }
  return t;
}

CsvTable optimize_table(const std::string& label, const OptimizeSettings& settings,
                        const OptimizeReport& report) {
  CsvTable t({"label", "engine", "method", "variables", "T", "N", "Z", "value", "evaluations",
              "seed", "final_cost_rate", "final_std_error", "final_reps"});
  std::vector<std::string> row{label, engine_name(settings.engine),
                               method_name(report.result.method), axes_name(settings.axes)};
  for (auto& f : policy_fields(report.result.best_policy)) row.push_back(std::move(f));
  row.push_back(format_number(report.result.best_value));
  row.push_back(std::to_string(report.result.evaluations));
  row.push_back(std::to_string(report.result.seed));
  row.push_back(report.final ? format_number(report.final->cost_rate) : "");
  row.push_back(report.final ? optional_number(report.final->std_error) : "");
  row.push_back(report.final ? std::to_string(report.final->n_reps) : "");
  t.add_row(std::move(row));
  return t;
}

CsvTable trace_table(const OptimResult& result) {
  CsvTable t({"step", "T", "N", "Z", "value", "accepted"});
  for (std::size_t i = 0; i < result.trace.size(); ++i) {
    const auto& e = result.trace[i];
    std::vector<std::string> row{std::to_string(i)};
    for (auto& f : policy_fields(e.policy)) row.push_back(std::move(f));
    row.push_back(format_number(e.value));
    row.push_back(e.accepted ? "1" : "0");
    t.add_row(std::move(row));
  }
  return t;
}

CsvTable sweep_table(const std::vector<SweepRow>& rows) {
  CsvTable t({"c_K", "T", "N", "Z", "value", "final_cost_rate", "final_std_error"});
  for (const auto& r : rows) {
    std::vector<std::string> row{format_number(r.c_K)};
    for (auto& f : policy_fields(r.report.result.best_policy)) row.push_back(std::move(f));
    row.push_back(format_number(r.report.result.best_value));
    row.push_back(r.report.final ? format_number(r.report.final->cost_rate) : "");
    row.push_back(r.report.final ? optional_number(r.report.final->std_error) : "");
    t.add_row(std::move(row));
  }
  return t;
}

}  // namespace cumdamage::cli
