#include "cli.hpp"

#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "config.hpp"
#include "cumdamage/error.hpp"
#include "cumdamage/parallel.hpp"
#include "output.hpp"
#include "reproduce.hpp"
#include "runner.hpp"

namespace cumdamage::cli {

namespace {

struct GlobalFlags {
  std::uint64_t seed = 1;
  std::optional<std::uint64_t> reps;
  std::string engine = "simulate";
  std::string out_dir;
  std::string config_path;
  std::size_t workers = 1;
};

struct PolicyFlags {
  std::optional<double> T;
  std::optional<std::uint32_t> N;
  std::optional<double> Z;
  std::string json;

  void attach(CLI::App* app) {
    app->add_option("--T", T, "Planned replacement time");
    app->add_option("--N", N, "Replacement shock count");
    app->add_option("--Z", Z, "Replacement damage level");
    app->add_option("--policy", json, R"(Policy as JSON, e.g. {"T": 29.3, "N": null, "Z": 4.2})");
  }

  Policy policy() const {
    if (!json.empty()) {
      if (T || N || Z) throw ValidationError("give either --policy or --T/--N/--Z", "--policy");
      return parse_policy(json);
    }
    return {T, N, Z};
  }
};

struct CostFlags {
  std::optional<double> c_T, c_N, c_Z, c_K;

  void attach(CLI::App* app, bool with_failure_cost) {
    app->add_option("--cT", c_T, "Planned-time replacement cost");
    app->add_option("--cN", c_N, "Shock-count replacement cost");
    app->add_option("--cZ", c_Z, "Damage-level replacement cost");
    if (with_failure_cost) app->add_option("--cK", c_K, "Failure replacement cost");
  }

  void apply(Scenario& scenario) const {
    const CostVector& c = scenario.costs;
    scenario = scenario.with_costs(CostVector(c_T.value_or(c.c_T), c_N.value_or(c.c_N),
                                              c_Z.value_or(c.c_Z), c_K.value_or(c.c_K)));
  }
};

std::string command_line(int argc, const char* const* argv) {
  std::string s;
  for (int i = 1; i < argc; ++i) {
    if (i > 1) s += ' ';
    s += argv[i];
  }
  return s;
}

class Emitter {
 public:
  Emitter(std::ostream& out, const GlobalFlags& flags, std::string command, std::string label,
          std::uint64_t hash)
      : out_(out), dir_(flags.out_dir) {
    manifest_.command = std::move(command);
    manifest_.label = std::move(label);
    manifest_.config_hash = hash;
    manifest_.master_seed = flags.seed;
    manifest_.version = CUMDAMAGE_VERSION;
    manifest_.timestamp = utc_timestamp();
  }

  /// Prints to stdout when `show` is set; with --out, also writes the file
  /// and its manifest.
  void emit(const std::string& name, const CsvTable& table, bool show = true) {
    const std::string text = table.str();
    if (show) out_ << text;
    if (dir_.empty()) return;
    write_file(dir_, name, text);
    const std::string stem = name.substr(0, name.rfind('.'));
    write_file(dir_, stem + ".manifest.json", manifest_.json());
  }

 private:
  std::ostream& out_;
  std::string dir_;
  RunManifest manifest_;
};

RunConfig require_config(const GlobalFlags& flags) {
  if (flags.config_path.empty()) throw ValidationError("a scenario file is required", "--config");
  return load_run_config(flags.config_path);
}

std::uint64_t config_hash(const RunConfig& config, const std::string& command) {
  return fnv1a(config.canonical + "\n" + command);
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Replacement policies for a cumulative damage shock model", "cumdamage"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalFlags g;
  app.add_option("--seed", g.seed, "Master seed for simulation streams");
  app.add_option("--reps", g.reps, "Replications (evaluation, or the optimization bank)");
  app.add_option("--engine", g.engine, "direct | simulate");
  app.add_option("--out", g.out_dir, "Directory for CSV files and manifests");
  app.add_option("--config,--scenario", g.config_path, "Scenario JSON file");
  app.add_option("--workers", g.workers, "Worker threads (0 = all cores)");

  auto* evaluate = app.add_subcommand("evaluate", "Cost rate and cause probabilities of one policy");
  PolicyFlags eval_policy;
  CostFlags eval_costs;
  eval_policy.attach(evaluate);
  eval_costs.attach(evaluate, true);

  auto* optimize = app.add_subcommand("optimize", "Optimize a subset of (T, N, Z)");
  std::string opt_variables;
  std::string opt_method = "grid";
  std::optional<std::uint64_t> opt_final_reps;
  CostFlags opt_costs;
  optimize->add_option("--variables", opt_variables, "Subset of TNZ, e.g. TN")->required();
  optimize->add_option("--method", opt_method, "grid | anneal");
  optimize->add_option("--final-reps", opt_final_reps, "Re-evaluation replications (0 skips)");
  opt_costs.attach(optimize, true);

  auto* sweep = app.add_subcommand("sweep", "Optimum and minimal cost rate for each c_K");
  std::string sweep_variables;
  std::string sweep_method = "grid";
  std::vector<double> sweep_cK{2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::optional<std::uint64_t> sweep_final_reps;
  CostFlags sweep_costs;
  sweep->add_option("--variable,--variables", sweep_variables, "Subset of TNZ")->required();
  sweep->add_option("--method", sweep_method, "grid | anneal");
  sweep->add_option("--cK", sweep_cK, "Failure costs, comma separated")->delimiter(',');
  sweep->add_option("--final-reps", sweep_final_reps, "Re-evaluation replications (0 skips)");
  sweep_costs.attach(sweep, false);

  auto* repro = app.add_subcommand("reproduce", "Recompute a published table or case study");
  std::string repro_target;
  std::string repro_dir = CUMDAMAGE_SCENARIO_DIR;
  std::uint64_t repro_final_reps = 100000;
  repro->add_option("target", repro_target, "table1 | table2 | table3 | tables46 | tables56 | mailbox | battery")
      ->required();
  repro->add_option("--scenarios", repro_dir, "Directory of bundled scenario files");
  repro->add_option("--final-reps", repro_final_reps, "Replications for evaluations");

  auto* dump = app.add_subcommand("simulate-dump", "Per-replication outcomes of one policy");
  PolicyFlags dump_policy;
  CostFlags dump_costs;
  dump_policy.attach(dump);
  dump_costs.attach(dump, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  const std::string command = command_line(argc, argv);
  try {
    g.workers = resolve_workers(g.workers);
    const Engine engine = parse_engine(g.engine);

    if (evaluate->parsed()) {
      RunConfig config = require_config(g);
      eval_costs.apply(config.scenario);
      const Policy policy = eval_policy.policy();
      const std::uint64_t reps = g.reps.value_or(100000);
      const EvaluationReport r =
          evaluate_policy(config.scenario, config.numerics, policy, engine, reps, g.seed, g.workers);
      Emitter(out, g, command, config.scenario.label, config_hash(config, command))
          .emit("evaluate.csv", evaluation_table(config.scenario.label, engine, g.seed, {r}));
    } else if (optimize->parsed()) {
      RunConfig config = require_config(g);
      opt_costs.apply(config.scenario);
      OptimizeSettings s;
      s.axes = parse_axes(opt_variables);
      s.method = parse_method(opt_method);
      s.engine = engine;
      s.reps = g.reps.value_or(config.optimizer.reps);
      s.final_reps = opt_final_reps.value_or(config.optimizer.final_reps);
      s.seed = g.seed;
      s.workers = g.workers;
      const OptimizeReport r = optimize_policy(config, s);
      Emitter e(out, g, command, config.scenario.label, config_hash(config, command));
      e.emit("optimize.csv", optimize_table(config.scenario.label, s, r));
      e.emit("trace.csv", trace_table(r.result), false);
    } else if (sweep->parsed()) {
      RunConfig config = require_config(g);
      sweep_costs.apply(config.scenario);
      OptimizeSettings s;
      s.axes = parse_axes(sweep_variables);
      s.method = parse_method(sweep_method);
      s.engine = engine;
      s.reps = g.reps.value_or(config.optimizer.reps);
      s.final_reps = sweep_final_reps.value_or(0);
      s.seed = g.seed;
      s.workers = g.workers;
      const auto rows = sweep_failure_cost(config, s, sweep_cK);
      Emitter(out, g, command, config.scenario.label, config_hash(config, command))
          .emit("sweep_" + axes_name(s.axes) + ".csv", sweep_table(rows));
    } else if (repro->parsed()) {
      ReproOptions o;
      o.scenario_dir = repro_dir;
      o.seed = g.seed;
      o.workers = g.workers;
      o.reps = g.reps.value_or(10000);
      o.final_reps = repro_final_reps;
      const ReproBundle bundle = reproduce(repro_target, o);
      Emitter e(out, g, command, repro_target, fnv1a(command));
      e.emit(repro_target + ".csv", repro_table(bundle));
      for (const auto& [name, table] : bundle.extras) e.emit(name, table, false);
    } else if (dump->parsed()) {
      RunConfig config = require_config(g);
      dump_costs.apply(config.scenario);
      const Policy policy = dump_policy.policy();
      require_valid_policy(config.scenario, policy);
      const std::uint64_t reps = g.reps.value_or(1000);
      const auto outcomes = simulate_outcomes(config.scenario, policy, reps, g.seed, {g.workers});
      CsvTable t({"replication", "T_R", "I_R", "shocks_seen", "final_damage"});
      for (std::size_t r = 0; r < outcomes.size(); ++r) {
        const auto& o = outcomes[r];
        t.add_row({std::to_string(r), format_number(o.T_R), std::to_string(static_cast<int>(o.I_R)),
                   std::to_string(o.shocks_seen), format_number(o.final_damage)});
      }
      Emitter(out, g, command, config.scenario.label, config_hash(config, command))
          .emit("simulate_dump.csv", t);
    }
    return 0;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const UnsupportedError& e) {
    err << "unsupported: " << e.what() << "\n";
    return 3;
  } catch (const NonterminatingError& e) {
    err << "nonterminating: " << e.what() << "\n";
    return 4;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace cumdamage::cli
